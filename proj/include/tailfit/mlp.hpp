// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailfit {

enum class Activation { identity, tanh, sigmoid, softplus };

const char* to_string(Activation a);
Activation activation_from_string(std::string_view name);

double apply_activation(Activation a, double z);
// Derivative of the activation at pre-activation z, given the already
// computed value activation(z).
double activation_derivative(Activation a, double z, double value);

/// One affine layer. Each output unit carries its own activation tag so a
/// head layer can mix units (e.g. a bounded unit next to a positive one).
/// A single-element activation list broadcasts over all outputs.
struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<Activation> activations;
};

struct SgdConfig {
    double learning_rate = 0.01;
};

/// Minimal dense feed-forward network with exact reverse-mode gradients.
///
/// forward() caches the intermediates backward() needs; backward()
/// accumulates parameter gradients (and returns the gradient with respect
/// to the input, so networks can be chained); sgd_step() applies plain
/// gradient descent and clears the accumulators.
class Mlp {
  public:
    explicit Mlp(std::vector<LayerSpec> spec);

    std::size_t input_size() const { return layers_.front().in; }
    std::size_t output_size() const { return layers_.back().out; }
    std::size_t layer_count() const { return layers_.size(); }

    std::vector<double> forward(std::span<const double> input);

    /// Backpropagates d(loss)/d(output) through the cached forward pass and
    /// returns d(loss)/d(input). Parameter gradients accumulate unless
    /// accumulate_parameter_grads is false (used when only the input
    /// gradient of a frozen network is wanted). Throws std::logic_error if
    /// no forward pass is cached.
    std::vector<double> backward(std::span<const double> output_grad,
                                 bool accumulate_parameter_grads = true);

    /// parameter -= learning_rate * gradient, then zeroes the accumulators.
    void sgd_step(const SgdConfig& cfg);

    void zero_gradients();

    // Flat parameter view (weights then biases, layer by layer) for
    // serialization and finite-difference checks.
    std::size_t parameter_count() const;
    double parameter(std::size_t index) const;
    void set_parameter(std::size_t index, double value);
    double gradient(std::size_t index) const;

    std::span<double> weights(std::size_t layer);
    std::span<double> biases(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<const double> biases(std::size_t layer) const;
    const std::vector<Activation>& activations(std::size_t layer) const;
    std::size_t layer_in(std::size_t layer) const { return layers_.at(layer).in; }
    std::size_t layer_out(std::size_t layer) const { return layers_.at(layer).out; }

    /// JSON document with layer dimensions, activation tags and flat
    /// parameter arrays; from_json() restores an identical network.
    std::string to_json() const;
    static Mlp from_json(const std::string& text);

  private:
    struct Layer {
        std::size_t in;
        std::size_t out;
        std::vector<Activation> acts;  // one per output unit
        std::vector<double> w;         // out x in, row-major
        std::vector<double> b;
        std::vector<double> grad_w;
        std::vector<double> grad_b;
        std::vector<double> z;  // cached pre-activations
        std::vector<double> a;  // cached activations
    };

    std::vector<Layer> layers_;
    std::vector<double> input_cache_;
    bool has_forward_cache_ = false;
};

/// Binary cross entropy -[t ln p + (1-t) ln(1-p)] with the prediction
/// clamped to [1e-7, 1 - 1e-7] so the loss stays finite.
double bce_loss(double prediction, double target);

/// d bce_loss / d prediction at the clamped prediction.
double bce_loss_gradient(double prediction, double target);

}  // namespace tailfit
