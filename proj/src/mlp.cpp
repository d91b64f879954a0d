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

#include "tailfit/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace tailfit {

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double stable_softplus(double z) {
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

constexpr double kBceClamp = 1e-7;

}  // namespace

const char* to_string(Activation a) {
    switch (a) {
        case Activation::identity: return "identity";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::softplus: return "softplus";
    }
    throw std::logic_error("unknown activation tag");
}

Activation activation_from_string(std::string_view name) {
    if (name == "identity") return Activation::identity;
    if (name == "tanh") return Activation::tanh;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "softplus") return Activation::softplus;
    throw std::invalid_argument("unknown activation name: " + std::string(name));
}

double apply_activation(Activation a, double z) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::tanh: return std::tanh(z);
        case Activation::sigmoid: return stable_sigmoid(z);
        case Activation::softplus: return stable_softplus(z);
    }
    throw std::logic_error("unknown activation tag");
}

double activation_derivative(Activation a, double z, double value) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::tanh: return 1.0 - value * value;
        case Activation::sigmoid: return value * (1.0 - value);
        case Activation::softplus: return stable_sigmoid(z);
    }
    throw std::logic_error("unknown activation tag");
}

Mlp::Mlp(std::vector<LayerSpec> spec) {
    if (spec.empty()) {
        throw std::invalid_argument("Mlp: at least one layer required");
    }
    layers_.reserve(spec.size());
    std::size_t expected_in = spec.front().in;
    for (const LayerSpec& s : spec) {
        if (s.in == 0 || s.out == 0) {
            throw std::invalid_argument("Mlp: layer dimensions must be positive");
        }
        if (s.in != expected_in) {
            throw std::invalid_argument("Mlp: consecutive layer dimensions incompatible");
        }
        Layer layer;
        layer.in = s.in;
        layer.out = s.out;
        if (s.activations.size() == 1) {
            layer.acts.assign(s.out, s.activations.front());
        } else if (s.activations.size() == s.out) {
            layer.acts = s.activations;
        } else {
            throw std::invalid_argument("Mlp: activation list must have 1 or 'out' entries");
        }
        layer.w.assign(s.out * s.in, 0.0);
        layer.b.assign(s.out, 0.0);
        layer.grad_w.assign(s.out * s.in, 0.0);
        layer.grad_b.assign(s.out, 0.0);
        layer.z.assign(s.out, 0.0);
        layer.a.assign(s.out, 0.0);
        layers_.push_back(std::move(layer));
        expected_in = s.out;
    }
}

std::vector<double> Mlp::forward(std::span<const double> input) {
    if (input.size() != input_size()) {
        throw std::invalid_argument("Mlp::forward: input length mismatch");
    }
    input_cache_.assign(input.begin(), input.end());
    const std::vector<double>* current = &input_cache_;
    for (Layer& layer : layers_) {
        for (std::size_t o = 0; o < layer.out; ++o) {
            double z = layer.b[o];
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) {
                z += row[i] * (*current)[i];
            }
            layer.z[o] = z;
            layer.a[o] = apply_activation(layer.acts[o], z);
        }
        current = &layer.a;
    }
    has_forward_cache_ = true;
    return layers_.back().a;
}

std::vector<double> Mlp::backward(std::span<const double> output_grad,
                                  bool accumulate_parameter_grads) {
    if (!has_forward_cache_) {
        throw std::logic_error("Mlp::backward: no forward pass cached");
    }
    if (output_grad.size() != output_size()) {
        throw std::invalid_argument("Mlp::backward: output gradient length mismatch");
    }
    std::vector<double> delta(output_grad.begin(), output_grad.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
        Layer& layer = layers_[l];
        const std::vector<double>& below =
            (l == 0) ? input_cache_ : layers_[l - 1].a;
        // d loss / d pre-activation
        for (std::size_t o = 0; o < layer.out; ++o) {
            delta[o] *= activation_derivative(layer.acts[o], layer.z[o], layer.a[o]);
        }
        if (accumulate_parameter_grads) {
            for (std::size_t o = 0; o < layer.out; ++o) {
                double* grow = layer.grad_w.data() + o * layer.in;
                for (std::size_t i = 0; i < layer.in; ++i) {
                    grow[i] += delta[o] * below[i];
                }
                layer.grad_b[o] += delta[o];
            }
        }
        std::vector<double> next(layer.in, 0.0);
        for (std::size_t o = 0; o < layer.out; ++o) {
            const double* row = layer.w.data() + o * layer.in;
            for (std::size_t i = 0; i < layer.in; ++i) {
                next[i] += row[i] * delta[o];
            }
        }
        delta = std::move(next);
    }
    return delta;
}

void Mlp::sgd_step(const SgdConfig& cfg) {
    if (!(cfg.learning_rate >= 0.0)) {
        throw std::invalid_argument("sgd_step: learning rate must be non-negative");
    }
    for (Layer& layer : layers_) {
        for (std::size_t i = 0; i < layer.w.size(); ++i) {
            layer.w[i] -= cfg.learning_rate * layer.grad_w[i];
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            layer.b[i] -= cfg.learning_rate * layer.grad_b[i];
        }
        std::fill(layer.grad_w.begin(), layer.grad_w.end(), 0.0);
        std::fill(layer.grad_b.begin(), layer.grad_b.end(), 0.0);
    }
    has_forward_cache_ = false;
}

void Mlp::zero_gradients() {
    for (Layer& layer : layers_) {
        std::fill(layer.grad_w.begin(), layer.grad_w.end(), 0.0);
        std::fill(layer.grad_b.begin(), layer.grad_b.end(), 0.0);
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t total = 0;
    for (const Layer& layer : layers_) {
        total += layer.w.size() + layer.b.size();
    }
    return total;
}

namespace {
// Locates flat index i within (weights, biases) of consecutive layers.
template <typename Layers>
auto locate(Layers& layers, std::size_t index) {
    for (auto& layer : layers) {
        if (index < layer.w.size()) {
            return std::pair{&layer, index};
        }
        index -= layer.w.size();
        if (index < layer.b.size()) {
            return std::pair{&layer, layer.w.size() + index};
        }
        index -= layer.b.size();
    }
    throw std::out_of_range("Mlp: parameter index out of range");
}
}  // namespace

double Mlp::parameter(std::size_t index) const {
    auto [layer, local] = locate(layers_, index);
    return local < layer->w.size() ? layer->w[local] : layer->b[local - layer->w.size()];
}

void Mlp::set_parameter(std::size_t index, double value) {
    auto [layer, local] = locate(layers_, index);
    if (local < layer->w.size()) {
        layer->w[local] = value;
    } else {
        layer->b[local - layer->w.size()] = value;
    }
}

double Mlp::gradient(std::size_t index) const {
    auto [layer, local] = locate(layers_, index);
    return local < layer->w.size() ? layer->grad_w[local]
                                   : layer->grad_b[local - layer->w.size()];
}

std::span<double> Mlp::weights(std::size_t layer) { return layers_.at(layer).w; }
std::span<double> Mlp::biases(std::size_t layer) { return layers_.at(layer).b; }
std::span<const double> Mlp::weights(std::size_t layer) const { return layers_.at(layer).w; }
std::span<const double> Mlp::biases(std::size_t layer) const { return layers_.at(layer).b; }
const std::vector<Activation>& Mlp::activations(std::size_t layer) const {
    return layers_.at(layer).acts;
}

std::string Mlp::to_json() const {
    nlohmann::json doc;
    doc["layers"] = nlohmann::json::array();
    for (const Layer& layer : layers_) {
        nlohmann::json entry;
        entry["in"] = layer.in;
        entry["out"] = layer.out;
        std::vector<std::string> acts;
        acts.reserve(layer.acts.size());
        for (Activation a : layer.acts) {
            acts.emplace_back(to_string(a));
        }
        entry["activations"] = acts;
        entry["weights"] = layer.w;
        entry["biases"] = layer.b;
        doc["layers"].push_back(std::move(entry));
    }
    return doc.dump();
}

Mlp Mlp::from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    std::vector<LayerSpec> spec;
    for (const auto& entry : doc.at("layers")) {
        LayerSpec s;
        s.in = entry.at("in").get<std::size_t>();
        s.out = entry.at("out").get<std::size_t>();
        for (const auto& name : entry.at("activations")) {
            s.activations.push_back(activation_from_string(name.get<std::string>()));
        }
        spec.push_back(std::move(s));
    }
    Mlp net(std::move(spec));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& entry = doc.at("layers").at(l);
        const auto w = entry.at("weights").get<std::vector<double>>();
        const auto b = entry.at("biases").get<std::vector<double>>();
        if (w.size() != net.weights(l).size() || b.size() != net.biases(l).size()) {
            throw std::invalid_argument("Mlp::from_json: parameter array size mismatch");
        }
        std::copy(w.begin(), w.end(), net.weights(l).begin());
        std::copy(b.begin(), b.end(), net.biases(l).begin());
    }
    return net;
}

double bce_loss(double prediction, double target) {
    if (target != 0.0 && target != 1.0) {
        throw std::invalid_argument("bce_loss: target must be 0 or 1");
    }
    const double p = std::clamp(prediction, kBceClamp, 1.0 - kBceClamp);
    return -(target * std::log(p) + (1.0 - target) * std::log1p(-p));
}

double bce_loss_gradient(double prediction, double target) {
    if (target != 0.0 && target != 1.0) {
        throw std::invalid_argument("bce_loss_gradient: target must be 0 or 1");
    }
    const double p = std::clamp(prediction, kBceClamp, 1.0 - kBceClamp);
    return -target / p + (1.0 - target) / (1.0 - p);
}

}  // namespace tailfit
