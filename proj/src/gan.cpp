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

#include "tailfit/gan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tailfit/gpd.hpp"

namespace tailfit {

namespace {

constexpr double kInitRange = 0.05;
constexpr double kScaleFloor = 1e-12;
// The shape bias preimage is taken at a clamped target so atanh stays in a
// well-conditioned range.
constexpr double kShapeInitClamp = 0.95;

const GanConfig& validated(const GanConfig& cfg) {
    cfg.validate();
    return cfg;
}

auto generator_spec(const GanConfig& cfg) -> std::vector<LayerSpec> {
    std::vector<LayerSpec> spec;
    spec.push_back({cfg.feature_dim, cfg.hidden_width, {Activation::tanh}});
    for (std::size_t l = 1; l < cfg.hidden_layers; ++l) {
        spec.push_back({cfg.hidden_width, cfg.hidden_width, {Activation::tanh}});
    }
    spec.push_back({cfg.hidden_width, 2, {Activation::tanh, Activation::softplus}});
    return spec;
}

auto discriminator_spec(const GanConfig& cfg) -> std::vector<LayerSpec> {
    std::vector<LayerSpec> spec;
    spec.push_back({1, cfg.hidden_width, {Activation::tanh}});
    for (std::size_t l = 1; l < cfg.hidden_layers; ++l) {
        spec.push_back({cfg.hidden_width, cfg.hidden_width, {Activation::tanh}});
    }
    spec.push_back({cfg.hidden_width, 1, {Activation::sigmoid}});
    return spec;
}

void fill_uniform(Mlp& net, std::size_t layer, RngStream& rng, double range) {
    for (double& w : net.weights(layer)) w = rng.uniform(-range, range);
    for (double& b : net.biases(layer)) b = rng.uniform(-range, range);
}

// Walks the bias by ulps until the activation reproduces target exactly in
// double precision; both head activations are strictly increasing, so a
// short directed search suffices. Falls back to the analytic preimage if
// no exact one exists.
template <typename F>
double snap_preimage(double target, double guess, F&& f) {
    double value = f(guess);
    if (value == target) return guess;
    const double toward = value < target ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
    double bias = guess;
    for (int i = 0; i < 256; ++i) {
        bias = std::nextafter(bias, toward);
        value = f(bias);
        if (value == target) return bias;
        if (toward > 0.0 ? value > target : value < target) break;
    }
    return guess;
}

double inverse_softplus(double y) {
    // softplus(y) == y to double precision once exp(-y) is below one ulp.
    return y > 30.0 ? y : std::log(std::expm1(y));
}

}  // namespace

void GanConfig::validate() const {
    if (steps_per_epoch == 0 || noise_batch == 0 || hidden_width == 0 ||
        hidden_layers == 0 || feature_dim == 0 || estimate_batches == 0) {
        throw std::invalid_argument("gan config: counts other than epochs must be positive");
    }
    if (noise_batch < feature_dim) {
        throw std::invalid_argument("gan config: noise_batch must be >= feature_dim");
    }
    if (!(lr_generator >= 0.0) || !(lr_discriminator >= 0.0)) {
        throw std::invalid_argument("gan config: learning rates must be >= 0");
    }
}

std::vector<double> noise_features(const ExceedanceSet& noise, std::size_t feature_dim) {
    const std::size_t n = noise.n();
    if (feature_dim == 0) throw std::invalid_argument("noise_features: feature_dim must be positive");
    if (n < feature_dim) {
        throw std::invalid_argument("noise_features: batch smaller than feature_dim");
    }
    std::vector<double> sorted = noise.values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> features(feature_dim);
    for (std::size_t i = 0; i < feature_dim; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(feature_dim);
        double h = static_cast<double>(n) * p - 0.5;
        h = std::clamp(h, 0.0, static_cast<double>(n - 1));
        const auto lo = static_cast<std::size_t>(h);
        const std::size_t hi = std::min(lo + 1, n - 1);
        const double frac = h - static_cast<double>(lo);
        features[i] = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    }
    return features;
}

GanEstimator::GanEstimator(const ExceedanceSet& data, const GanConfig& cfg)
    : cfg_(validated(cfg)),
      data_(data.values),
      mom_init_(mom_fit(data)),
      noise_params_(mom_init_.params),
      rng_(cfg.seed),
      generator_(generator_spec(cfg)),
      discriminator_(discriminator_spec(cfg)) {
    // Hidden layers of both networks start at small uniform weights; the
    // conservative scale keeps early training stable and the estimator
    // anchored near its moment-matched start. Draw order is fixed
    // (generator first, weights before biases per layer) so runs are
    // reproducible across platforms.
    const std::size_t g_last = generator_.layer_count() - 1;
    for (std::size_t l = 0; l < g_last; ++l) fill_uniform(generator_, l, rng_, kInitRange);
    for (std::size_t l = 0; l < discriminator_.layer_count(); ++l) {
        fill_uniform(discriminator_, l, rng_, kInitRange);
    }

    // Output layer: zero weights and bit-exact bias preimages make the
    // untrained generator emit the moment fit regardless of the noise.
    for (double& w : generator_.weights(g_last)) w = 0.0;
    auto biases = generator_.biases(g_last);
    const double shape_target =
        std::clamp(mom_init_.params.shape, -kShapeInitClamp, kShapeInitClamp);
    biases[0] = snap_preimage(shape_target, std::atanh(shape_target),
                              [](double z) { return apply_activation(Activation::tanh, z); });
    biases[1] = snap_preimage(mom_init_.params.scale, inverse_softplus(mom_init_.params.scale),
                              [](double z) { return apply_activation(Activation::softplus, z); });
}

std::pair<double, double> GanEstimator::propose() {
    const ExceedanceSet noise = sample(noise_params_, cfg_.noise_batch, rng_);
    const std::vector<double> features = noise_features(noise, cfg_.feature_dim);
    const std::vector<double> out = generator_.forward(features);
    return {out[0], std::max(out[1], kScaleFloor)};
}

StepLosses GanEstimator::train_step() {
    const auto [shape_prop, scale_prop] = propose();

    // One reparameterized fake draw keeps the sampling differentiable in
    // the proposal, and one real draw balances the discriminator batch.
    const ReparamSample fake = reparam_sample(shape_prop, scale_prop, rng_.uniform());
    const double real = data_[rng_.uniform_index(data_.size())];

    const double p_real = discriminator_.forward({&real, 1})[0];
    const double loss_real = bce_loss(p_real, 1.0);
    const double real_grad[] = {bce_loss_gradient(p_real, 1.0)};
    discriminator_.backward(real_grad);

    const double p_fake = discriminator_.forward({&fake.value, 1})[0];
    const double loss_fake = bce_loss(p_fake, 0.0);
    const double fake_grad[] = {bce_loss_gradient(p_fake, 0.0)};
    discriminator_.backward(fake_grad);

    // Generator update against the pre-step discriminator: chain the
    // non-saturating loss through the fake sample's partials. The backward
    // pass reuses the discriminator's fake-input cache without touching
    // its accumulated gradients.
    const double loss_gen = bce_loss(p_fake, 1.0);
    const double gen_grad[] = {bce_loss_gradient(p_fake, 1.0)};
    const std::vector<double> d_input = discriminator_.backward(gen_grad, false);
    std::vector<double> head_grad(2);
    head_grad[0] = d_input[0] * fake.d_shape;
    head_grad[1] = d_input[0] * fake.d_scale;
    if (scale_prop <= kScaleFloor) head_grad[1] = 0.0;  // clamped head is flat
    generator_.backward(head_grad);

    if (!std::isfinite(loss_gen) || !std::isfinite(loss_fake) || !std::isfinite(loss_real)) {
        throw EstimationError("gan: non-finite loss at step " + std::to_string(step_index_));
    }

    discriminator_.sgd_step({cfg_.lr_discriminator});
    generator_.sgd_step({cfg_.lr_generator});
    ++step_index_;
    return {loss_gen, loss_fake, loss_real};
}

GpdParams GanEstimator::estimate() {
    std::vector<double> shapes(cfg_.estimate_batches);
    std::vector<double> scales(cfg_.estimate_batches);
    for (std::size_t b = 0; b < cfg_.estimate_batches; ++b) {
        const auto [shape_prop, scale_prop] = propose();
        shapes[b] = shape_prop;
        scales[b] = scale_prop;
    }
    // Mean of identical proposals must reproduce them bit for bit (the
    // untrained generator is constant), so short-circuit that case.
    const auto mean_exact = [](const std::vector<double>& v) {
        const bool all_equal = std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
        if (all_equal) return v.front();
        double sum = 0.0;
        for (double x : v) sum += x;
        return sum / static_cast<double>(v.size());
    };
    const double shape = std::clamp(mean_exact(shapes), -kShapeClamp, kShapeClamp);
    const double scale = std::max(mean_exact(scales), kScaleFloor);
    return {shape, scale};
}

TrainReport train_gan(const ExceedanceSet& data, const GanConfig& cfg) {
    GanEstimator est(data, cfg);
    std::vector<StepLosses> losses;
    losses.reserve(cfg.epochs * cfg.steps_per_epoch);
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        for (std::size_t s = 0; s < cfg.steps_per_epoch; ++s) losses.push_back(est.train_step());
    }
    const GpdParams params = est.estimate();
    FitResult fit{params, Method::gan, data.n(), {}};
    fit.diagnostics["steps"] = static_cast<double>(est.steps_taken());
    fit.diagnostics["estimate_batches"] = static_cast<double>(cfg.estimate_batches);
    fit.diagnostics["initial_shape"] = est.initial_fit().params.shape;
    fit.diagnostics["initial_scale"] = est.initial_fit().params.scale;
    if (!losses.empty()) {
        double tail = 0.0;
        const std::size_t span = std::min<std::size_t>(losses.size(), cfg.steps_per_epoch);
        for (std::size_t i = losses.size() - span; i < losses.size(); ++i) {
            tail += losses[i].generator;
        }
        fit.diagnostics["final_generator_loss"] = tail / static_cast<double>(span);
    }
    return {std::move(losses), std::move(fit)};
}

}  // namespace tailfit
