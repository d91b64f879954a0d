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

#include <cstdint>
#include <vector>

#include "tailfit/estimators.hpp"
#include "tailfit/mlp.hpp"

namespace tailfit {

struct GanConfig {
    std::size_t epochs = 200;
    std::size_t steps_per_epoch = 50;
    std::size_t noise_batch = 1000;
    double lr_generator = 0.01;
    double lr_discriminator = 0.01;
    std::size_t hidden_width = 10;
    std::size_t hidden_layers = 3;
    std::size_t feature_dim = 10;
    std::uint64_t seed = 42;
    std::size_t estimate_batches = 100;

    // Throws std::invalid_argument on a bad combination. epochs == 0 and
    // zero learning rates are valid: they freeze the estimator at its
    // moment-matched initialization.
    void validate() const;
};

struct StepLosses {
    double generator;
    double discriminator_fake;
    double discriminator_real;
};

/// Per-step loss history of a full training run plus the resulting fit.
struct TrainReport {
    std::vector<StepLosses> losses;  // epochs * steps_per_epoch entries
    FitResult fit;
};

/// Compresses a noise batch to a fixed-width, permutation-invariant input:
/// the empirical quantiles at probabilities (i - 0.5) / feature_dim,
/// i = 1..feature_dim, ascending, with linear interpolation between order
/// statistics.
std::vector<double> noise_features(const ExceedanceSet& noise, std::size_t feature_dim);

/// Adversarial parameter estimator. The generator maps a quantile summary
/// of a GPD noise batch to a (shape, scale) proposal (tanh head for the
/// shape, softplus head for the scale); the discriminator scores single
/// samples. Construction seeds the generator so its initial proposal
/// equals the method-of-moments fit of the data, and both networks train
/// by plain SGD on binary cross entropy.
class GanEstimator {
  public:
    GanEstimator(const ExceedanceSet& data, const GanConfig& cfg);

    /// One adversarial update: the discriminator sees one real sample and
    /// one reparameterized fake sample; the generator receives gradients
    /// through the frozen discriminator and the sampling partials. Both
    /// networks take one SGD step. Returns the pre-update losses.
    StepLosses train_step();

    /// Mean generator proposal over estimate_batches fresh noise batches;
    /// the shape is averaged before the final clamp to [-0.99, 0.99].
    GpdParams estimate();

    const FitResult& initial_fit() const { return mom_init_; }
    const GpdParams& noise_params() const { return noise_params_; }
    std::size_t steps_taken() const { return step_index_; }

    Mlp& generator() { return generator_; }
    Mlp& discriminator() { return discriminator_; }
    RngStream& rng() { return rng_; }

  private:
    std::pair<double, double> propose();  // one batch -> (shape, scale)

    GanConfig cfg_;
    std::vector<double> data_;
    FitResult mom_init_;
    GpdParams noise_params_;
    RngStream rng_;
    Mlp generator_;
    Mlp discriminator_;
    std::size_t step_index_ = 0;
};

/// Full training schedule: epochs * steps_per_epoch train_steps, then the
/// averaged estimate. Deterministic given cfg.seed.
TrainReport train_gan(const ExceedanceSet& data, const GanConfig& cfg);

}  // namespace tailfit
