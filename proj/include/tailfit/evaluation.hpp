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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tailfit/estimators.hpp"
#include "tailfit/gan.hpp"
#include "tailfit/gpd.hpp"

namespace tailfit {

/// Theoretical quantile pairs of a fitted model against the ground truth
/// at probabilities (i - 0.5) / k, i = 1..k.
struct QqPoints {
    std::vector<double> probs;
    std::vector<double> true_q;
    std::vector<double> fitted_q;
};

QqPoints qq_points(const GpdParams& fitted, const GpdParams& truth, std::size_t k);

struct QqReport {
    QqPoints points;
    double slope;
    double intercept;
    double slope_error;  // 1 - slope; 0 means a perfect quantile match
};

/// Ordinary least squares of fitted_q on true_q (with intercept). The
/// pairs are sorted internally, so the result is independent of input
/// order. Throws EstimationError when the true quantiles are degenerate.
QqReport slope_error(const QqPoints& points);

/// Density curve on an evenly spaced grid over [0, y_max].
std::vector<std::pair<double, double>> pdf_curve(const GpdParams& params, double y_max,
                                                 std::size_t points);

struct TrialOptions {
    std::size_t qq_grid = 100;
    GanConfig gan;
    bool capture_loss = false;  // keep per-step GAN losses in the outcome
};

/// One estimator's result on one dataset. A failed method records the
/// error text and leaves fit/qq empty; other methods are unaffected.
struct MethodOutcome {
    Method method;
    std::optional<FitResult> fit;
    std::optional<QqReport> qq;
    std::optional<TrainReport> train;
    std::string error;

    bool failed() const { return !error.empty(); }
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::vector<MethodOutcome> outcomes;
};

/// Fits every requested method to the given exceedances and scores each
/// against the truth. The GAN trains on a stream derived from seed.
TrialResult run_trial_on_data(const ExceedanceSet& data, const GpdParams& truth,
                              const std::vector<Method>& methods, std::uint64_t seed,
                              const TrialOptions& opt);

/// Draws n samples from the truth with the seeded stream, then scores as
/// run_trial_on_data.
TrialResult run_trial(const GpdParams& truth, std::size_t n, const std::vector<Method>& methods,
                      std::uint64_t seed, const TrialOptions& opt);

struct SweepCell {
    std::size_t size;
    Method method;
    std::size_t trial;
    std::optional<FitResult> fit;
    std::optional<double> slope_error;
    std::string error;

    bool failed() const { return !error.empty(); }
};

struct SweepAggregate {
    std::size_t size;
    Method method;
    double mean_abs_slope_error;    // over successful trials only
    double stddev_abs_slope_error;  // sample standard deviation, 0 if < 2
    std::size_t failures;
    std::size_t trials;
};

struct LossHistory {
    std::size_t size;
    std::size_t trial;
    std::vector<StepLosses> losses;
};

struct SweepOptions {
    TrialOptions trial;
    std::size_t threads = 1;  // 0 picks the hardware concurrency
};

struct SweepResult {
    std::vector<SweepCell> cells;          // size-major, then trial, then method
    std::vector<SweepAggregate> aggregates;
    std::vector<LossHistory> losses;       // present when capture_loss is set
};

/// Mean |slope_error| per (size, method), preserving first-seen order.
std::vector<SweepAggregate> aggregate_cells(const std::vector<SweepCell>& cells);

/// Monte Carlo comparison across sample sizes. Each (size, trial) pair
/// gets the seed derive_seed(master_seed, size, trial), so cell results
/// do not depend on which other cells run, nor on the thread count.
SweepResult run_sweep(const GpdParams& truth, const std::vector<std::size_t>& sizes,
                      std::size_t trials, const std::vector<Method>& methods,
                      std::uint64_t master_seed, const SweepOptions& opt);

}  // namespace tailfit
