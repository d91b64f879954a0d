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

#include "tailfit/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "tailfit/rng.hpp"

namespace tailfit {

namespace {

// Tag mixed into a trial seed to give the GAN its own stream, separate
// from the stream that generated the data.
constexpr std::uint64_t kGanStreamTag = 0x47414eull;

}  // namespace

QqPoints qq_points(const GpdParams& fitted, const GpdParams& truth, std::size_t k) {
    if (k < 2) throw std::invalid_argument("qq_points: k must be at least 2");
    QqPoints pts;
    pts.probs.resize(k);
    pts.true_q.resize(k);
    pts.fitted_q.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
        pts.probs[i] = p;
        pts.true_q[i] = quantile(truth, p);
        pts.fitted_q[i] = quantile(fitted, p);
    }
    return pts;
}

QqReport slope_error(const QqPoints& points) {
    const std::size_t n = points.true_q.size();
    if (n < 2 || points.fitted_q.size() != n) {
        throw std::invalid_argument("slope_error: need at least two quantile pairs");
    }
    // Sort pairs by (x, y) so the regression is invariant under input
    // permutations despite floating-point summation order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points.true_q[a] != points.true_q[b]) return points.true_q[a] < points.true_q[b];
        return points.fitted_q[a] < points.fitted_q[b];
    });

    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i : order) {
        sx += points.true_q[i];
        sy += points.fitted_q[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i : order) {
        const double dx = points.true_q[i] - mx;
        sxx += dx * dx;
        sxy += dx * (points.fitted_q[i] - my);
    }
    if (sxx == 0.0) throw EstimationError("slope_error: degenerate true quantiles");
    const double slope = sxy / sxx;
    return {points, slope, my - slope * mx, 1.0 - slope};
}

std::vector<std::pair<double, double>> pdf_curve(const GpdParams& params, double y_max,
                                                 std::size_t points) {
    if (points < 2) throw std::invalid_argument("pdf_curve: need at least 2 points");
    if (!(y_max > 0.0)) throw std::invalid_argument("pdf_curve: y_max must be positive");
    std::vector<std::pair<double, double>> curve(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double y = y_max * static_cast<double>(j) / static_cast<double>(points - 1);
        curve[j] = {y, pdf(params, y)};
    }
    return curve;
}

TrialResult run_trial_on_data(const ExceedanceSet& data, const GpdParams& truth,
                              const std::vector<Method>& methods, std::uint64_t seed,
                              const TrialOptions& opt) {
    TrialResult result;
    result.seed = seed;
    result.outcomes.reserve(methods.size());
    for (const Method method : methods) {
        MethodOutcome outcome;
        outcome.method = method;
        try {
            switch (method) {
                case Method::mom:
                    outcome.fit = mom_fit(data);
                    break;
                case Method::mle:
                    outcome.fit = mle_fit(data);
                    break;
                case Method::gan: {
                    GanConfig cfg = opt.gan;
                    cfg.seed = derive_seed(seed, kGanStreamTag);
                    TrainReport report = train_gan(data, cfg);
                    outcome.fit = report.fit;
                    if (opt.capture_loss) outcome.train = std::move(report);
                    break;
                }
            }
            outcome.qq = slope_error(qq_points(outcome.fit->params, truth, opt.qq_grid));
        } catch (const std::exception& e) {
            outcome.error = e.what();
            outcome.qq.reset();
        }
        result.outcomes.push_back(std::move(outcome));
    }
    return result;
}

TrialResult run_trial(const GpdParams& truth, std::size_t n, const std::vector<Method>& methods,
                      std::uint64_t seed, const TrialOptions& opt) {
    RngStream rng(seed);
    const ExceedanceSet data = sample(truth, n, rng);
    return run_trial_on_data(data, truth, methods, seed, opt);
}

std::vector<SweepAggregate> aggregate_cells(const std::vector<SweepCell>& cells) {
    std::vector<SweepAggregate> aggregates;
    const auto find = [&](std::size_t size, Method method) -> SweepAggregate& {
        for (SweepAggregate& agg : aggregates) {
            if (agg.size == size && agg.method == method) return agg;
        }
        aggregates.push_back({size, method, 0.0, 0.0, 0, 0});
        return aggregates.back();
    };
    for (const SweepCell& cell : cells) {
        SweepAggregate& agg = find(cell.size, cell.method);
        ++agg.trials;
        if (cell.failed()) ++agg.failures;
    }
    for (SweepAggregate& agg : aggregates) {
        std::vector<double> abs_errors;
        for (const SweepCell& cell : cells) {
            if (cell.size == agg.size && cell.method == agg.method && !cell.failed()) {
                abs_errors.push_back(std::fabs(*cell.slope_error));
            }
        }
        if (abs_errors.empty()) continue;
        double sum = 0.0;
        for (double e : abs_errors) sum += e;
        const double mean = sum / static_cast<double>(abs_errors.size());
        agg.mean_abs_slope_error = mean;
        if (abs_errors.size() >= 2) {
            double ss = 0.0;
            for (double e : abs_errors) ss += (e - mean) * (e - mean);
            agg.stddev_abs_slope_error = std::sqrt(ss / static_cast<double>(abs_errors.size() - 1));
        }
    }
    return aggregates;
}

SweepResult run_sweep(const GpdParams& truth, const std::vector<std::size_t>& sizes,
                      std::size_t trials, const std::vector<Method>& methods,
                      std::uint64_t master_seed, const SweepOptions& opt) {
    if (sizes.empty() || methods.empty() || trials == 0) {
        throw std::invalid_argument("run_sweep: sizes, methods and trials must be nonempty");
    }
    struct Task {
        std::size_t size;
        std::size_t trial;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    tasks.reserve(sizes.size() * trials);
    for (const std::size_t size : sizes) {
        for (std::size_t t = 0; t < trials; ++t) {
            tasks.push_back({size, t, derive_seed(master_seed, size, t)});
        }
    }

    std::vector<TrialResult> slots(tasks.size());
    std::vector<std::string> fatal(tasks.size());
    const auto worker_body = [&](std::size_t i) {
        try {
            slots[i] = run_trial(truth, tasks[i].size, methods, tasks[i].seed, opt.trial);
        } catch (const std::exception& e) {
            fatal[i] = e.what();
        }
    };

    std::size_t threads = opt.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, tasks.size());
    if (threads <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) worker_body(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                    worker_body(i);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!fatal[i].empty()) throw EstimationError("run_sweep: trial failed: " + fatal[i]);
    }

    SweepResult result;
    result.cells.reserve(tasks.size() * methods.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (const MethodOutcome& outcome : slots[i].outcomes) {
            SweepCell cell;
            cell.size = tasks[i].size;
            cell.method = outcome.method;
            cell.trial = tasks[i].trial;
            cell.fit = outcome.fit;
            if (outcome.qq) cell.slope_error = outcome.qq->slope_error;
            cell.error = outcome.error;
            result.cells.push_back(std::move(cell));
            if (outcome.train && opt.trial.capture_loss) {
                result.losses.push_back({tasks[i].size, tasks[i].trial, outcome.train->losses});
            }
        }
    }
    result.aggregates = aggregate_cells(result.cells);
    return result;
}

}  // namespace tailfit
