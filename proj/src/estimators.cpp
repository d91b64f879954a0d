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

#include "tailfit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace tailfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascending copy; makes every estimate independent of the input order.
std::vector<double> sorted_values(const ExceedanceSet& data) {
    std::vector<double> v = data.values;
    std::sort(v.begin(), v.end());
    return v;
}

void check_nonnegative(const std::vector<double>& sorted) {
    if (!sorted.empty() && sorted.front() < 0.0) {
        throw EstimationError("exceedances must be non-negative");
    }
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

// mean(log(1 + theta y)); nullopt when some 1 + theta y <= 0.
std::optional<double> mean_log1p(double theta, const std::vector<double>& sorted) {
    double s = 0.0;
    for (double y : sorted) {
        const double t = theta * y;
        if (1.0 + t <= 0.0) {
            return std::nullopt;
        }
        s += std::log1p(t);
    }
    return s / static_cast<double>(sorted.size());
}

ProfilePoint profile_at(double theta, const std::vector<double>& sorted, double mean) {
    const double n = static_cast<double>(sorted.size());
    const GpdParams fallback(0.0, mean > 0.0 ? mean : 1.0);
    if (theta == 0.0) {
        if (!(mean > 0.0)) {
            return {-kInf, fallback};
        }
        return {-n * std::log(mean) - n, GpdParams(0.0, mean)};
    }
    const std::optional<double> shape = mean_log1p(theta, sorted);
    if (!shape || !(std::abs(*shape) <= 1.0) || !(*shape / theta > 0.0)) {
        return {-kInf, fallback};
    }
    const double scale = *shape / theta;
    return {-n * std::log(scale) - n * (*shape + 1.0), GpdParams(*shape, scale)};
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::mom: return "mom";
        case Method::mle: return "mle";
        case Method::gan: return "gan";
    }
    throw std::logic_error("unknown method tag");
}

Method method_from_string(std::string_view name) {
    if (name == "mom") return Method::mom;
    if (name == "mle") return Method::mle;
    if (name == "gan") return Method::gan;
    throw std::invalid_argument("unknown method name: " + std::string(name));
}

FitResult mom_fit(const ExceedanceSet& data) {
    if (data.n() < 2) {
        throw EstimationError("mom_fit: need at least 2 samples, got " +
                              std::to_string(data.n()));
    }
    const std::vector<double> sorted = sorted_values(data);
    check_nonnegative(sorted);
    const double mean = mean_of(sorted);
    const double var = sample_variance(sorted, mean);
    if (!(mean > 0.0)) {
        throw EstimationError("mom_fit: sample mean must be positive");
    }
    if (!(var > 0.0)) {
        throw EstimationError("mom_fit: sample variance is zero (degenerate data)");
    }
    const double ratio = mean * mean / var;
    double shape = 0.5 * (1.0 - ratio);
    const double scale = 0.5 * mean * (1.0 + ratio);

    FitResult result{GpdParams(0.0, 1.0), Method::mom, data.n(), {}};
    double clamped = 0.0;
    if (shape > kShapeClamp) {
        shape = kShapeClamp;
        clamped = 1.0;
    } else if (shape < -kShapeClamp) {
        shape = -kShapeClamp;
        clamped = 1.0;
    }
    result.params = GpdParams(shape, scale);
    result.diagnostics["clamped"] = clamped;
    result.diagnostics["mean"] = mean;
    result.diagnostics["variance"] = var;
    return result;
}

ProfilePoint profile_loglik(double theta, const ExceedanceSet& data) {
    if (data.n() == 0) {
        throw EstimationError("profile_loglik: empty data");
    }
    const std::vector<double> sorted = sorted_values(data);
    check_nonnegative(sorted);
    return profile_at(theta, sorted, mean_of(sorted));
}

FitResult mle_fit(const ExceedanceSet& data) {
    if (data.n() < 2) {
        throw EstimationError("mle_fit: need at least 2 samples, got " +
                              std::to_string(data.n()));
    }
    const std::vector<double> sorted = sorted_values(data);
    check_nonnegative(sorted);
    const double y_max = sorted.back();
    if (!(sorted.front() < y_max)) {
        throw EstimationError("mle_fit: all values identical (degenerate data)");
    }
    const double mean = mean_of(sorted);
    const auto shape_at = [&](double theta) { return mean_log1p(theta, sorted); };

    std::size_t evaluations = 0;
    const auto profile = [&](double theta) {
        ++evaluations;
        return profile_at(theta, sorted, mean);
    };

    // Feasible theta interval. The left edge sits just inside -1/max(y);
    // each end is pulled in further until the profiled shape fits in
    // [-kShapeClamp, kShapeClamp].
    const double feasible_left = -(1.0 - 1e-10) / y_max;
    double theta_lo = feasible_left;
    if (const auto s = shape_at(theta_lo); !s || *s < -kShapeClamp) {
        double lo = theta_lo;  // shape below -clamp (or infeasible)
        double hi = 0.0;       // shape 0
        for (int i = 0; i < 200 && (hi - lo) > 1e-15 * std::abs(feasible_left); ++i) {
            const double mid = 0.5 * (lo + hi);
            const auto sm = shape_at(mid);
            if (!sm || *sm < -kShapeClamp) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        theta_lo = hi;
    }
    // shape(theta) grows without bound, so doubling always brackets +clamp.
    double theta_hi = 1.0 / mean;
    {
        double lo = 0.0;
        int i = 0;
        while (i++ < 2000) {
            const auto s = shape_at(theta_hi);
            if (s && *s > kShapeClamp) {
                break;
            }
            lo = theta_hi;
            theta_hi *= 2.0;
        }
        double hi = theta_hi;
        for (int j = 0; j < 200 && (hi - lo) > 1e-15 * hi; ++j) {
            const double mid = 0.5 * (lo + hi);
            const auto sm = shape_at(mid);
            if (sm && *sm > kShapeClamp) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        theta_hi = lo;
    }

    // Coarse candidates: theta = 0 plus 200 log-spaced magnitudes per side.
    constexpr std::size_t kGridPerSide = 200;
    std::vector<double> candidates;
    candidates.reserve(2 * kGridPerSide + 1);
    const auto push_side = [&](double bound) {
        const double max_mag = std::abs(bound);
        if (!(max_mag > 0.0)) {
            return;
        }
        const double min_mag = max_mag * 1e-10;
        const double step = std::log(max_mag / min_mag) / (kGridPerSide - 1);
        const double sign = bound < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < kGridPerSide; ++i) {
            candidates.push_back(sign * min_mag * std::exp(step * static_cast<double>(i)));
        }
    };
    push_side(theta_lo);
    candidates.push_back(0.0);
    push_side(theta_hi);
    std::sort(candidates.begin(), candidates.end());

    double best_theta = 0.0;
    double best_loglik = -kInf;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const ProfilePoint pt = profile(candidates[i]);
        if (pt.loglik > best_loglik) {
            best_loglik = pt.loglik;
            best_theta = candidates[i];
            best_index = i;
        }
    }
    if (!std::isfinite(best_loglik)) {
        throw EstimationError("mle_fit: profile likelihood not finite anywhere on the grid (" +
                              std::to_string(evaluations) + " evaluations)");
    }

    // Golden-section refinement between the neighbours of the best grid point.
    double lo = best_index > 0 ? candidates[best_index - 1] : best_theta;
    double hi = best_index + 1 < candidates.size() ? candidates[best_index + 1] : best_theta;
    constexpr double kGolden = 0.6180339887498949;
    double a = lo;
    double b = hi;
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = profile(x1).loglik;
    double f2 = profile(x2).loglik;
    std::size_t iterations = 0;
    while (b - a > 1e-10 && iterations < 300) {
        ++iterations;
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kGolden * (b - a);
            f2 = profile(x2).loglik;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kGolden * (b - a);
            f1 = profile(x1).loglik;
        }
    }
    for (double theta : {0.5 * (a + b), best_theta}) {
        const ProfilePoint pt = profile(theta);
        if (pt.loglik > best_loglik) {
            best_loglik = pt.loglik;
            best_theta = theta;
        }
    }

    ProfilePoint best = profile(best_theta);
    if (!std::isfinite(best.loglik)) {
        throw EstimationError("mle_fit: refinement left no finite optimum after " +
                              std::to_string(evaluations) + " evaluations");
    }

    FitResult result{best.params, Method::mle, data.n(), {}};
    double clamped = 0.0;
    if (best.params.shape > kShapeClamp) {
        result.params = GpdParams(kShapeClamp, best.params.scale);
        clamped = 1.0;
    } else if (best.params.shape < -kShapeClamp) {
        result.params = GpdParams(-kShapeClamp, best.params.scale);
        clamped = 1.0;
    }
    const bool on_shape_boundary = std::abs(result.params.shape) >= kShapeClamp - 1e-6;
    const bool on_feasibility_edge =
        best_theta < 0.0 && (best_theta - feasible_left) <= 1e-6 * std::abs(feasible_left);
    result.diagnostics["log_likelihood"] = best.loglik;
    result.diagnostics["iterations"] = static_cast<double>(evaluations);
    result.diagnostics["boundary"] = (on_shape_boundary || on_feasibility_edge) ? 1.0 : 0.0;
    result.diagnostics["clamped"] = clamped;
    result.diagnostics["theta"] = best_theta;
    return result;
}

}  // namespace tailfit
