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

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tailfit/gpd.hpp"

namespace tailfit {

enum class Method { mom, mle, gan };

const char* to_string(Method m);
Method method_from_string(std::string_view name);

/// Raised when an estimator's preconditions fail (too few samples,
/// degenerate data) or a fit cannot be completed.
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Estimated shapes are kept inside the open shape domain so the inverse
// activations used to seed the adversarial estimator stay finite.
inline constexpr double kShapeClamp = 0.99;

struct FitResult {
    GpdParams params;
    Method method;
    std::size_t n = 0;
    // Numeric diagnostics: log_likelihood, iterations, clamp/boundary flags.
    std::map<std::string, double> diagnostics;
};

/// Method-of-moments fit: with sample mean m and (unbiased) sample
/// variance v,
///   shape = (1 - m^2/v) / 2,   scale = m (1 + m^2/v) / 2,
/// which inverts the GPD mean/variance. The shape is clamped to
/// [-0.99, 0.99]; a clamp is flagged in the diagnostics.
FitResult mom_fit(const ExceedanceSet& data);

/// Maximum-likelihood fit via the one-dimensional profile over
/// theta = shape/scale: a coarse log-spaced grid inside the feasible
/// theta interval, then golden-section refinement. Small-sample fits that
/// end on the shape boundary are reported through a "boundary" diagnostic
/// rather than hidden.
FitResult mle_fit(const ExceedanceSet& data);

/// Profiled log-likelihood at a fixed theta = shape/scale. Given theta,
/// the likelihood is maximized analytically by
///   shape(theta) = mean(log(1 + theta y_i)),  scale = shape/theta,
/// giving  -n log(shape/theta) - n (shape + 1); theta = 0 is the
/// exponential case with scale = mean(y). Infeasible theta (some
/// 1 + theta y_i <= 0, or shape(theta) outside [-1, 1]) yields the
/// -infinity sentinel.
struct ProfilePoint {
    double loglik;
    GpdParams params;
};

ProfilePoint profile_loglik(double theta, const ExceedanceSet& data);

}  // namespace tailfit
