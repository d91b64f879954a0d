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
#include <optional>
#include <vector>

#include "tailfit/rng.hpp"

namespace tailfit {

// Below this magnitude the shape is treated as zero and the exponential
// limit of the GPD is used; the general closed forms lose precision through
// (1 + shape*y/scale)^(-1/shape) as shape -> 0.
inline constexpr double kShapeEpsilon = 1e-9;

/// Shape and modified scale of the generalized Pareto tail model.
///
/// F(y) = 1 - (1 + shape*y/scale)^(-1/shape) on y >= 0, degenerating to
/// 1 - exp(-y/scale) at shape == 0. Positive shape gives a heavy tail,
/// negative shape the bounded support [0, -scale/shape]. The shape is
/// restricted to [-1, 1], matching the range every estimator in this
/// library works over.
struct GpdParams {
    double shape;
    double scale;

    GpdParams(double shape_, double scale_);
};

/// Non-negative threshold exceedances y = u - x of a lower tail, in the
/// order the source samples produced them.
struct ExceedanceSet {
    std::vector<double> values;
    std::optional<double> threshold;

    std::size_t n() const { return values.size(); }
};

/// Upper end of the support: -scale/shape for negative shape, +infinity
/// otherwise.
double support_upper_bound(const GpdParams& p);

/// Distribution function at y >= 0. Throws std::domain_error when y lies
/// outside the support.
double cdf(const GpdParams& p, double y);

/// Density at y >= 0: (1/scale) * (1 + shape*y/scale)^(-1/shape - 1).
double pdf(const GpdParams& p, double y);

/// Inverse distribution function for prob in [0, 1):
/// (scale/shape) * ((1 - prob)^(-shape) - 1).
double quantile(const GpdParams& p, double prob);

/// n i.i.d. draws by inverse transform of uniforms from rng. The seed of
/// rng fully determines the output sequence.
ExceedanceSet sample(const GpdParams& p, std::size_t n, RngStream& rng);

/// One inverse-transform draw at a fixed uniform u, with the analytic
/// partial derivatives of the draw with respect to shape and scale. Lets
/// gradients flow from a sample back into the parameters that produced it.
struct ReparamSample {
    double value;
    double d_shape;
    double d_scale;
};

ReparamSample reparam_sample(double shape, double scale, double u);

/// Sum of log densities. Any value outside the support yields the
/// -infinity sentinel rather than an error, so search routines can treat
/// such parameters as infeasible.
double log_likelihood(const GpdParams& p, const ExceedanceSet& data);

/// Lower-tail exceedances y = threshold - x for every x < threshold,
/// input order preserved. An empty result is valid.
ExceedanceSet extract_exceedances(const std::vector<double>& samples, double threshold);

}  // namespace tailfit
