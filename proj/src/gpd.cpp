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

#include "tailfit/gpd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tailfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_support(const GpdParams& p, double y) {
    if (!(y >= 0.0)) {
        throw std::domain_error("gpd: y must be non-negative, got " + std::to_string(y));
    }
    if (p.shape < -kShapeEpsilon && y > -p.scale / p.shape) {
        throw std::domain_error("gpd: y = " + std::to_string(y) +
                                " beyond support endpoint " + std::to_string(-p.scale / p.shape));
    }
}

// x*exp(x) - expm1(x), the kernel of d quantile / d shape. Direct
// evaluation cancels below |x| ~ 1e-8; the series x^2/2 + x^3/3 + x^4/8
// takes over there.
double xexpx_minus_expm1(double x) {
    if (std::abs(x) < 1e-8) {
        return x * x * (0.5 + x * (1.0 / 3.0 + x * 0.125));
    }
    return x * std::exp(x) - std::expm1(x);
}

}  // namespace

GpdParams::GpdParams(double shape_, double scale_) : shape(shape_), scale(scale_) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw std::invalid_argument("GpdParams: scale must be positive and finite, got " +
                                    std::to_string(scale_));
    }
    if (!(shape >= -1.0 && shape <= 1.0)) {
        throw std::invalid_argument("GpdParams: shape must lie in [-1, 1], got " +
                                    std::to_string(shape_));
    }
}

double support_upper_bound(const GpdParams& p) {
    if (p.shape < -kShapeEpsilon) {
        return -p.scale / p.shape;
    }
    return kInf;
}

double cdf(const GpdParams& p, double y) {
    check_support(p, y);
    if (std::abs(p.shape) < kShapeEpsilon) {
        return -std::expm1(-y / p.scale);
    }
    const double t = p.shape * y / p.scale;
    if (1.0 + t <= 0.0) {
        return 1.0;  // at (or within rounding of) the finite endpoint
    }
    return -std::expm1(-std::log1p(t) / p.shape);
}

double pdf(const GpdParams& p, double y) {
    check_support(p, y);
    if (std::abs(p.shape) < kShapeEpsilon) {
        return std::exp(-y / p.scale) / p.scale;
    }
    const double t = p.shape * y / p.scale;
    const double exponent = -1.0 / p.shape - 1.0;
    if (1.0 + t <= 0.0) {
        // Finite endpoint: density vanishes for shape > -1, is 1/scale at
        // shape == -1 (the uniform case).
        return exponent == 0.0 ? 1.0 / p.scale : 0.0;
    }
    return std::exp(exponent * std::log1p(t)) / p.scale;
}

double quantile(const GpdParams& p, double prob) {
    if (!(prob >= 0.0 && prob < 1.0)) {
        throw std::domain_error("gpd: quantile probability must lie in [0,1), got " +
                                std::to_string(prob));
    }
    const double log_tail = std::log1p(-prob);  // log(1 - prob) <= 0
    if (std::abs(p.shape) < kShapeEpsilon) {
        return -p.scale * log_tail;
    }
    return p.scale * std::expm1(-p.shape * log_tail) / p.shape;
}

ExceedanceSet sample(const GpdParams& p, std::size_t n, RngStream& rng) {
    ExceedanceSet out;
    out.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values.push_back(quantile(p, rng.uniform()));
    }
    return out;
}

ReparamSample reparam_sample(double shape, double scale, double u) {
    if (!(scale > 0.0)) {
        throw std::domain_error("reparam_sample: scale must be positive");
    }
    if (!(u >= 0.0 && u < 1.0)) {
        throw std::domain_error("reparam_sample: u must lie in [0,1)");
    }
    const double log_tail = std::log1p(-u);
    if (std::abs(shape) < kShapeEpsilon) {
        return {-scale * log_tail, scale * log_tail * log_tail * 0.5, -log_tail};
    }
    const double x = -shape * log_tail;
    const double e = std::expm1(x);
    const double value = scale * e / shape;
    const double d_shape = scale * xexpx_minus_expm1(x) / (shape * shape);
    return {value, d_shape, e / shape};
}

double log_likelihood(const GpdParams& p, const ExceedanceSet& data) {
    const double log_scale = std::log(p.scale);
    const bool exponential = std::abs(p.shape) < kShapeEpsilon;
    const double exponent = exponential ? 0.0 : -1.0 / p.shape - 1.0;
    double total = 0.0;
    for (double y : data.values) {
        if (!(y >= 0.0)) {
            return -kInf;
        }
        if (exponential) {
            total += -y / p.scale - log_scale;
            continue;
        }
        const double t = p.shape * y / p.scale;
        if (1.0 + t <= 0.0) {
            // Beyond the endpoint for shape < 0, or exactly on it where the
            // density vanishes (unless shape == -1, where it is 1/scale).
            if (1.0 + t < 0.0 || exponent != 0.0) {
                return -kInf;
            }
            total += -log_scale;
            continue;
        }
        total += exponent * std::log1p(t) - log_scale;
    }
    return total;
}

ExceedanceSet extract_exceedances(const std::vector<double>& samples, double threshold) {
    ExceedanceSet out;
    out.threshold = threshold;
    for (double x : samples) {
        if (x < threshold) {
            out.values.push_back(threshold - x);
        }
    }
    return out;
}

}  // namespace tailfit
