#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tailcast/common.hpp"

namespace tailcast {

// Generalized Pareto distribution parameters. Location is fixed at zero;
// the distribution models nonnegative loss values directly.
struct GpdParams {
    double xi = 0.0;   // shape; xi > 0 is heavy-tailed, xi < 0 has bounded support
    double eta = 1.0;  // scale, must be > 0

    // Upper end of the support: -eta/xi for xi < 0, +inf otherwise.
    double support_max() const;
    void validate() const;  // throws InvalidParams
};

// Threshold below which the shape is treated as zero and the exponential
// limit of the pdf / quantile function is used.
inline constexpr double kGpdXiZeroEps = 1e-8;

// Unnormalized pdf (1 + xi*a/eta)^(-(1/xi + 1)), equal to exp(-a/eta) in the
// xi -> 0 limit. Always 1 at a = 0 and bounded by (0, 1] on the support.
// Throws OutOfSupport for a < 0 or, when xi < 0, a beyond -eta/xi.
double gpd_pdf(double a, const GpdParams& params);

// Like gpd_pdf but extends the density by zero beyond the upper support
// bound (xi < 0). Used by loss modifiers, where a fitted bounded-tail
// distribution may be evaluated at an out-of-range auxiliary loss.
double gpd_pdf_saturated(double a, const GpdParams& params);

// Derivative of gpd_pdf_saturated with respect to a (zero beyond support).
double gpd_pdf_derivative_saturated(double a, const GpdParams& params);

// Inverse CDF at probability u in [0, 1): eta*((1-u)^(-xi) - 1)/xi, with the
// -eta*log(1-u) limit at xi = 0.
double gpd_quantile(double u, const GpdParams& params);

// Method-of-moments fit result. `clamped` is set when the raw shape estimate
// hit the validity guard (xi >= 0.5, where the MOM moments stop existing)
// and was pulled back to 0.45.
struct GpdFit {
    GpdParams params;
    bool clamped = false;
};

// Hosking-Wallis method-of-moments estimate with location 0:
//   xi  = (1 - mean^2/var) / 2      (var is the unbiased sample variance)
//   eta = mean * (1 - xi)
// Throws DegenerateSample for fewer than 2 samples or zero variance.
GpdFit fit_gpd_mom(std::span<const double> samples);

// Inverse-CDF sampling, deterministic per seed.
std::vector<double> gpd_sample(const GpdParams& params, std::size_t n, std::uint64_t seed);

}  // namespace tailcast
