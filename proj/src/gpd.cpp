#include "tailcast/gpd.hpp"

#include <cmath>
#include <limits>

namespace tailcast {

double GpdParams::support_max() const {
    if (xi < 0.0) return -eta / xi;
    return std::numeric_limits<double>::infinity();
}

void GpdParams::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta) || !std::isfinite(xi)) {
        throw InvalidParams("GpdParams: eta must be positive and finite, got eta=" +
                            format_full(eta) + " xi=" + format_full(xi));
    }
}

double gpd_pdf(double a, const GpdParams& params) {
    params.validate();
    if (!(a >= 0.0)) {
        throw OutOfSupport("gpd_pdf: a must be nonnegative, got " + format_full(a));
    }
    if (std::abs(params.xi) < kGpdXiZeroEps) {
        return std::exp(-a / params.eta);
    }
    const double base = 1.0 + params.xi * a / params.eta;
    if (base < 0.0) {
        throw OutOfSupport("gpd_pdf: a=" + format_full(a) + " beyond support end " +
                           format_full(params.support_max()));
    }
    const double c = -(1.0 / params.xi + 1.0);
    // base == 0 can only happen at the upper support end with xi < 0, where
    // c > 0 for xi > -1 (density hits zero) and the pdf diverges for xi <= -1.
    if (base == 0.0 && c < 0.0) {
        throw OutOfSupport("gpd_pdf: density diverges at the support end for xi <= -1");
    }
    return std::pow(base, c);
}

double gpd_pdf_saturated(double a, const GpdParams& params) {
    params.validate();
    if (!(a >= 0.0)) {
        throw OutOfSupport("gpd_pdf_saturated: a must be nonnegative, got " + format_full(a));
    }
    if (params.xi < 0.0 && a >= params.support_max()) return 0.0;
    return gpd_pdf(a, params);
}

double gpd_pdf_derivative_saturated(double a, const GpdParams& params) {
    params.validate();
    if (!(a >= 0.0)) {
        throw OutOfSupport("gpd_pdf_derivative_saturated: a must be nonnegative");
    }
    if (std::abs(params.xi) < kGpdXiZeroEps) {
        return -std::exp(-a / params.eta) / params.eta;
    }
    if (params.xi < 0.0 && a >= params.support_max()) return 0.0;
    const double base = 1.0 + params.xi * a / params.eta;
    const double c = -(1.0 / params.xi + 1.0);
    return c * (params.xi / params.eta) * std::pow(base, c - 1.0);
}

double gpd_quantile(double u, const GpdParams& params) {
    params.validate();
    if (!(u >= 0.0) || u >= 1.0) {
        throw InvalidParams("gpd_quantile: u must be in [0, 1), got " + format_full(u));
    }
    if (std::abs(params.xi) < kGpdXiZeroEps) {
        return -params.eta * std::log1p(-u);
    }
    return params.eta * (std::pow(1.0 - u, -params.xi) - 1.0) / params.xi;
}

GpdFit fit_gpd_mom(std::span<const double> samples) {
    if (samples.size() < 2) {
        throw DegenerateSample("fit_gpd_mom: need at least 2 samples, got " +
                               std::to_string(samples.size()));
    }
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double x : samples) var += (x - mean) * (x - mean);
    var /= static_cast<double>(samples.size() - 1);
    if (!(var > 0.0)) {
        throw DegenerateSample("fit_gpd_mom: sample variance is zero");
    }

    GpdFit fit;
    double xi = 0.5 * (1.0 - mean * mean / var);
    // Validity guards. mean^2/var >= 0 keeps xi <= 0.5; the upper guard
    // catches the degenerate boundary (and rounding past it). The lower
    // guard pins light-tailed fits at xi = -0.5: below that the pdf's
    // derivative diverges at the support end (and below -1 the pdf itself
    // leaves (0, 1]), which breaks the margins and weights built from it.
    // Both clamps keep training uninterrupted instead of erroring.
    if (xi >= 0.5 - 1e-12) {
        xi = 0.45;
        fit.clamped = true;
    } else if (xi < -0.5) {
        xi = -0.5;
        fit.clamped = true;
    }
    fit.params.xi = xi;
    fit.params.eta = mean * (1.0 - xi);
    fit.params.validate();
    return fit;
}

std::vector<double> gpd_sample(const GpdParams& params, std::size_t n, std::uint64_t seed) {
    params.validate();
    if (n < 1) throw InvalidParams("gpd_sample: n must be >= 1");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = gpd_quantile(rng.next_double(), params);
    return out;
}

}  // namespace tailcast
