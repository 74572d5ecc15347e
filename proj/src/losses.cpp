#include "tailcast/losses.hpp"

#include <algorithm>
#include <cmath>

namespace tailcast {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*ln(2*pi)
}

void LossBatch::validate() const {
    if (base.size() != aux.size()) {
        throw LengthMismatch("LossBatch: base has " + std::to_string(base.size()) +
                             " entries, aux has " + std::to_string(aux.size()));
    }
    if (base.empty()) throw InvalidParams("LossBatch: empty batch");
    for (double a : aux) {
        if (!(a >= 0.0)) throw InvalidParams("LossBatch: aux losses must be nonnegative");
    }
}

std::string modifier_kind_name(ModifierKind kind) {
    switch (kind) {
        case ModifierKind::None: return "none";
        case ModifierKind::Plm: return "plm";
        case ModifierKind::Plw: return "plw";
        case ModifierKind::Kurtosis: return "kurtosis";
        case ModifierKind::Focal: return "focal";
        case ModifierKind::Shrinkage: return "shrinkage";
        case ModifierKind::Lds: return "lds";
    }
    throw InvalidParams("unknown modifier kind");
}

ModifierKind modifier_kind_from_name(const std::string& name) {
    if (name == "none") return ModifierKind::None;
    if (name == "plm") return ModifierKind::Plm;
    if (name == "plw") return ModifierKind::Plw;
    if (name == "kurtosis") return ModifierKind::Kurtosis;
    if (name == "focal") return ModifierKind::Focal;
    if (name == "shrinkage") return ModifierKind::Shrinkage;
    if (name == "lds") return ModifierKind::Lds;
    throw InvalidParams("unknown modifier kind: " + name);
}

double default_lambda(ModifierKind kind) {
    switch (kind) {
        case ModifierKind::Plm: return 1.0;
        case ModifierKind::Plw: return 0.5;
        case ModifierKind::Kurtosis: return 0.01;
        case ModifierKind::Focal:
        case ModifierKind::Shrinkage:
        case ModifierKind::Lds: return 1.0;
        case ModifierKind::None: return 0.0;
    }
    return 0.0;
}

void ModifierConfig::validate() const {
    if (!(lambda >= 0.0)) throw InvalidParams("modifier lambda must be nonnegative");
    if (kind == ModifierKind::Plw && lambda > 1.0) {
        throw InvalidParams("plw lambda must be in [0, 1], got " + format_full(lambda));
    }
    if (kind == ModifierKind::Shrinkage && !(shrinkage_a > 0.0)) {
        throw InvalidParams("shrinkage a must be positive");
    }
    if (kind == ModifierKind::Lds) {
        if (lds_bins < 2) throw InvalidParams("lds bin count must be >= 2");
        if (!(lds_kernel_width > 0.0)) throw InvalidParams("lds kernel width must be positive");
        if (!(lds_min_prob > 0.0)) throw InvalidParams("lds min probability must be positive");
    }
}

double gaussian_nll(double mean, double std, double target) {
    if (!(std > 0.0)) {
        throw InvalidParams("gaussian_nll: std must be positive, got " + format_full(std));
    }
    const double d = target - mean;
    return kHalfLog2Pi + std::log(std) + d * d / (2.0 * std * std);
}

double mae_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty()) {
        throw LengthMismatch("mae_loss: pred has " + std::to_string(pred.size()) +
                             " entries, target has " + std::to_string(target.size()));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < pred.size(); ++j) s += std::abs(pred[j] - target[j]);
    return s / static_cast<double>(pred.size());
}

double plm_margin(double aux, const GpdParams& params) {
    return 1.0 - gpd_pdf(aux, params);
}

std::vector<double> apply_plm(const LossBatch& batch, double lambda, const GpdParams& params) {
    batch.validate();
    if (lambda == 0.0) return batch.base;
    std::vector<double> out(batch.base.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = batch.base[i] + lambda * (1.0 - gpd_pdf_saturated(batch.aux[i], params));
    }
    return out;
}

double plw_weight(double aux, double lambda, const GpdParams& params) {
    if (!(lambda >= 0.0) || lambda > 1.0) {
        throw InvalidParams("plw_weight: lambda must be in [0, 1], got " + format_full(lambda));
    }
    return 1.0 - lambda * gpd_pdf(aux, params);
}

std::vector<double> apply_plw(const LossBatch& batch, double lambda, const GpdParams& params) {
    batch.validate();
    if (lambda == 0.0) return batch.base;
    if (!(lambda >= 0.0) || lambda > 1.0) {
        throw InvalidParams("apply_plw: lambda must be in [0, 1]");
    }
    std::vector<double> out(batch.base.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 - lambda * gpd_pdf_saturated(batch.aux[i], params)) * batch.base[i];
    }
    return out;
}

KurtosisTerms kurtosis_terms(std::span<const double> aux) {
    if (aux.size() < 2) {
        throw BatchTooSmall("kurtosis_terms: need at least 2 examples, got " +
                            std::to_string(aux.size()));
    }
    double mean = 0.0;
    for (double a : aux) mean += a;
    mean /= static_cast<double>(aux.size());
    double var = 0.0;
    for (double a : aux) var += (a - mean) * (a - mean);
    var /= static_cast<double>(aux.size());

    KurtosisTerms result;
    result.stats.mean_aux = mean;
    result.stats.std_aux = std::sqrt(var);
    result.terms.resize(aux.size(), 0.0);
    if (var == 0.0) return result;  // constant batch has no tail to emphasize
    for (std::size_t i = 0; i < aux.size(); ++i) {
        const double d2 = (aux[i] - mean) * (aux[i] - mean);
        result.terms[i] = (d2 * d2) / (var * var);
    }
    return result;
}

std::vector<double> apply_kurtosis(const LossBatch& batch, double lambda) {
    batch.validate();
    if (batch.base.size() < 2) {
        throw BatchTooSmall("apply_kurtosis: need at least 2 examples");
    }
    if (lambda == 0.0) return batch.base;
    const auto kt = kurtosis_terms(batch.aux);
    std::vector<double> out(batch.base.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = batch.base[i] + lambda * kt.terms[i];
    }
    return out;
}

double focal_weight(double aux, double batch_max_aux, double gamma) {
    if (!(batch_max_aux > 0.0)) {
        throw InvalidParams("focal_weight: batch max aux must be positive");
    }
    if (!(gamma >= 0.0)) throw InvalidParams("focal_weight: gamma must be nonnegative");
    if (!(aux >= 0.0)) throw InvalidParams("focal_weight: aux must be nonnegative");
    return std::pow(aux / batch_max_aux, gamma);
}

double shrinkage_weight(double aux, double a, double c) {
    if (!(a > 0.0)) throw InvalidParams("shrinkage_weight: a must be positive");
    return 1.0 / (1.0 + std::exp(a * (c - aux)));
}

LdsWeights lds_weights(std::span<const double> labels, int bins, double kernel_width,
                       double min_prob) {
    if (bins < 2) throw InvalidParams("lds_weights: bins must be >= 2");
    if (!(kernel_width > 0.0)) throw InvalidParams("lds_weights: kernel width must be positive");
    if (!(min_prob > 0.0)) throw InvalidParams("lds_weights: min_prob must be positive");
    if (labels.empty()) throw InvalidParams("lds_weights: empty label set");

    const auto [lo_it, hi_it] = std::minmax_element(labels.begin(), labels.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) throw DegenerateLabels("lds_weights: all labels identical");

    const double width = (hi - lo) / static_cast<double>(bins);
    auto bin_of = [&](double x) {
        int b = static_cast<int>((x - lo) / width);
        return std::clamp(b, 0, bins - 1);
    };

    std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
    for (double x : labels) hist[static_cast<std::size_t>(bin_of(x))] += 1.0;
    for (double& h : hist) h /= static_cast<double>(labels.size());

    // Gaussian smoothing over bins, truncated at 3 sigma. The kernel is
    // renormalized per bin over the in-range taps so a flat histogram stays
    // exactly flat at the boundaries.
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * kernel_width)));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (int j = -half; j <= half; ++j) {
        const double z = static_cast<double>(j) / kernel_width;
        kernel[static_cast<std::size_t>(j + half)] = std::exp(-0.5 * z * z);
    }

    std::vector<double> smoothed(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b) {
        double acc = 0.0, used = 0.0;
        for (int j = -half; j <= half; ++j) {
            const int src = b + j;
            if (src < 0 || src >= bins) continue;
            const double kv = kernel[static_cast<std::size_t>(j + half)];
            acc += kv * hist[static_cast<std::size_t>(src)];
            used += kv;
        }
        smoothed[static_cast<std::size_t>(b)] = acc / used;
    }

    LdsWeights out;
    out.densities.resize(labels.size());
    out.weights.resize(labels.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double d = std::max(smoothed[static_cast<std::size_t>(bin_of(labels[i]))], min_prob);
        out.densities[i] = d;
        out.weights[i] = 1.0 / d;
        wsum += out.weights[i];
    }
    const double wmean = wsum / static_cast<double>(labels.size());
    for (double& w : out.weights) w /= wmean;
    return out;
}

ModifierContext make_modifier_context(const ModifierConfig& config, const LossBatch& batch,
                                      const GpdParams& gpd,
                                      std::span<const std::vector<double>> example_targets) {
    batch.validate();
    config.validate();
    ModifierContext ctx;
    ctx.gpd = gpd;
    switch (config.kind) {
        case ModifierKind::None:
        case ModifierKind::Plm:
        case ModifierKind::Plw:
            break;
        case ModifierKind::Kurtosis: {
            if (batch.aux.size() < 2) {
                throw BatchTooSmall("kurtosis modifier: need at least 2 examples");
            }
            const auto kt = kurtosis_terms(batch.aux);
            ctx.aux_stats = kt.stats;
            break;
        }
        case ModifierKind::Focal:
        case ModifierKind::Shrinkage:
            ctx.max_aux = *std::max_element(batch.aux.begin(), batch.aux.end());
            break;
        case ModifierKind::Lds: {
            if (example_targets.size() != batch.base.size()) {
                throw LengthMismatch("lds modifier: need one target vector per example");
            }
            std::vector<double> pooled;
            for (const auto& t : example_targets) pooled.insert(pooled.end(), t.begin(), t.end());
            const auto lds =
                lds_weights(pooled, config.lds_bins, config.lds_kernel_width, config.lds_min_prob);
            // Example weight is the mean of its steps' label weights,
            // renormalized to mean 1 over the batch.
            ctx.example_weights.resize(batch.base.size());
            std::size_t off = 0;
            double wsum = 0.0;
            for (std::size_t i = 0; i < example_targets.size(); ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < example_targets[i].size(); ++j) {
                    s += lds.weights[off + j];
                }
                off += example_targets[i].size();
                ctx.example_weights[i] = s / static_cast<double>(example_targets[i].size());
                wsum += ctx.example_weights[i];
            }
            const double wmean = wsum / static_cast<double>(batch.base.size());
            for (double& w : ctx.example_weights) w /= wmean;
            break;
        }
    }
    return ctx;
}

std::vector<double> apply_modifier(const ModifierConfig& config, const LossBatch& batch,
                                   const ModifierContext& ctx) {
    batch.validate();
    const double lambda = config.lambda;
    switch (config.kind) {
        case ModifierKind::None:
            return batch.base;
        case ModifierKind::Plm:
            return apply_plm(batch, lambda, ctx.gpd);
        case ModifierKind::Plw:
            return apply_plw(batch, lambda, ctx.gpd);
        case ModifierKind::Kurtosis: {
            if (lambda == 0.0) return batch.base;
            std::vector<double> out(batch.base.size());
            const double sd = ctx.aux_stats.std_aux;
            for (std::size_t i = 0; i < out.size(); ++i) {
                double term = 0.0;
                if (sd > 0.0) {
                    const double d2 = (batch.aux[i] - ctx.aux_stats.mean_aux) *
                                      (batch.aux[i] - ctx.aux_stats.mean_aux);
                    term = (d2 * d2) / (sd * sd * sd * sd);
                }
                out[i] = batch.base[i] + lambda * term;
            }
            return out;
        }
        case ModifierKind::Focal: {
            std::vector<double> out(batch.base.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double w = ctx.max_aux > 0.0
                                     ? focal_weight(batch.aux[i], ctx.max_aux, config.focal_gamma)
                                     : 1.0;
                out[i] = w * batch.base[i];
            }
            return out;
        }
        case ModifierKind::Shrinkage: {
            std::vector<double> out(batch.base.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                const double a_norm = ctx.max_aux > 0.0 ? batch.aux[i] / ctx.max_aux : 0.0;
                out[i] = shrinkage_weight(a_norm, config.shrinkage_a, config.shrinkage_c) *
                         batch.base[i];
            }
            return out;
        }
        case ModifierKind::Lds: {
            if (ctx.example_weights.size() != batch.base.size()) {
                throw LengthMismatch("lds modifier: context weights missing");
            }
            std::vector<double> out(batch.base.size());
            for (std::size_t i = 0; i < out.size(); ++i) {
                out[i] = ctx.example_weights[i] * batch.base[i];
            }
            return out;
        }
    }
    throw InvalidParams("apply_modifier: unknown kind");
}

LossPartials modifier_partials(const ModifierConfig& config, const LossBatch& batch,
                               const ModifierContext& ctx) {
    batch.validate();
    const std::size_t n = batch.base.size();
    LossPartials p;
    p.d_base.assign(n, 1.0);
    p.d_aux.assign(n, 0.0);
    const double lambda = config.lambda;
    // lambda scales plm/plw/kurtosis only; the baseline weights ignore it.
    const bool lambda_scaled = config.kind == ModifierKind::Plm ||
                               config.kind == ModifierKind::Plw ||
                               config.kind == ModifierKind::Kurtosis;
    if (config.kind == ModifierKind::None || (lambda_scaled && lambda == 0.0)) return p;
    switch (config.kind) {
        case ModifierKind::None:
            break;
        case ModifierKind::Plm:
            for (std::size_t i = 0; i < n; ++i) {
                p.d_aux[i] = -lambda * gpd_pdf_derivative_saturated(batch.aux[i], ctx.gpd);
            }
            break;
        case ModifierKind::Plw:
            for (std::size_t i = 0; i < n; ++i) {
                p.d_base[i] = 1.0 - lambda * gpd_pdf_saturated(batch.aux[i], ctx.gpd);
                p.d_aux[i] =
                    -lambda * gpd_pdf_derivative_saturated(batch.aux[i], ctx.gpd) * batch.base[i];
            }
            break;
        case ModifierKind::Kurtosis: {
            const double sd = ctx.aux_stats.std_aux;
            if (sd > 0.0) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double z = (batch.aux[i] - ctx.aux_stats.mean_aux) / sd;
                    p.d_aux[i] = lambda * 4.0 * z * z * z / sd;
                }
            }
            break;
        }
        case ModifierKind::Focal:
            for (std::size_t i = 0; i < n; ++i) {
                if (ctx.max_aux <= 0.0) continue;  // degenerate batch, weights fixed at 1
                const double ratio = batch.aux[i] / ctx.max_aux;
                p.d_base[i] = std::pow(ratio, config.focal_gamma);
                if (ratio > 0.0 || config.focal_gamma >= 1.0) {
                    p.d_aux[i] = batch.base[i] * config.focal_gamma *
                                 std::pow(ratio, config.focal_gamma - 1.0) / ctx.max_aux;
                }
            }
            break;
        case ModifierKind::Shrinkage:
            for (std::size_t i = 0; i < n; ++i) {
                const double a_norm = ctx.max_aux > 0.0 ? batch.aux[i] / ctx.max_aux : 0.0;
                const double w = shrinkage_weight(a_norm, config.shrinkage_a, config.shrinkage_c);
                p.d_base[i] = w;
                if (ctx.max_aux > 0.0) {
                    p.d_aux[i] =
                        batch.base[i] * w * (1.0 - w) * config.shrinkage_a / ctx.max_aux;
                }
            }
            break;
        case ModifierKind::Lds:
            if (ctx.example_weights.size() != n) {
                throw LengthMismatch("lds modifier: context weights missing");
            }
            for (std::size_t i = 0; i < n; ++i) p.d_base[i] = ctx.example_weights[i];
            break;
    }
    return p;
}

}  // namespace tailcast
