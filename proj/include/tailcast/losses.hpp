#pragma once

#include <span>
#include <string>
#include <vector>

#include "tailcast/common.hpp"
#include "tailcast/gpd.hpp"

namespace tailcast {

// Per-example losses for one training batch: `base` is the loss being
// optimized (Gaussian NLL here), `aux` is the nonnegative auxiliary loss
// (MAE) that tail statistics are computed from.
struct LossBatch {
    std::vector<double> base;
    std::vector<double> aux;

    void validate() const;  // throws LengthMismatch / InvalidParams
};

enum class ModifierKind { None, Plm, Plw, Kurtosis, Focal, Shrinkage, Lds };

std::string modifier_kind_name(ModifierKind kind);
ModifierKind modifier_kind_from_name(const std::string& name);

struct ModifierConfig {
    ModifierKind kind = ModifierKind::None;
    double lambda = 0.0;
    // focal
    double focal_gamma = 2.0;
    // shrinkage (applied to aux normalized by the batch max)
    double shrinkage_a = 10.0;
    double shrinkage_c = 0.2;
    // label distribution smoothing
    int lds_bins = 50;
    double lds_kernel_width = 2.0;  // Gaussian sigma, in bin widths
    double lds_min_prob = 0.001;

    void validate() const;  // throws InvalidParams
};

// Default lambda for each modifier kind on time-series tasks.
double default_lambda(ModifierKind kind);

struct BatchStats {
    double mean_aux = 0.0;
    double std_aux = 0.0;  // population convention
};

// --- base losses ------------------------------------------------------

// 0.5*ln(2*pi) + ln(std) + (target - mean)^2 / (2*std^2)
double gaussian_nll(double mean, double std, double target);

// Mean absolute error over a horizon.
double mae_loss(std::span<const double> pred, std::span<const double> target);

// --- proposed modifiers -----------------------------------------------

// Additive margin 1 - pdf(aux). Strict about the pdf support; the batch
// application below saturates instead.
double plm_margin(double aux, const GpdParams& params);

// base_i + lambda * (1 - pdf(aux_i)). lambda == 0 returns base verbatim.
std::vector<double> apply_plm(const LossBatch& batch, double lambda, const GpdParams& params);

// Weight 1 - lambda * pdf(aux); lambda must lie in [0, 1] so weights stay
// in [1 - lambda, 1].
double plw_weight(double aux, double lambda, const GpdParams& params);

// weight_i * base_i. lambda == 0 returns base verbatim.
std::vector<double> apply_plw(const LossBatch& batch, double lambda, const GpdParams& params);

// Per-example contribution to the batch kurtosis of aux:
// ((aux_i - mean)/std)^4 with population std. A zero-spread batch yields
// all-zero terms. Needs at least 2 examples.
struct KurtosisTerms {
    std::vector<double> terms;
    BatchStats stats;
};
KurtosisTerms kurtosis_terms(std::span<const double> aux);

// base_i + lambda * kurtosis term. lambda == 0 returns base verbatim.
std::vector<double> apply_kurtosis(const LossBatch& batch, double lambda);

// --- reweighting baselines --------------------------------------------

// (aux / batch_max_aux)^gamma in [0, 1].
double focal_weight(double aux, double batch_max_aux, double gamma);

// 1 / (1 + exp(a*(c - aux))) in (0, 1), increasing in aux.
double shrinkage_weight(double aux, double a, double c);

// Label-distribution smoothing: histogram the labels, smooth with a
// Gaussian kernel, floor the density at min_prob, weight by the inverse
// density, and normalize the weights to mean 1.
struct LdsWeights {
    std::vector<double> weights;    // per label, mean 1
    std::vector<double> densities;  // per label, after flooring
};
LdsWeights lds_weights(std::span<const double> labels, int bins, double kernel_width,
                       double min_prob);

// --- batch application with detached statistics ------------------------

// Constants computed once per batch and treated as non-differentiable when
// gradients are taken: the fitted GPD, the aux mean/std, the aux max, and
// LDS example weights. Freezing them is also what makes finite-difference
// checks of the analytic gradients well-defined.
struct ModifierContext {
    GpdParams gpd;
    BatchStats aux_stats;
    double max_aux = 0.0;
    std::vector<double> example_weights;  // lds only, one per example
};

// `example_targets` is consulted only for the LDS kind (one target vector
// per example; all steps pool into a single label distribution).
ModifierContext make_modifier_context(const ModifierConfig& config, const LossBatch& batch,
                                      const GpdParams& gpd,
                                      std::span<const std::vector<double>> example_targets = {});

// Modified per-example losses under the frozen context.
std::vector<double> apply_modifier(const ModifierConfig& config, const LossBatch& batch,
                                   const ModifierContext& ctx);

// Partial derivatives of each modified loss with respect to that example's
// base and aux losses (context treated as constant).
struct LossPartials {
    std::vector<double> d_base;
    std::vector<double> d_aux;
};
LossPartials modifier_partials(const ModifierConfig& config, const LossBatch& batch,
                               const ModifierContext& ctx);

}  // namespace tailcast
