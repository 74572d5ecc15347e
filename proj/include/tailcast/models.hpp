#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "tailcast/common.hpp"
#include "tailcast/data.hpp"
#include "tailcast/losses.hpp"

namespace tailcast {

// Per-step Gaussian forecast over a horizon.
struct ForecastDistribution {
    std::vector<double> means;
    std::vector<double> stds;  // strictly positive
};

class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual ForecastDistribution forecast(std::span<const double> history, int horizon) const = 0;
};

// --- autoregressive baseline --------------------------------------------

struct ArModel final : Forecaster {
    int order = 1;
    std::vector<double> coeffs;  // lag 1..order
    double intercept = 0.0;
    double noise_std = 0.0;

    // Iterated one-step means; stds follow the psi-weight recursion
    // var_j = noise_std^2 * sum_{m<j} psi_m^2 (floored at a tiny epsilon so
    // downstream likelihoods stay defined for noiseless fits).
    ForecastDistribution forecast(std::span<const double> history, int horizon) const override;
};

// Pooled OLS of y_t on (y_{t-1}, ..., y_{t-order}, 1) across all series.
// noise_std is the residual standard deviation with the usual n - (order+1)
// degrees-of-freedom correction.
ArModel fit_ar(const std::vector<std::vector<double>>& series, int order);

// --- recurrent probabilistic forecaster ----------------------------------

// Single-layer GRU over the scalar series: the history is encoded step by
// step, then the horizon is decoded autoregressively feeding back the
// predicted mean. Each decode step emits a Gaussian (mean, std) with
// std = softplus(raw) + 1e-4.
//
// Flat parameter layout (doubles):
//   Wz[H] Uz[H*H] bz[H]  Wr[H] Ur[H*H] br[H]  Wn[H] Un[H*H] bn[H]
//   wm[H] bm  ws[H] bs
struct RecurrentForecaster final : Forecaster {
    int hidden_size = 8;
    int k = 8;  // history length the model was built for
    int h = 8;  // horizon length the model was built for
    std::vector<double> params;

    static std::size_t param_count(int hidden_size);
    ForecastDistribution forecast(std::span<const double> history, int horizon) const override;
};

inline constexpr double kStdFloor = 1e-4;

// Seeded uniform init in [-r, r], r = 1/sqrt(hidden_size).
RecurrentForecaster make_rnn(int hidden_size, int k, int h, std::uint64_t seed);

// History must have length k; horizon is the requested decode length.
ForecastDistribution rnn_forward(const RecurrentForecaster& model,
                                 std::span<const double> history, int horizon);

// Reusable forward/backward scratch space for one batch.
class RnnWorkspace;

struct RnnBatchLosses {
    std::vector<double> base;  // per-example mean Gaussian NLL over the horizon
    std::vector<double> aux;   // per-example MAE over the horizon
};

// Forward pass over a batch (indices into the dataset), caching what the
// backward pass needs.
RnnBatchLosses rnn_forward_batch(const RecurrentForecaster& model, const WindowedDataset& data,
                                 std::span<const int> indices, RnnWorkspace& ws);

// Parameter gradient of (1/n) * sum_i [gl_i * base_i + ga_i * aux_i] using
// the traces cached by rnn_forward_batch.
std::vector<double> rnn_backward_batch(const RecurrentForecaster& model,
                                       const WindowedDataset& data, std::span<const int> indices,
                                       std::span<const double> gl, std::span<const double> ga,
                                       RnnWorkspace& ws);

struct RnnLossAndGradient {
    std::vector<double> base;
    std::vector<double> aux;
    std::vector<double> gradient;  // of the mean modifier-transformed loss
    double mean_modified = 0.0;
};

// Composition used by tests and the trainer's inner loop: forward, freeze
// the per-batch modifier statistics, then backpropagate through base and
// aux with the modifier partials.
RnnLossAndGradient rnn_loss_and_gradient(const RecurrentForecaster& model,
                                         const WindowedDataset& data,
                                         std::span<const int> indices,
                                         const ModifierConfig& modifier, const GpdParams& gpd);

// Batch-mean modified loss under an already-frozen context; the
// finite-difference gradient checks perturb parameters through this.
double rnn_modified_batch_loss(const RecurrentForecaster& model, const WindowedDataset& data,
                               std::span<const int> indices, const ModifierConfig& modifier,
                               const ModifierContext& ctx);

class RnnWorkspace {
public:
    RnnWorkspace() = default;

private:
    friend RnnBatchLosses rnn_forward_batch(const RecurrentForecaster&, const WindowedDataset&,
                                            std::span<const int>, RnnWorkspace&);
    friend std::vector<double> rnn_backward_batch(const RecurrentForecaster&,
                                                  const WindowedDataset&, std::span<const int>,
                                                  std::span<const double>, std::span<const double>,
                                                  RnnWorkspace&);
    struct ExampleTrace {
        std::vector<double> inputs;   // k + h step inputs
        std::vector<double> h_prev;   // (k+h) x H hidden state before each step
        std::vector<double> z, r, n;  // (k+h) x H gate activations
        std::vector<double> means, raws, stds;  // h decode outputs
    };
    std::vector<ExampleTrace> traces_;
};

}  // namespace tailcast
