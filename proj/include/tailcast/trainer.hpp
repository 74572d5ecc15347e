#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tailcast/data.hpp"
#include "tailcast/losses.hpp"
#include "tailcast/metrics.hpp"
#include "tailcast/models.hpp"

namespace tailcast {

enum class OptimizerKind { Adam, Sgd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

enum class GpdRefit { PerBatch, PerEpoch };

std::string gpd_refit_name(GpdRefit refit);
GpdRefit gpd_refit_from_name(const std::string& name);
std::string optimizer_kind_name(OptimizerKind kind);
OptimizerKind optimizer_kind_from_name(const std::string& name);

struct TrainConfig {
    int epochs = 10;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    ModifierConfig modifier;
    GpdRefit gpd_refit = GpdRefit::PerBatch;
    double gpd_ema = 0.3;  // blend factor s: new = (1-s)*old + s*fit
    OptimizerConfig optimizer;
    double clip_norm = 10.0;
    // Epochs trained on the unmodified base loss before the modifier kicks
    // in, so the first GPD fits see settled losses rather than init noise.
    int warmup_epochs = 1;

    void validate() const;
};

// Everything needed to resume training bit-exactly.
struct TrainState {
    RecurrentForecaster model;
    std::vector<double> adam_m, adam_v;
    std::uint64_t adam_t = 0;
    int epochs_completed = 0;
    GpdParams gpd{0.0, 1.0};
    bool gpd_initialized = false;
    std::uint64_t rng_state[4] = {0, 0, 0, 0};
};

struct EpochDiagnostics {
    int epoch = 0;
    double mean_base_loss = 0.0;
    double mean_aux_loss = 0.0;
    double xi = 0.0;
    double eta = 1.0;
    // Excess kurtosis of the epoch's pooled aux losses; NaN when degenerate.
    double aux_kurtosis = 0.0;
};

// Observer fired after each optimizer step; carries the refit GPD state and
// a copy of the batch's aux losses so tests can recompute the fit.
struct BatchDiagnostics {
    int epoch = 0;
    int batch_index = 0;
    double xi = 0.0;
    double eta = 1.0;
    std::vector<double> aux;
};
using BatchObserver = std::function<void(const BatchDiagnostics&)>;

struct TrainResult {
    TrainState state;
    std::vector<EpochDiagnostics> diagnostics;
};

// Fresh training run from an initialized model.
TrainResult train(const WindowedDataset& dataset, const RecurrentForecaster& init,
                  const TrainConfig& config, const BatchObserver& observer = {});

// Continues a checkpointed run until config.epochs epochs are complete.
TrainResult train_resume(const WindowedDataset& dataset, const TrainState& from,
                         const TrainConfig& config, const BatchObserver& observer = {});

// --- evaluation -----------------------------------------------------------

struct PerExampleError {
    int series_id = 0;
    int start = 0;
    double error = 0.0;
};

struct EvalResult {
    ErrorSample errors;
    TailReport report;
    int excluded_zero_denominator = 0;  // all-zero target windows (nd/nrmse)
    std::vector<PerExampleError> rows;
};

// Point forecasts are the per-step means.
EvalResult evaluate(const Forecaster& model, const WindowedDataset& dataset, ErrorKind kind);

// --- checkpoint files -------------------------------------------------------

// Binary format: magic, version, model kind, architecture header, flat
// parameter vector, optional optimizer/GPD/RNG state, CRC32 trailer.
// Round-trips bit-exactly; load verifies the checksum.
struct Checkpoint {
    enum class ModelKind { Ar, Rnn };
    ModelKind kind = ModelKind::Rnn;
    ArModel ar;            // kind == Ar
    TrainState rnn;        // kind == Rnn
    bool has_train_state = false;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace tailcast
