#include "tailcast/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailcast {

std::string gpd_refit_name(GpdRefit refit) {
    return refit == GpdRefit::PerBatch ? "per_batch" : "per_epoch";
}

GpdRefit gpd_refit_from_name(const std::string& name) {
    if (name == "per_batch") return GpdRefit::PerBatch;
    if (name == "per_epoch") return GpdRefit::PerEpoch;
    throw InvalidParams("unknown gpd refit cadence: " + name);
}

std::string optimizer_kind_name(OptimizerKind kind) {
    return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind optimizer_kind_from_name(const std::string& name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "sgd") return OptimizerKind::Sgd;
    throw InvalidParams("unknown optimizer: " + name);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw InvalidParams("train: epochs must be >= 1");
    if (batch_size < 2) throw InvalidParams("train: batch_size must be >= 2");
    if (!(learning_rate > 0.0)) throw InvalidParams("train: learning_rate must be positive");
    if (!(gpd_ema >= 0.0) || !(gpd_ema <= 1.0)) {
        throw InvalidParams("train: gpd_ema must be in [0, 1]");
    }
    if (!(clip_norm > 0.0)) throw InvalidParams("train: clip_norm must be positive");
    if (warmup_epochs < 0) throw InvalidParams("train: warmup_epochs must be >= 0");
    modifier.validate();
}

namespace {

void blend_gpd(TrainState& state, const GpdParams& fit, double ema) {
    if (!state.gpd_initialized) {
        state.gpd = fit;
        state.gpd_initialized = true;
        return;
    }
    state.gpd.xi = (1.0 - ema) * state.gpd.xi + ema * fit.xi;
    state.gpd.eta = (1.0 - ema) * state.gpd.eta + ema * fit.eta;
}

TrainResult run_training(const WindowedDataset& dataset, TrainState state,
                         const TrainConfig& config, const BatchObserver& observer) {
    config.validate();
    if (dataset.examples.empty()) throw InvalidParams("train: empty dataset");
    const int n = static_cast<int>(dataset.examples.size());
    if (config.batch_size > n) {
        throw InvalidParams("train: batch_size " + std::to_string(config.batch_size) +
                            " exceeds dataset size " + std::to_string(n));
    }

    Rng rng(0);
    rng.set_state(state.rng_state);

    const std::size_t n_params = state.model.params.size();
    if (state.adam_m.size() != n_params) state.adam_m.assign(n_params, 0.0);
    if (state.adam_v.size() != n_params) state.adam_v.assign(n_params, 0.0);

    ModifierConfig none;
    RnnWorkspace ws;
    TrainResult result;

    std::vector<int> order(static_cast<std::size_t>(n));

    for (int epoch = state.epochs_completed; epoch < config.epochs; ++epoch) {
        // reshuffle from the identity so a resumed run only depends on the
        // checkpointed generator state, not on prior epochs' orderings
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        double base_sum = 0.0, aux_sum = 0.0;
        std::size_t seen = 0;
        std::vector<double> epoch_aux;
        epoch_aux.reserve(static_cast<std::size_t>(n));

        const bool warm = epoch < config.warmup_epochs;
        const ModifierConfig& active = warm ? none : config.modifier;

        int batch_index = 0;
        for (int begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
            const int end = std::min(begin + config.batch_size, n);
            if (end - begin < 2) continue;  // kurtosis terms need at least 2 examples
            std::span<const int> indices(order.data() + begin,
                                         static_cast<std::size_t>(end - begin));

            auto losses = rnn_forward_batch(state.model, dataset, indices, ws);
            for (std::size_t i = 0; i < losses.base.size(); ++i) {
                if (!std::isfinite(losses.base[i]) || !std::isfinite(losses.aux[i])) {
                    throw NonFiniteLoss("train: non-finite loss in epoch " +
                                        std::to_string(epoch) + ", batch " +
                                        std::to_string(batch_index));
                }
            }

            // refit the tail model on this batch's detached aux losses
            if (config.gpd_refit == GpdRefit::PerBatch) {
                try {
                    blend_gpd(state, fit_gpd_mom(losses.aux).params, config.gpd_ema);
                } catch (const DegenerateSample&) {
                    // zero-spread batch: keep the previous fit
                }
            }

            LossBatch batch{losses.base, losses.aux};
            std::vector<std::vector<double>> targets;
            if (active.kind == ModifierKind::Lds) {
                targets.reserve(indices.size());
                for (int idx : indices) {
                    targets.push_back(dataset.examples[static_cast<std::size_t>(idx)].target);
                }
            }
            const auto ctx = make_modifier_context(active, batch, state.gpd, targets);
            const auto modified = apply_modifier(active, batch, ctx);
            const double mean_modified = vec_mean(modified);
            if (!std::isfinite(mean_modified)) {
                throw NonFiniteLoss("train: non-finite modified loss in epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            const auto partials = modifier_partials(active, batch, ctx);
            auto grad =
                rnn_backward_batch(state.model, dataset, indices, partials.d_base, partials.d_aux, ws);

            double norm_sq = 0.0;
            for (double g : grad) norm_sq += g * g;
            const double norm = std::sqrt(norm_sq);
            if (!std::isfinite(norm)) {
                throw NonFiniteLoss("train: non-finite gradient in epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            if (norm > config.clip_norm) {
                const double scale = config.clip_norm / norm;
                for (double& g : grad) g *= scale;
            }

            if (config.optimizer.kind == OptimizerKind::Adam) {
                ++state.adam_t;
                const double b1 = config.optimizer.beta1;
                const double b2 = config.optimizer.beta2;
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.adam_t));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.adam_t));
                for (std::size_t i = 0; i < n_params; ++i) {
                    state.adam_m[i] = b1 * state.adam_m[i] + (1.0 - b1) * grad[i];
                    state.adam_v[i] = b2 * state.adam_v[i] + (1.0 - b2) * grad[i] * grad[i];
                    const double mhat = state.adam_m[i] / c1;
                    const double vhat = state.adam_v[i] / c2;
                    state.model.params[i] -=
                        config.learning_rate * mhat / (std::sqrt(vhat) + config.optimizer.eps);
                }
            } else {
                for (std::size_t i = 0; i < n_params; ++i) {
                    state.model.params[i] -= config.learning_rate * grad[i];
                }
            }

            for (std::size_t i = 0; i < losses.base.size(); ++i) {
                base_sum += losses.base[i];
                aux_sum += losses.aux[i];
                epoch_aux.push_back(losses.aux[i]);
            }
            seen += losses.base.size();

            if (observer) {
                BatchDiagnostics bd;
                bd.epoch = epoch;
                bd.batch_index = batch_index;
                bd.xi = state.gpd.xi;
                bd.eta = state.gpd.eta;
                bd.aux = losses.aux;
                observer(bd);
            }
        }

        if (config.gpd_refit == GpdRefit::PerEpoch && !epoch_aux.empty()) {
            try {
                blend_gpd(state, fit_gpd_mom(epoch_aux).params, config.gpd_ema);
            } catch (const DegenerateSample&) {
            }
        }

        EpochDiagnostics diag;
        diag.epoch = epoch;
        diag.mean_base_loss = seen > 0 ? base_sum / static_cast<double>(seen) : 0.0;
        diag.mean_aux_loss = seen > 0 ? aux_sum / static_cast<double>(seen) : 0.0;
        diag.xi = state.gpd.xi;
        diag.eta = state.gpd.eta;
        diag.aux_kurtosis = std::numeric_limits<double>::quiet_NaN();
        if (epoch_aux.size() >= 2) {
            try {
                diag.aux_kurtosis = moments(ErrorSample{epoch_aux}).kurtosis;
            } catch (const DegenerateSample&) {
            }
        }
        result.diagnostics.push_back(diag);
        state.epochs_completed = epoch + 1;
    }

    const std::uint64_t* rs = rng.state();
    for (int i = 0; i < 4; ++i) state.rng_state[i] = rs[i];
    result.state = std::move(state);
    return result;
}

}  // namespace

TrainResult train(const WindowedDataset& dataset, const RecurrentForecaster& init,
                  const TrainConfig& config, const BatchObserver& observer) {
    TrainState state;
    state.model = init;
    state.adam_m.assign(init.params.size(), 0.0);
    state.adam_v.assign(init.params.size(), 0.0);
    Rng rng(config.seed);
    const std::uint64_t* rs = rng.state();
    for (int i = 0; i < 4; ++i) state.rng_state[i] = rs[i];
    return run_training(dataset, std::move(state), config, observer);
}

TrainResult train_resume(const WindowedDataset& dataset, const TrainState& from,
                         const TrainConfig& config, const BatchObserver& observer) {
    return run_training(dataset, from, config, observer);
}

EvalResult evaluate(const Forecaster& model, const WindowedDataset& dataset, ErrorKind kind) {
    if (dataset.examples.empty()) throw InvalidParams("evaluate: empty dataset");
    EvalResult out;
    out.errors.values.reserve(dataset.examples.size());
    out.rows.reserve(dataset.examples.size());
    for (const auto& ex : dataset.examples) {
        const auto dist = model.forecast(ex.history, dataset.spec.h);
        try {
            const double err = per_example_error(dist.means, ex.target, kind);
            out.errors.values.push_back(err);
            out.rows.push_back({ex.series_id, ex.start, err});
        } catch (const ZeroDenominator&) {
            ++out.excluded_zero_denominator;
        }
    }
    if (out.errors.values.empty()) {
        throw EmptySample("evaluate: every window was excluded (all-zero targets)");
    }
    out.report = build_tail_report(out.errors);
    return out;
}

}  // namespace tailcast
