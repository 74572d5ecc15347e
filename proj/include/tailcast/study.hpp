#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailcast/metrics.hpp"
#include "tailcast/trainer.hpp"

namespace tailcast {

// Two-model x three-dataset experiment on the synthetic sets: generate
// sine / gaussian-AR(1) / pareto-AR(1) data, fit the AR baseline and train
// the recurrent forecaster on each, and evaluate tail reports on a
// chronological test split.
struct StudyConfig {
    int n_series = 100;
    int length = 960;
    WindowSpec window{8, 8};
    int train_stride = 4;
    int test_stride = 1;
    double split_fraction = 0.8;
    double ar1_phi = 0.5;
    int ar_order = 8;
    int hidden_size = 24;
    int epochs = 30;
    int batch_size = 256;
    double learning_rate = 2e-3;
    ModifierConfig modifier;  // applied to the recurrent model only
    int histogram_bins = 40;
    ErrorKind metric = ErrorKind::Nd;
};

struct StudyCell {
    std::string model;    // "ar" | "gru"
    std::string dataset;  // "sine" | "gaussian" | "pareto"
    EvalResult eval;
    LogLogHistogram error_histogram;
};

struct LabelHistogram {
    std::string dataset;
    LogLogHistogram histogram;  // of |label| values
    double label_max = 0.0;
    double label_var99 = 0.0;
};

struct StudyReport {
    std::uint64_t seed = 0;
    StudyConfig config;
    std::vector<LabelHistogram> labels;  // sine, gaussian, pareto
    std::vector<StudyCell> cells;        // ar x 3, then gru x 3

    const StudyCell& cell(const std::string& model, const std::string& dataset) const;
};

StudyReport run_synthetic_study(std::uint64_t seed, const StudyConfig& config = {});

}  // namespace tailcast
