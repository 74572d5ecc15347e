#include "tailcast/study.hpp"

#include <algorithm>
#include <cmath>

namespace tailcast {

const StudyCell& StudyReport::cell(const std::string& model, const std::string& dataset) const {
    for (const auto& c : cells) {
        if (c.model == model && c.dataset == dataset) return c;
    }
    throw InvalidParams("study: no cell for " + model + "/" + dataset);
}

StudyReport run_synthetic_study(std::uint64_t seed, const StudyConfig& config) {
    StudyReport report;
    report.seed = seed;
    report.config = config;

    struct Named {
        std::string name;
        SeriesSet set;
    };
    std::vector<Named> sets;
    sets.push_back({"sine", gen_sine(config.n_series, config.length, derive_seed(seed, 1))});
    sets.push_back({"gaussian", gen_ar1(NoiseKind::Gaussian, config.ar1_phi, config.n_series,
                                        config.length, derive_seed(seed, 2))});
    sets.push_back({"pareto", gen_ar1(NoiseKind::Pareto, config.ar1_phi, config.n_series,
                                      config.length, derive_seed(seed, 3))});

    for (const auto& [name, set] : sets) {
        std::vector<double> abs_labels;
        for (const auto& s : set.series) {
            for (double y : s) abs_labels.push_back(std::abs(y));
        }
        LabelHistogram lh;
        lh.dataset = name;
        lh.histogram = loglog_histogram(abs_labels, config.histogram_bins);
        ErrorSample labels{std::move(abs_labels)};
        lh.label_max = *std::max_element(labels.values.begin(), labels.values.end());
        lh.label_var99 = var_alpha(labels, 0.99);
        report.labels.push_back(std::move(lh));
    }

    const auto boundary = SplitBoundary::fraction(config.split_fraction);
    for (const auto& [name, set] : sets) {
        const auto test_ds =
            train_test_split(window(set, config.window, config.test_stride), boundary).test;

        // closed-form AR baseline, fit on the training region only
        std::vector<std::vector<double>> train_region;
        for (const auto& s : set.series) {
            const auto cut = static_cast<std::size_t>(config.split_fraction *
                                                      static_cast<double>(s.size()));
            train_region.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut));
        }
        const ArModel ar = fit_ar(train_region, config.ar_order);
        StudyCell ar_cell;
        ar_cell.model = "ar";
        ar_cell.dataset = name;
        ar_cell.eval = evaluate(ar, test_ds, config.metric);
        ar_cell.error_histogram = loglog_histogram(ar_cell.eval.errors.values, config.histogram_bins);
        report.cells.push_back(std::move(ar_cell));
    }

    for (std::size_t d = 0; d < sets.size(); ++d) {
        const auto& [name, set] = sets[d];
        const auto train_split =
            train_test_split(window(set, config.window, config.train_stride), boundary);
        const auto test_split =
            train_test_split(window(set, config.window, config.test_stride), boundary);

        TrainConfig tc;
        tc.epochs = config.epochs;
        tc.batch_size = config.batch_size;
        tc.learning_rate = config.learning_rate;
        tc.seed = derive_seed(seed, 10 + d);
        tc.modifier = config.modifier;
        const auto init = make_rnn(config.hidden_size, config.window.k, config.window.h,
                                   derive_seed(seed, 20 + d));
        const auto trained = train(train_split.train, init, tc);

        StudyCell cell;
        cell.model = "gru";
        cell.dataset = name;
        cell.eval = evaluate(trained.state.model, test_split.test, config.metric);
        cell.error_histogram = loglog_histogram(cell.eval.errors.values, config.histogram_bins);
        report.cells.push_back(std::move(cell));
    }
    return report;
}

}  // namespace tailcast
