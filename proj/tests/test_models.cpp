#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tailcast/models.hpp"

using namespace tailcast;

namespace {

// Noiseless AR recurrence with the given coefficients and intercept.
std::vector<double> ar_recurrence(const std::vector<double>& coeffs, double intercept,
                                  std::vector<double> init, int length) {
    std::vector<double> y = std::move(init);
    while (static_cast<int>(y.size()) < length) {
        double v = intercept;
        for (std::size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * y[y.size() - 1 - i];
        y.push_back(v);
    }
    return y;
}

WindowedDataset toy_dataset(int n_examples, int k, int h, std::uint64_t seed) {
    WindowedDataset ds;
    ds.spec = {k, h};
    Rng rng(seed);
    for (int i = 0; i < n_examples; ++i) {
        WindowedExample ex;
        ex.series_id = 0;
        ex.start = i;
        for (int t = 0; t < k; ++t) ex.history.push_back(rng.normal());
        for (int t = 0; t < h; ++t) ex.target.push_back(rng.normal());
        ds.examples.push_back(std::move(ex));
    }
    ds.series_lengths = {n_examples + k + h};
    return ds;
}

double max_relative_gradient_error(const RecurrentForecaster& model, const WindowedDataset& ds,
                                   const ModifierConfig& cfg, const GpdParams& gpd) {
    std::vector<int> idx(ds.examples.size());
    std::iota(idx.begin(), idx.end(), 0);

    const auto res = rnn_loss_and_gradient(model, ds, idx, cfg, gpd);

    // freeze the per-batch statistics exactly as the analytic path does
    LossBatch batch{res.base, res.aux};
    std::vector<std::vector<double>> targets;
    for (const auto& ex : ds.examples) targets.push_back(ex.target);
    const auto ctx = make_modifier_context(cfg, batch, gpd, targets);

    const double step = 1e-5;
    double worst = 0.0;
    for (std::size_t pi = 0; pi < model.params.size(); ++pi) {
        RecurrentForecaster up = model, dn = model;
        up.params[pi] += step;
        dn.params[pi] -= step;
        const double fd = (rnn_modified_batch_loss(up, ds, idx, cfg, ctx) -
                           rnn_modified_batch_loss(dn, ds, idx, cfg, ctx)) /
                          (2.0 * step);
        const double ana = res.gradient[pi];
        const double rel = std::abs(ana - fd) / std::max({std::abs(ana), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace

TEST_CASE("fit_ar recovers noiseless recurrences") {
    SUBCASE("order 1") {
        std::vector<std::vector<double>> series;
        for (double y0 : {1.0, -2.0, 3.0}) {
            series.push_back(ar_recurrence({0.5}, 0.0, {y0}, 30));
        }
        const auto model = fit_ar(series, 1);
        CHECK(model.coeffs[0] == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(model.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
        CHECK(model.noise_std < 1e-10);
    }
    SUBCASE("order 2") {
        std::vector<std::vector<double>> series;
        Rng rng(3);
        for (int s = 0; s < 4; ++s) {
            series.push_back(ar_recurrence({0.3, 0.2}, 0.0, {rng.normal(), rng.normal()}, 40));
        }
        const auto model = fit_ar(series, 2);
        CHECK(model.coeffs[0] == doctest::Approx(0.3).epsilon(1e-7));
        CHECK(model.coeffs[1] == doctest::Approx(0.2).epsilon(1e-7));
    }
    SUBCASE("intercept recovery") {
        std::vector<std::vector<double>> series;
        Rng rng(5);
        for (int s = 0; s < 4; ++s) {
            series.push_back(ar_recurrence({0.6}, 1.0, {5.0 * rng.normal()}, 50));
        }
        const auto model = fit_ar(series, 1);
        CHECK(model.coeffs[0] == doctest::Approx(0.6).epsilon(1e-7));
        CHECK(model.intercept == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("fit_ar error paths") {
    CHECK_THROWS_AS(fit_ar({std::vector<double>(30, 2.0)}, 1), RankDeficient);
    CHECK_THROWS_AS(fit_ar({{1.0, 2.0}}, 2), SeriesTooShort);
    CHECK_THROWS_AS(fit_ar({}, 1), InvalidParams);
}

TEST_CASE("ar_forecast") {
    SUBCASE("noiseless model reproduces its own recurrence") {
        ArModel model;
        model.order = 1;
        model.coeffs = {0.5};
        model.intercept = 0.0;
        model.noise_std = 0.0;
        const double history[] = {16.0, 8.0, 4.0};
        const auto f = model.forecast(history, 2);
        CHECK(f.means[0] == doctest::Approx(2.0));
        CHECK(f.means[1] == doctest::Approx(1.0));
        for (double s : f.stds) CHECK(s > 0.0);  // epsilon floor
    }
    SUBCASE("one-step std equals the residual std") {
        ArModel model;
        model.order = 1;
        model.coeffs = {0.7};
        model.noise_std = 0.3;
        const double history[] = {1.0};
        const auto f = model.forecast(history, 1);
        CHECK(f.stds[0] == doctest::Approx(0.3));
    }
    SUBCASE("stds follow the psi recursion") {
        ArModel model;
        model.order = 2;
        model.coeffs = {0.5, 0.25};
        model.noise_std = 2.0;
        const double history[] = {1.0, 1.0};
        const auto f = model.forecast(history, 3);
        // psi = 1, 0.5, 0.5*0.5 + 0.25 = 0.5
        CHECK(f.stds[0] == doctest::Approx(2.0));
        CHECK(f.stds[1] == doctest::Approx(2.0 * std::sqrt(1.0 + 0.25)));
        CHECK(f.stds[2] == doctest::Approx(2.0 * std::sqrt(1.0 + 0.25 + 0.25)));
    }
    SUBCASE("history shorter than order") {
        ArModel model;
        model.order = 3;
        model.coeffs = {0.1, 0.1, 0.1};
        const double history[] = {1.0, 2.0};
        CHECK_THROWS_AS(model.forecast(history, 1), HistoryTooShort);
    }
}

TEST_CASE("rnn forward basics") {
    SUBCASE("zero weights give constant heads") {
        RecurrentForecaster model;
        model.hidden_size = 3;
        model.k = 4;
        model.h = 5;
        model.params.assign(RecurrentForecaster::param_count(3), 0.0);
        // set the two head biases (last parameter is the std bias,
        // the mean bias sits just before the std weights)
        const std::size_t bm = model.params.size() - 2 - 3;
        model.params[bm] = 0.7;
        model.params.back() = -1.0;
        const double history[] = {0.0, 0.0, 0.0, 0.0};
        const auto f = rnn_forward(model, history, 5);
        for (double m : f.means) CHECK(m == doctest::Approx(0.7));
        for (double s : f.stds) {
            CHECK(s == doctest::Approx(std::log1p(std::exp(-1.0)) + 1e-4));
        }
    }
    SUBCASE("forward is deterministic and stds are positive") {
        const auto model = make_rnn(8, 8, 8, 123);
        Rng rng(5);
        std::vector<double> history(8);
        for (auto& x : history) x = rng.normal();
        const auto a = rnn_forward(model, history, 8);
        const auto b = rnn_forward(model, history, 8);
        CHECK(a.means == b.means);
        CHECK(a.stds == b.stds);
        for (double s : a.stds) CHECK(s >= 1e-4);
    }
    SUBCASE("history length must match k") {
        const auto model = make_rnn(4, 8, 8, 1);
        std::vector<double> wrong(7, 0.0);
        CHECK_THROWS_AS(rnn_forward(model, wrong, 8), ShapeMismatch);
    }
    SUBCASE("init is bounded by 1/sqrt(hidden) and seeded") {
        const auto a = make_rnn(16, 8, 8, 9);
        const auto b = make_rnn(16, 8, 8, 9);
        const auto c = make_rnn(16, 8, 8, 10);
        CHECK(a.params == b.params);
        CHECK(a.params != c.params);
        const double r = 1.0 / 4.0;
        for (double w : a.params) {
            CHECK(w >= -r);
            CHECK(w <= r);
        }
    }
}

TEST_CASE("rnn batch losses match the scalar loss functions") {
    const auto model = make_rnn(4, 6, 3, 31);
    const auto ds = toy_dataset(5, 6, 3, 77);
    std::vector<int> idx(ds.examples.size());
    std::iota(idx.begin(), idx.end(), 0);
    RnnWorkspace ws;
    const auto losses = rnn_forward_batch(model, ds, idx, ws);
    for (std::size_t e = 0; e < ds.examples.size(); ++e) {
        const auto f = rnn_forward(model, ds.examples[e].history, 3);
        double nll = 0.0;
        for (int j = 0; j < 3; ++j) {
            nll += gaussian_nll(f.means[static_cast<std::size_t>(j)],
                                f.stds[static_cast<std::size_t>(j)],
                                ds.examples[e].target[static_cast<std::size_t>(j)]);
        }
        CHECK(losses.base[e] == doctest::Approx(nll / 3.0).epsilon(1e-12));
        CHECK(losses.aux[e] ==
              doctest::Approx(mae_loss(f.means, ds.examples[e].target)).epsilon(1e-12));
    }
}

TEST_CASE("rnn gradients match central finite differences") {
    // 2 hidden units, batch of 3, k = h = 4
    const auto model = make_rnn(2, 4, 4, 2024);
    const auto ds = toy_dataset(3, 4, 4, 99);
    const GpdParams gpd{0.3, 0.5};

    for (auto kind : {ModifierKind::None, ModifierKind::Plm, ModifierKind::Plw,
                      ModifierKind::Kurtosis, ModifierKind::Focal, ModifierKind::Shrinkage,
                      ModifierKind::Lds}) {
        CAPTURE(modifier_kind_name(kind));
        ModifierConfig cfg;
        cfg.kind = kind;
        cfg.lambda = default_lambda(kind);
        CHECK(max_relative_gradient_error(model, ds, cfg, gpd) < 1e-4);
    }
}

TEST_CASE("gradient perturbation moves the loss the way the gradient says") {
    const auto model = make_rnn(2, 4, 4, 7);
    const auto ds = toy_dataset(3, 4, 4, 11);
    std::vector<int> idx = {0, 1, 2};
    ModifierConfig none;
    const GpdParams gpd{0.0, 1.0};
    const auto res = rnn_loss_and_gradient(model, ds, idx, none, gpd);
    const auto ctx = make_modifier_context(none, LossBatch{res.base, res.aux}, gpd);
    for (std::size_t pi : {std::size_t{0}, res.gradient.size() / 2, res.gradient.size() - 1}) {
        RecurrentForecaster bumped = model;
        bumped.params[pi] += 1e-5;
        const double moved = rnn_modified_batch_loss(bumped, ds, idx, none, ctx);
        const double predicted = res.mean_modified + 1e-5 * res.gradient[pi];
        CHECK(moved == doctest::Approx(predicted).epsilon(1e-7));
    }
}

TEST_CASE("plw with unit lambda zeroes the gradient of perfect examples") {
    auto model = make_rnn(2, 4, 4, 15);
    WindowedDataset ds;
    ds.spec = {4, 4};
    Rng rng(19);
    for (int i = 0; i < 3; ++i) {
        WindowedExample ex;
        ex.series_id = 0;
        ex.start = i;
        for (int t = 0; t < 4; ++t) ex.history.push_back(rng.normal());
        const auto f = rnn_forward(model, ex.history, 4);
        ex.target = f.means;  // aux loss is exactly zero
        ds.examples.push_back(std::move(ex));
    }
    ds.series_lengths = {16};
    std::vector<int> idx = {0, 1, 2};
    ModifierConfig plw;
    plw.kind = ModifierKind::Plw;
    plw.lambda = 1.0;
    const auto res = rnn_loss_and_gradient(model, ds, idx, plw, GpdParams{0.2, 1.0});
    for (double g : res.gradient) CHECK(g == 0.0);
}
