#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tailcast/losses.hpp"
#include "tailcast/metrics.hpp"

using namespace tailcast;

TEST_CASE("gaussian nll hand values") {
    CHECK(gaussian_nll(3.0, 1.0, 3.0) == doctest::Approx(0.91894).epsilon(1e-5));
    CHECK(gaussian_nll(0.0, 1.0, 1.0) == doctest::Approx(1.41894).epsilon(1e-5));
    CHECK_THROWS_AS(gaussian_nll(0.0, 0.0, 1.0), InvalidParams);
    CHECK_THROWS_AS(gaussian_nll(0.0, -1.0, 1.0), InvalidParams);
}

TEST_CASE("mae hand values") {
    const double a[] = {1.0, 3.0};
    const double b[] = {0.0, 1.0};
    CHECK(mae_loss(a, a) == 0.0);
    CHECK(mae_loss(a, b) == doctest::Approx(1.5));
    const double c[] = {2.0};
    const double d[] = {-2.0};
    CHECK(mae_loss(c, d) == doctest::Approx(4.0));
    CHECK_THROWS_AS(mae_loss(a, c), LengthMismatch);
}

TEST_CASE("plm margin") {
    const GpdParams p{1.0, 1.0};
    CHECK(plm_margin(0.0, p) == 0.0);
    CHECK(plm_margin(1.0, p) == doctest::Approx(0.75));
    CHECK(std::abs(plm_margin(1e6, p) - 1.0) < 1e-9);
}

TEST_CASE("plm monotone in aux for positive shape") {
    const GpdParams p{0.7, 2.3};
    double prev = -1.0;
    for (int i = 0; i <= 500; ++i) {
        const double m = plm_margin(0.02 * i, p);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("apply_plm") {
    const GpdParams p{1.0, 1.0};
    LossBatch batch{{1.0}, {1.0}};
    CHECK(apply_plm(batch, 1.0, p) == std::vector<double>{1.75});

    LossBatch two{{0.2, 0.2}, {0.0, 1.0}};
    const auto out = apply_plm(two, 2.0, p);
    CHECK(out[0] == doctest::Approx(0.2));
    CHECK(out[1] == doctest::Approx(1.7));
}

TEST_CASE("lambda zero is the identity, bit for bit") {
    const GpdParams p{0.3, 0.8};
    LossBatch batch{{0.123456789, -2.5, 3.75}, {0.5, 0.0, 2.25}};
    CHECK(apply_plm(batch, 0.0, p) == batch.base);
    CHECK(apply_plw(batch, 0.0, p) == batch.base);
    CHECK(apply_kurtosis(batch, 0.0) == batch.base);
}

TEST_CASE("plw weights") {
    const GpdParams p{1.0, 1.0};
    CHECK(plw_weight(0.0, 1.0, p) == 0.0);
    CHECK(plw_weight(123.0, 0.0, p) == 1.0);
    CHECK(plw_weight(1.0, 0.5, p) == doctest::Approx(0.875));
    CHECK_THROWS_AS(plw_weight(1.0, 1.5, p), InvalidParams);
    CHECK_THROWS_AS(plw_weight(1.0, -0.1, p), InvalidParams);
}

TEST_CASE("plw weights stay in [1-lambda, 1]") {
    Rng rng(7);
    const GpdParams p{0.5, 1.1};
    for (int i = 0; i < 1000; ++i) {
        const double lambda = rng.next_double();
        const double aux = 5.0 * rng.next_double();
        const double w = plw_weight(aux, lambda, p);
        CHECK(w >= 1.0 - lambda);
        CHECK(w <= 1.0);
    }
}

TEST_CASE("apply_plw") {
    const GpdParams p{1.0, 1.0};
    CHECK(apply_plw(LossBatch{{2.0}, {1.0}}, 1.0, p) == std::vector<double>{1.5});
    CHECK(apply_plw(LossBatch{{4.0}, {0.0}}, 1.0, p) == std::vector<double>{0.0});
}

TEST_CASE("kurtosis terms hand example is exact") {
    const double aux[] = {0.0, 0.0, 0.0, 4.0};
    const auto kt = kurtosis_terms(aux);
    CHECK(kt.terms[0] == 1.0 / 9.0);
    CHECK(kt.terms[1] == 1.0 / 9.0);
    CHECK(kt.terms[2] == 1.0 / 9.0);
    CHECK(kt.terms[3] == 9.0);
    CHECK(kt.stats.mean_aux == 1.0);
    CHECK(kt.stats.std_aux == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("kurtosis term at the batch mean is zero") {
    const double aux[] = {2.0, 1.0, 3.0};  // mean 2
    const auto kt = kurtosis_terms(aux);
    CHECK(kt.terms[0] == 0.0);
}

TEST_CASE("kurtosis degenerate and small batches") {
    const double constant[] = {1.5, 1.5, 1.5};
    const auto kt = kurtosis_terms(constant);
    CHECK(std::all_of(kt.terms.begin(), kt.terms.end(), [](double t) { return t == 0.0; }));

    const double single[] = {1.0};
    CHECK_THROWS_AS(kurtosis_terms(single), BatchTooSmall);
    CHECK_THROWS_AS(apply_kurtosis(LossBatch{{5.0}, {1.0}}, 0.01), BatchTooSmall);
}

TEST_CASE("mean of kurtosis terms equals the raw fourth standardized moment") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> aux(32);
        for (auto& a : aux) a = rng.next_double() * 3.0;
        const auto kt = kurtosis_terms(aux);
        // independent oracle: direct moment computation
        const double mean = vec_mean(aux);
        double m2 = 0.0, m4 = 0.0;
        for (double a : aux) {
            m2 += (a - mean) * (a - mean);
            m4 += (a - mean) * (a - mean) * (a - mean) * (a - mean);
        }
        m2 /= static_cast<double>(aux.size());
        m4 /= static_cast<double>(aux.size());
        const double raw_kurt = m4 / (m2 * m2);
        CHECK(vec_mean(kt.terms) == doctest::Approx(raw_kurt).epsilon(1e-10));
    }
}

TEST_CASE("apply_kurtosis example") {
    LossBatch batch{{1.0, 1.0, 1.0, 1.0}, {0.0, 0.0, 0.0, 4.0}};
    const auto out = apply_kurtosis(batch, 0.01);
    CHECK(out[0] == doctest::Approx(1.0 + 0.01 / 9.0).epsilon(1e-14));
    CHECK(out[3] == doctest::Approx(1.09).epsilon(1e-14));
}

TEST_CASE("focal weight") {
    CHECK(focal_weight(2.0, 2.0, 2.0) == 1.0);
    CHECK(focal_weight(0.0, 2.0, 2.0) == 0.0);
    CHECK(focal_weight(1.0, 2.0, 2.0) == doctest::Approx(0.25));
    CHECK_THROWS_AS(focal_weight(1.0, 0.0, 2.0), InvalidParams);
    for (double aux : {0.0, 0.3, 0.9, 2.0}) {
        const double w = focal_weight(aux, 2.0, 1.7);
        CHECK(w >= 0.0);
        CHECK(w <= 1.0);
    }
}

TEST_CASE("shrinkage weight") {
    CHECK(shrinkage_weight(0.2, 10.0, 0.2) == doctest::Approx(0.5));
    CHECK(shrinkage_weight(1e9, 10.0, 0.2) == doctest::Approx(1.0));
    CHECK(shrinkage_weight(0.0, 10.0, 0.2) == doctest::Approx(1.0 / (1.0 + std::exp(2.0))));
    CHECK_THROWS_AS(shrinkage_weight(0.5, 0.0, 0.2), InvalidParams);

    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double w = shrinkage_weight(0.01 * i, 10.0, 0.2);
        CHECK(w > prev);
        CHECK(w < 1.0);
        prev = w;
    }
}

TEST_CASE("lds weights") {
    SUBCASE("uniform labels give unit weights") {
        std::vector<double> labels;
        for (int i = 0; i < 1000; ++i) labels.push_back(static_cast<double>(i % 10));
        const auto lds = lds_weights(labels, 10, 0.5, 0.001);
        for (double w : lds.weights) CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("an outlier label is upweighted") {
        std::vector<double> labels;
        for (int i = 0; i < 200; ++i) labels.push_back(1.0 + 0.001 * (i % 7));
        labels.push_back(50.0);
        const auto lds = lds_weights(labels, 20, 1.0, 0.001);
        CHECK(lds.weights.back() > lds.weights.front());
    }
    SUBCASE("density floor holds") {
        std::vector<double> labels(5000, 1.0);
        labels.push_back(100.0);
        const auto lds = lds_weights(labels, 50, 1.0, 0.001);
        for (double d : lds.densities) CHECK(d >= 0.001);
    }
    SUBCASE("identical labels are rejected") {
        std::vector<double> labels(10, 2.0);
        CHECK_THROWS_AS(lds_weights(labels, 10, 1.0, 0.001), DegenerateLabels);
    }
    SUBCASE("weights have mean one") {
        Rng rng(3);
        std::vector<double> labels(500);
        for (auto& l : labels) l = rng.normal();
        const auto lds = lds_weights(labels, 30, 2.0, 0.001);
        CHECK(vec_mean(lds.weights) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("batch invariants across modifiers") {
    Rng rng(21);
    const GpdParams gpd{0.4, 0.7};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.next_u64() % 30;
        LossBatch batch;
        batch.base.resize(n);
        batch.aux.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            batch.base[i] = rng.normal();
            batch.aux[i] = rng.next_double() * 4.0;
        }
        // identity at lambda 0
        CHECK(apply_plm(batch, 0.0, gpd) == batch.base);
        CHECK(apply_plw(batch, 0.0, gpd) == batch.base);
        CHECK(apply_kurtosis(batch, 0.0) == batch.base);
        // plm adds margins in [0, 1] scaled by lambda
        const auto plm = apply_plm(batch, 2.0, gpd);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(plm[i] >= batch.base[i]);
            CHECK(plm[i] <= batch.base[i] + 2.0);
        }
        // plw never increases a nonnegative base loss
        LossBatch pos = batch;
        for (auto& b : pos.base) b = std::abs(b);
        const auto plw = apply_plw(pos, 0.9, gpd);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(plw[i] <= pos.base[i]);
            CHECK(plw[i] >= 0.0);
        }
    }
}

TEST_CASE("modifier context for the reweighting kinds") {
    LossBatch batch{{1.0, 2.0, 3.0}, {0.5, 1.0, 2.0}};
    const GpdParams gpd{0.2, 1.0};

    ModifierConfig focal;
    focal.kind = ModifierKind::Focal;
    const auto fctx = make_modifier_context(focal, batch, gpd);
    CHECK(fctx.max_aux == 2.0);
    const auto fmod = apply_modifier(focal, batch, fctx);
    CHECK(fmod[2] == doctest::Approx(3.0));     // weight 1 at the max
    CHECK(fmod[0] == doctest::Approx(0.0625));  // (0.25)^2 * 1.0

    ModifierConfig lds;
    lds.kind = ModifierKind::Lds;
    lds.lds_bins = 4;
    std::vector<std::vector<double>> targets = {{0.0, 0.1}, {0.0, 0.2}, {5.0, 5.1}};
    const auto lctx = make_modifier_context(lds, batch, gpd, targets);
    REQUIRE(lctx.example_weights.size() == 3);
    CHECK(lctx.example_weights[2] > lctx.example_weights[0]);  // rare labels upweighted
    CHECK(vec_mean(lctx.example_weights) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partials match finite differences in base and aux") {
    const GpdParams gpd{0.35, 0.9};
    LossBatch batch{{0.8, 1.4, 0.3, 2.2}, {0.4, 1.1, 0.05, 1.9}};
    std::vector<std::vector<double>> targets = {{0.1, 0.4}, {1.0, 1.2}, {0.2, 0.3}, {4.0, 3.0}};

    for (auto kind : {ModifierKind::None, ModifierKind::Plm, ModifierKind::Plw,
                      ModifierKind::Kurtosis, ModifierKind::Focal, ModifierKind::Shrinkage,
                      ModifierKind::Lds}) {
        ModifierConfig cfg;
        cfg.kind = kind;
        cfg.lambda = kind == ModifierKind::Plw ? 0.6 : 0.8;
        const auto ctx = make_modifier_context(cfg, batch, gpd, targets);
        const auto partials = modifier_partials(cfg, batch, ctx);
        const double eps = 1e-7;
        for (std::size_t i = 0; i < batch.base.size(); ++i) {
            LossBatch up = batch, dn = batch;
            up.base[i] += eps;
            dn.base[i] -= eps;
            const double fd_base =
                (apply_modifier(cfg, up, ctx)[i] - apply_modifier(cfg, dn, ctx)[i]) / (2.0 * eps);
            CHECK(partials.d_base[i] == doctest::Approx(fd_base).epsilon(1e-5));

            up = batch;
            dn = batch;
            up.aux[i] += eps;
            dn.aux[i] -= eps;
            const double fd_aux =
                (apply_modifier(cfg, up, ctx)[i] - apply_modifier(cfg, dn, ctx)[i]) / (2.0 * eps);
            CHECK(partials.d_aux[i] ==
                  doctest::Approx(fd_aux).epsilon(1e-5).scale(std::max(1.0, std::abs(fd_aux))));
        }
    }
}

TEST_CASE("batch validation") {
    CHECK_THROWS_AS(LossBatch({1.0}, {1.0, 2.0}).validate(), LengthMismatch);
    CHECK_THROWS_AS(LossBatch({1.0}, {-0.5}).validate(), InvalidParams);
    CHECK_THROWS_AS(LossBatch({}, {}).validate(), InvalidParams);
}
