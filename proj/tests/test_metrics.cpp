#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailcast/metrics.hpp"

using namespace tailcast;

namespace {

// Definitional oracle: smallest error e in the sample such that
// P(E > e) <= 1 - alpha.
double var_bruteforce(std::vector<double> values, double alpha) {
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    for (double e : values) {
        const auto greater = static_cast<double>(
            std::count_if(values.begin(), values.end(), [&](double x) { return x > e; }));
        if (greater / n <= 1.0 - alpha) return e;
    }
    return values.back();
}

std::vector<double> iota_sample(int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

}  // namespace

TEST_CASE("per-example errors") {
    const double t[] = {1.0, 2.0, 3.0};
    const double p_same[] = {1.0, 2.0, 3.0};
    const double p_double[] = {2.0, 4.0, 6.0};
    for (auto kind : {ErrorKind::Nd, ErrorKind::Nrmse, ErrorKind::Mae}) {
        CHECK(per_example_error(p_same, t, kind) == 0.0);
    }
    CHECK(per_example_error(p_double, t, ErrorKind::Nd) == doctest::Approx(1.0));

    const double zeros[] = {0.0, 0.0};
    const double p2[] = {1.0, 1.0};
    CHECK_THROWS_AS(per_example_error(p2, zeros, ErrorKind::Nd), ZeroDenominator);
    CHECK_THROWS_AS(per_example_error(p2, zeros, ErrorKind::Nrmse), ZeroDenominator);
    CHECK(per_example_error(p2, zeros, ErrorKind::Mae) == doctest::Approx(1.0));

    const double short_pred[] = {1.0};
    CHECK_THROWS_AS(per_example_error(short_pred, t, ErrorKind::Nd), LengthMismatch);
}

TEST_CASE("nd and nrmse are scale invariant") {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> pred(8), tgt(8);
        for (int j = 0; j < 8; ++j) {
            pred[static_cast<std::size_t>(j)] = rng.normal();
            tgt[static_cast<std::size_t>(j)] = rng.normal() + 2.0;
        }
        const double scale = 0.001 + 100.0 * rng.next_double();
        std::vector<double> pred_s = pred, tgt_s = tgt;
        for (auto& x : pred_s) x *= scale;
        for (auto& x : tgt_s) x *= scale;
        for (auto kind : {ErrorKind::Nd, ErrorKind::Nrmse}) {
            CHECK(per_example_error(pred, tgt, kind) ==
                  doctest::Approx(per_example_error(pred_s, tgt_s, kind)).epsilon(1e-9));
        }
    }
}

TEST_CASE("var_alpha nearest-rank examples") {
    const ErrorSample s{iota_sample(100)};
    CHECK(var_alpha(s, 0.95) == 95.0);
    CHECK(var_alpha(s, 0.999) == 100.0);
    CHECK(var_alpha(ErrorSample{{7.5}}, 0.5) == 7.5);
    CHECK(var_alpha(ErrorSample{{7.5}}, 0.99) == 7.5);
    CHECK_THROWS_AS(var_alpha(ErrorSample{{}}, 0.95), EmptySample);
    CHECK_THROWS_AS(var_alpha(s, 0.0), InvalidAlpha);
    CHECK_THROWS_AS(var_alpha(s, 1.0), InvalidAlpha);
}

TEST_CASE("var_alpha equals the brute-force scan") {
    Rng rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.next_u64() % 300;
        std::vector<double> values(n);
        for (auto& v : values) {
            v = rng.next_double() * 10.0;
            if (rng.next_double() < 0.2) v = std::floor(v);  // inject ties
        }
        const ErrorSample s{values};
        for (double alpha : {0.95, 0.98, 0.99}) {
            CHECK(var_alpha(s, alpha) == var_bruteforce(values, alpha));
        }
    }
}

TEST_CASE("var_alpha is monotone in alpha") {
    Rng rng(23);
    std::vector<double> values(500);
    for (auto& v : values) v = rng.normal() * rng.normal();
    for (auto& v : values) v = std::abs(v);
    const ErrorSample s{values};
    double prev = 0.0;
    for (int i = 1; i <= 99; ++i) {
        const double q = var_alpha(s, i / 100.0);
        CHECK(q >= prev);
        prev = q;
    }
}

TEST_CASE("moments") {
    CHECK(moments(ErrorSample{{0.0, 2.0}}).skew == doctest::Approx(0.0));
    CHECK_THROWS_AS(moments(ErrorSample{{1.0, 1.0, 1.0}}), DegenerateSample);
    CHECK_THROWS_AS(moments(ErrorSample{{5.0}}), DegenerateSample);

    // Monte-Carlo oracle: standard normal draws
    Rng rng(31);
    std::vector<double> draws(1000000);
    for (auto& d : draws) d = rng.normal();
    const auto m = moments(ErrorSample{draws});
    CHECK(std::abs(m.skew) <= 0.05);
    CHECK(std::abs(m.kurtosis) <= 0.05);
    CHECK(std::abs(m.mean) <= 0.01);
}

TEST_CASE("tail length") {
    CHECK(tail_length(1.0, 2.0, 4.0, 8.0, 16.0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(tail_length(0.0, 1.0, 2.0, 3.0, 4.0), ZeroDenominator);

    // published electricity / traffic normalized-deviation rows
    CHECK(tail_length(0.0584, 0.0796, 0.2312, 0.4429, 4.1520) ==
          doctest::Approx(15.56).epsilon(0.01 / 15.56));
    CHECK(tail_length(0.1741, 0.6866, 25.5840, 32.1330, 84.1582) ==
          doctest::Approx(45.08).epsilon(0.05 / 45.08));
}

TEST_CASE("tail length of a constant-ratio ladder is four times the ratio") {
    for (double rho : {1.5, 2.0, 3.7}) {
        const double mean = 0.8;
        CHECK(tail_length(mean, mean * rho, mean * rho * rho, mean * rho * rho * rho,
                          mean * rho * rho * rho * rho) == doctest::Approx(4.0 * rho));
    }
}

TEST_CASE("tail report") {
    SUBCASE("1..100") {
        const auto r = build_tail_report(ErrorSample{iota_sample(100)});
        CHECK(r.mean == doctest::Approx(50.5));
        CHECK(r.var95 == 95.0);
        CHECK(r.var98 == 98.0);
        CHECK(r.var99 == 99.0);
        CHECK(r.max == 100.0);
        REQUIRE(r.tail_length.has_value());
        CHECK(*r.tail_length == doctest::Approx(95.0 / 50.5 + 98.0 / 95.0 + 99.0 / 98.0 +
                                                100.0 / 99.0));
        CHECK(r.skew.has_value());
        CHECK(r.kurtosis.has_value());
    }
    SUBCASE("repeated value flags the moment fields") {
        const auto r = build_tail_report(ErrorSample{{2.5, 2.5, 2.5}});
        CHECK(r.mean == 2.5);
        CHECK(r.var95 == 2.5);
        CHECK(r.var98 == 2.5);
        CHECK(r.var99 == 2.5);
        CHECK(r.max == 2.5);
        CHECK_FALSE(r.skew.has_value());
        CHECK_FALSE(r.kurtosis.has_value());
        REQUIRE(r.tail_length.has_value());
        CHECK(*r.tail_length == doctest::Approx(4.0));
    }
    SUBCASE("all-zero errors leave tail_length unset") {
        const auto r = build_tail_report(ErrorSample{{0.0, 0.0}});
        CHECK(r.mean == 0.0);
        CHECK_FALSE(r.tail_length.has_value());
    }
    SUBCASE("quantile ordering holds on random samples") {
        Rng rng(41);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = 1 + rng.next_u64() % 200;
            std::vector<double> values(n);
            for (auto& v : values) v = std::abs(rng.normal()) * (1.0 + 10.0 * rng.next_double());
            const auto r = build_tail_report(ErrorSample{values});
            CHECK(r.var95 <= r.var98);
            CHECK(r.var98 <= r.var99);
            CHECK(r.var99 <= r.max);
        }
    }
}

TEST_CASE("log-log histogram") {
    SUBCASE("one value per geometric bin") {
        const double v[] = {1.0, 10.0, 100.0};
        const auto h = loglog_histogram(v, 3);
        REQUIRE(h.counts.size() == 4);
        CHECK(h.counts[0] == 0);  // underflow
        CHECK(h.counts[1] == 1);
        CHECK(h.counts[2] == 1);
        CHECK(h.counts[3] == 1);
        CHECK(h.lower_edges[1] == doctest::Approx(1.0));
        CHECK(h.lower_edges[2] == doctest::Approx(std::pow(100.0, 1.0 / 3.0)));
    }
    SUBCASE("zeros go to the underflow bin and counts always total n") {
        Rng rng(47);
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 1 + rng.next_u64() % 500;
            std::vector<double> values(n);
            for (auto& v : values) {
                v = rng.next_double() < 0.1 ? 0.0 : std::exp(4.0 * rng.normal());
            }
            const auto h = loglog_histogram(values, 2 + static_cast<int>(rng.next_u64() % 30));
            std::int64_t total = 0;
            for (auto c : h.counts) total += c;
            CHECK(total == static_cast<std::int64_t>(n));
        }
    }
    SUBCASE("single-decade data lands in one bin when bins span decades") {
        const double v[] = {2.0, 2.5, 3.0, 3.5};
        const auto h = loglog_histogram(v, 2);
        CHECK(h.counts[0] == 0);
        CHECK(h.counts[1] + h.counts[2] == 4);
    }
    SUBCASE("degenerate all-equal input") {
        const double v[] = {5.0, 5.0, 5.0};
        const auto h = loglog_histogram(v, 4);
        CHECK(h.counts[1] == 3);
    }
    CHECK_THROWS_AS(loglog_histogram(std::vector<double>{}, 4), EmptySample);
    CHECK_THROWS_AS(loglog_histogram(std::vector<double>{1.0}, 1), InvalidParams);
}
