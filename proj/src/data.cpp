#include "tailcast/data.hpp"

#include <cmath>
#include <cstdio>

namespace tailcast {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void WindowSpec::validate() const {
    if (k < 1 || h < 1) {
        throw InvalidParams("WindowSpec: k and h must be >= 1, got k=" + std::to_string(k) +
                            " h=" + std::to_string(h));
    }
}

std::vector<double> sine_series(double theta, double nu, int length) {
    if (length < 1) throw InvalidParams("sine_series: length must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) {
        out[static_cast<std::size_t>(t)] = std::sin(kTwoPi * nu * static_cast<double>(t) + theta);
    }
    return out;
}

SeriesSet gen_sine(int n_series, int length, std::uint64_t seed) {
    if (n_series < 1) throw InvalidParams("gen_sine: n_series must be >= 1");
    Rng rng(seed);
    SeriesSet set;
    set.frequency = "synthetic";
    set.series.reserve(static_cast<std::size_t>(n_series));
    for (int i = 0; i < n_series; ++i) {
        const double theta = rng.next_double();
        const double nu = rng.next_double();
        set.series.push_back(sine_series(theta, nu, length));
        char name[32];
        std::snprintf(name, sizeof(name), "series_%03d", i);
        set.names.emplace_back(name);
    }
    return set;
}

double pareto_draw(Rng& rng, double shape, double scale) {
    return scale * std::pow(rng.next_open_double(), -1.0 / shape);
}

SeriesSet gen_ar1(NoiseKind noise, double phi, int n_series, int length, std::uint64_t seed) {
    if (n_series < 1 || length < 1) throw InvalidParams("gen_ar1: n_series and length must be >= 1");
    if (!(std::abs(phi) < 1.0)) {
        throw InvalidParams("gen_ar1: |phi| must be < 1 for stationarity, got " + format_full(phi));
    }
    Rng rng(seed);
    auto draw = [&]() {
        if (noise == NoiseKind::Gaussian) return 1.0 + rng.normal();
        return pareto_draw(rng, 10.0, 1.0);
    };
    SeriesSet set;
    set.frequency = "synthetic";
    set.series.reserve(static_cast<std::size_t>(n_series));
    for (int i = 0; i < n_series; ++i) {
        std::vector<double> y(static_cast<std::size_t>(length));
        y[0] = draw();
        for (int t = 1; t < length; ++t) {
            y[static_cast<std::size_t>(t)] = phi * y[static_cast<std::size_t>(t - 1)] + draw();
        }
        set.series.push_back(std::move(y));
        char name[32];
        std::snprintf(name, sizeof(name), "series_%03d", i);
        set.names.emplace_back(name);
    }
    return set;
}

WindowedDataset window(const SeriesSet& set, WindowSpec spec, int stride) {
    spec.validate();
    if (stride < 1) throw InvalidParams("window: stride must be >= 1");
    WindowedDataset ds;
    ds.spec = spec;
    ds.series_lengths.reserve(set.series.size());
    const int total = spec.k + spec.h;
    for (std::size_t s = 0; s < set.series.size(); ++s) {
        const auto& y = set.series[s];
        const int len = static_cast<int>(y.size());
        ds.series_lengths.push_back(len);
        if (len < total) {
            ++ds.skipped_series;
            continue;
        }
        for (int start = 0; start + total <= len; start += stride) {
            WindowedExample ex;
            ex.series_id = static_cast<int>(s);
            ex.start = start;
            ex.history.assign(y.begin() + start, y.begin() + start + spec.k);
            ex.target.assign(y.begin() + start + spec.k, y.begin() + start + total);
            ds.examples.push_back(std::move(ex));
        }
    }
    return ds;
}

SplitBoundary SplitBoundary::fraction(double f) {
    SplitBoundary b;
    b.is_fraction = true;
    b.frac = f;
    return b;
}

SplitBoundary SplitBoundary::index(int i) {
    SplitBoundary b;
    b.is_fraction = false;
    b.idx = i;
    return b;
}

SplitResult train_test_split(const WindowedDataset& dataset, SplitBoundary boundary) {
    if (boundary.is_fraction && (!(boundary.frac >= 0.0) || !(boundary.frac <= 1.0))) {
        throw InvalidBoundary("train_test_split: fraction must be in [0, 1], got " +
                              format_full(boundary.frac));
    }
    SplitResult out;
    out.train.spec = dataset.spec;
    out.test.spec = dataset.spec;
    out.train.series_lengths = dataset.series_lengths;
    out.test.series_lengths = dataset.series_lengths;
    const int k = dataset.spec.k;
    const int h = dataset.spec.h;
    for (const auto& ex : dataset.examples) {
        const int len = dataset.series_lengths.at(static_cast<std::size_t>(ex.series_id));
        int cut;
        if (boundary.is_fraction) {
            cut = static_cast<int>(boundary.frac * static_cast<double>(len));
        } else {
            cut = boundary.idx;
            if (cut < 0 || cut > len) {
                throw InvalidBoundary("train_test_split: index " + std::to_string(cut) +
                                      " outside series of length " + std::to_string(len));
            }
        }
        if (ex.start + k + h <= cut) {
            out.train.examples.push_back(ex);
        } else if (ex.start + k >= cut) {
            out.test.examples.push_back(ex);
        }
        // windows straddling the boundary are dropped
    }
    return out;
}

}  // namespace tailcast
