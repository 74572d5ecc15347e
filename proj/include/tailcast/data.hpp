#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailcast/common.hpp"

namespace tailcast {

struct SeriesSet {
    std::vector<std::vector<double>> series;
    std::vector<std::string> names;
    std::string frequency;  // sampling-interval label, informational
};

struct WindowSpec {
    int k = 8;  // history length
    int h = 8;  // horizon length

    void validate() const;
};

struct WindowedExample {
    std::vector<double> history;  // length k
    std::vector<double> target;   // length h
    int series_id = 0;
    int start = 0;  // index of the first history step in the source series
};

struct WindowedDataset {
    std::vector<WindowedExample> examples;
    WindowSpec spec;
    std::vector<int> series_lengths;  // source lengths, indexed by series_id
    int skipped_series = 0;           // series shorter than k + h
};

// One deterministic sine series: sin(2*pi*nu*t + theta), t = 0..length-1.
std::vector<double> sine_series(double theta, double nu, int length);

// Sine set: per-series offset theta ~ U[0,1] and frequency nu ~ U[0,1].
SeriesSet gen_sine(int n_series, int length, std::uint64_t seed);

enum class NoiseKind { Gaussian, Pareto };

// AR(1) noise sets: y_0 = e_0, y_t = phi*y_{t-1} + e_t. Gaussian noise is
// N(1, 1). Pareto noise is classic Pareto with shape 10 and scale 1:
// pdf a*s^a / x^(a+1) on x >= s, sampled as s*u^(-1/a).
SeriesSet gen_ar1(NoiseKind noise, double phi, int n_series, int length, std::uint64_t seed);

// Single draw, exposed for distribution-level tests.
double pareto_draw(Rng& rng, double shape, double scale);

// All maximal (history, horizon) windows per series at the given stride.
WindowedDataset window(const SeriesSet& set, WindowSpec spec, int stride);

// Chronological split boundary: a fraction of each series' length or an
// absolute time index.
struct SplitBoundary {
    static SplitBoundary fraction(double f);
    static SplitBoundary index(int i);
    bool is_fraction = true;
    double frac = 0.8;
    int idx = 0;
};

// Train keeps windows whose target ends by the boundary; test keeps windows
// whose target starts at or after it. Windows straddling the boundary are
// dropped, so no step is ever a training target and a test target.
struct SplitResult {
    WindowedDataset train;
    WindowedDataset test;
};
SplitResult train_test_split(const WindowedDataset& dataset, SplitBoundary boundary);

}  // namespace tailcast
