#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailcast/common.hpp"

namespace tailcast {

enum class ErrorKind { Nd, Nrmse, Mae };

std::string error_kind_name(ErrorKind kind);
ErrorKind error_kind_from_name(const std::string& name);

// Nonnegative per-example errors.
struct ErrorSample {
    std::vector<double> values;
};

// Tail summary of an error sample. skew/kurtosis are absent for samples
// with fewer than 2 values or zero variance; tail_length is absent when a
// quantile ratio denominator is zero.
struct TailReport {
    double mean = 0.0;
    double var95 = 0.0;
    double var98 = 0.0;
    double var99 = 0.0;
    double max = 0.0;
    std::optional<double> kurtosis;  // excess (Fisher) convention
    std::optional<double> skew;
    std::optional<double> tail_length;
};

// One scalar error for one forecast window.
//   nd    = sum|pred - target| / sum|target|
//   nrmse = rms(pred - target) / mean|target|
//   mae   = mean|pred - target|
// Throws ZeroDenominator for an all-zero target window (nd/nrmse).
double per_example_error(std::span<const double> pred_means, std::span<const double> target,
                         ErrorKind kind);

// Nearest-rank quantile: sorted ascending, element at index ceil(alpha*n)-1.
double var_alpha(const ErrorSample& errors, double alpha);

struct Moments {
    double mean = 0.0;
    double skew = 0.0;
    double kurtosis = 0.0;  // excess
};

// Population moments; throws DegenerateSample for n < 2 or zero variance.
Moments moments(const ErrorSample& errors);

// VaR95/Mean + VaR98/VaR95 + VaR99/VaR98 + Max/VaR99.
double tail_length(double mean, double var95, double var98, double var99, double max);

TailReport build_tail_report(const ErrorSample& errors);

// Geometric-bin histogram for log-log plots. Bin 0 is an underflow bin with
// lower edge 0 collecting values <= 0; positive values fall into bin_count
// right-open geometric bins spanning [min positive, max], the last bin
// closed. Counts always sum to the input size.
struct LogLogHistogram {
    std::vector<double> lower_edges;  // size bin_count + 1; edge 0 is the underflow bin
    std::vector<std::int64_t> counts;
};
LogLogHistogram loglog_histogram(std::span<const double> values, int bin_count);

}  // namespace tailcast
