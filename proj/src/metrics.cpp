#include "tailcast/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace tailcast {

std::string error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Nd: return "nd";
        case ErrorKind::Nrmse: return "nrmse";
        case ErrorKind::Mae: return "mae";
    }
    throw InvalidParams("unknown error kind");
}

ErrorKind error_kind_from_name(const std::string& name) {
    if (name == "nd") return ErrorKind::Nd;
    if (name == "nrmse") return ErrorKind::Nrmse;
    if (name == "mae") return ErrorKind::Mae;
    throw InvalidParams("unknown error kind: " + name);
}

double per_example_error(std::span<const double> pred_means, std::span<const double> target,
                         ErrorKind kind) {
    if (pred_means.size() != target.size() || target.empty()) {
        throw LengthMismatch("per_example_error: horizon lengths differ");
    }
    const double h = static_cast<double>(target.size());
    double abs_err = 0.0, sq_err = 0.0, abs_tgt = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) {
        const double d = pred_means[j] - target[j];
        abs_err += std::abs(d);
        sq_err += d * d;
        abs_tgt += std::abs(target[j]);
    }
    switch (kind) {
        case ErrorKind::Mae:
            return abs_err / h;
        case ErrorKind::Nd:
            if (abs_tgt == 0.0) throw ZeroDenominator("per_example_error: all-zero target window");
            return abs_err / abs_tgt;
        case ErrorKind::Nrmse:
            if (abs_tgt == 0.0) throw ZeroDenominator("per_example_error: all-zero target window");
            return std::sqrt(sq_err / h) / (abs_tgt / h);
    }
    throw InvalidParams("per_example_error: unknown kind");
}

double var_alpha(const ErrorSample& errors, double alpha) {
    if (errors.values.empty()) throw EmptySample("var_alpha: empty sample");
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw InvalidAlpha("var_alpha: alpha must be in (0, 1), got " + format_full(alpha));
    }
    std::vector<double> sorted(errors.values);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::size_t idx = static_cast<std::size_t>(std::ceil(alpha * n));
    if (idx == 0) idx = 1;
    idx = std::min(idx, sorted.size());
    return sorted[idx - 1];
}

Moments moments(const ErrorSample& errors) {
    const auto& v = errors.values;
    if (v.size() < 2) throw DegenerateSample("moments: need at least 2 values");
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (!(m2 > 0.0)) throw DegenerateSample("moments: zero variance");
    Moments out;
    out.mean = mean;
    out.skew = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2) - 3.0;
    return out;
}

double tail_length(double mean, double var95, double var98, double var99, double max) {
    if (!(mean > 0.0) || !(var95 > 0.0) || !(var98 > 0.0) || !(var99 > 0.0)) {
        throw ZeroDenominator("tail_length: all quantile inputs must be positive");
    }
    return var95 / mean + var98 / var95 + var99 / var98 + max / var99;
}

TailReport build_tail_report(const ErrorSample& errors) {
    if (errors.values.empty()) throw EmptySample("build_tail_report: empty sample");
    for (double x : errors.values) {
        if (!(x >= 0.0)) throw InvalidParams("build_tail_report: errors must be nonnegative");
    }
    TailReport r;
    double sum = 0.0;
    for (double x : errors.values) sum += x;
    r.mean = sum / static_cast<double>(errors.values.size());
    r.var95 = var_alpha(errors, 0.95);
    r.var98 = var_alpha(errors, 0.98);
    r.var99 = var_alpha(errors, 0.99);
    r.max = *std::max_element(errors.values.begin(), errors.values.end());
    try {
        const Moments m = moments(errors);
        r.skew = m.skew;
        r.kurtosis = m.kurtosis;
    } catch (const DegenerateSample&) {
        // constant or single-value sample: skew/kurtosis undefined
    }
    try {
        r.tail_length = tail_length(r.mean, r.var95, r.var98, r.var99, r.max);
    } catch (const ZeroDenominator&) {
    }
    return r;
}

LogLogHistogram loglog_histogram(std::span<const double> values, int bin_count) {
    if (values.empty()) throw EmptySample("loglog_histogram: empty input");
    if (bin_count < 2) throw InvalidParams("loglog_histogram: bin_count must be >= 2");

    double min_pos = 0.0, max_pos = 0.0;
    std::int64_t underflow = 0;
    for (double x : values) {
        if (x > 0.0) {
            if (min_pos == 0.0 || x < min_pos) min_pos = x;
            if (x > max_pos) max_pos = x;
        } else {
            ++underflow;
        }
    }

    LogLogHistogram hist;
    hist.lower_edges.assign(static_cast<std::size_t>(bin_count) + 1, 0.0);
    hist.counts.assign(static_cast<std::size_t>(bin_count) + 1, 0);
    hist.counts[0] = underflow;
    if (min_pos == 0.0) return hist;  // no positive values

    const double ratio = max_pos > min_pos
                             ? std::pow(max_pos / min_pos, 1.0 / static_cast<double>(bin_count))
                             : 1.0;
    for (int b = 0; b < bin_count; ++b) {
        hist.lower_edges[static_cast<std::size_t>(b) + 1] =
            min_pos * std::pow(ratio, static_cast<double>(b));
    }

    for (double x : values) {
        if (!(x > 0.0)) continue;
        int b;
        if (max_pos == min_pos) {
            b = 0;
        } else if (x >= max_pos) {
            b = bin_count - 1;  // last bin is closed on the right
        } else {
            b = static_cast<int>(std::floor(std::log(x / min_pos) / std::log(ratio)));
            b = std::clamp(b, 0, bin_count - 1);
            // guard rounding at bin boundaries: keep bins right-open
            while (b > 0 && x < hist.lower_edges[static_cast<std::size_t>(b) + 1]) --b;
            while (b < bin_count - 1 && x >= hist.lower_edges[static_cast<std::size_t>(b) + 2]) ++b;
        }
        ++hist.counts[static_cast<std::size_t>(b) + 1];
    }
    return hist;
}

}  // namespace tailcast
