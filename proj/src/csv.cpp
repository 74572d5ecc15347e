#include "tailcast/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

namespace tailcast {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(pos)));
            break;
        }
        cells.push_back(trim(line.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    if (cell.empty()) {
        throw ParseError("csv: missing numeric cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    }
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("csv: cannot parse '" + cell + "' at row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    }
    return value;
}

void check_monotone(const std::vector<double>& ts, const std::string& what) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) {
            throw NonMonotoneTimestamps("csv: timestamps not strictly increasing for " + what +
                                        " near entry " + std::to_string(i));
        }
    }
}

std::vector<double> downsample(const std::vector<double>& values, const std::vector<double>& ts,
                               double interval, Aggregator agg, const std::string& what) {
    if (!(interval > 0.0)) throw InvalidParams("csv: downsample interval must be positive");
    if (ts.size() < 2) {
        throw InvalidParams("csv: need at least 2 rows to infer spacing for downsampling");
    }
    const double spacing = ts[1] - ts[0];
    for (std::size_t i = 2; i < ts.size(); ++i) {
        if (std::abs((ts[i] - ts[i - 1]) - spacing) > 1e-9 * std::max(1.0, std::abs(spacing))) {
            throw InvalidParams("csv: non-uniform spacing in " + what +
                                "; downsampling requires a regular grid");
        }
    }
    const double ratio = interval / spacing;
    const auto group = static_cast<std::size_t>(ratio + 0.5);
    if (group < 1 || std::abs(ratio - static_cast<double>(group)) > 1e-9) {
        throw InvalidParams("csv: downsample interval must be an integer multiple of the spacing");
    }
    std::vector<double> out;
    out.reserve(values.size() / group);
    for (std::size_t i = 0; i + group <= values.size(); i += group) {
        double acc = 0.0;
        for (std::size_t j = 0; j < group; ++j) acc += values[i + j];
        out.push_back(agg == Aggregator::Mean ? acc / static_cast<double>(group) : acc);
    }
    if (out.empty()) throw InvalidParams("csv: downsampling left no complete group");
    return out;
}

}  // namespace

std::string csv_layout_name(CsvLayout layout) {
    return layout == CsvLayout::Wide ? "wide" : "long";
}

CsvLayout csv_layout_from_name(const std::string& name) {
    if (name == "wide") return CsvLayout::Wide;
    if (name == "long") return CsvLayout::Long;
    throw InvalidParams("unknown csv layout: " + name);
}

std::string aggregator_name(Aggregator agg) { return agg == Aggregator::Mean ? "mean" : "sum"; }

Aggregator aggregator_from_name(const std::string& name) {
    if (name == "mean") return Aggregator::Mean;
    if (name == "sum") return Aggregator::Sum;
    throw InvalidParams("unknown aggregator: " + name);
}

SeriesSet load_csv(const std::string& path, const CsvLoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty file " + path);
    const auto header = split_row(line);

    SeriesSet set;
    if (options.layout == CsvLayout::Wide) {
        if (header.size() < 2) {
            throw ParseError("csv: wide layout needs a timestamp column plus series columns");
        }
        const std::size_t n_series = header.size() - 1;
        set.names.assign(header.begin() + 1, header.end());
        std::vector<double> timestamps;
        std::vector<std::vector<double>> columns(n_series);
        std::size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (trim(line).empty()) continue;
            const auto cells = split_row(line);
            if (cells.size() != header.size()) {
                throw ParseError("csv: row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(header.size()));
            }
            timestamps.push_back(parse_cell(cells[0], row, 1));
            for (std::size_t c = 0; c < n_series; ++c) {
                columns[c].push_back(parse_cell(cells[c + 1], row, c + 2));
            }
        }
        if (timestamps.empty()) throw ParseError("csv: no data rows in " + path);
        check_monotone(timestamps, "file");
        if (options.downsample_to) {
            for (std::size_t c = 0; c < n_series; ++c) {
                columns[c] = downsample(columns[c], timestamps, *options.downsample_to,
                                        options.aggregator, set.names[c]);
            }
        }
        set.series = std::move(columns);
    } else {
        if (header.size() != 3) {
            throw ParseError("csv: long layout needs exactly series_id,timestamp,value columns");
        }
        // preserve first-appearance order of series ids
        std::map<std::string, std::size_t> index;
        std::vector<std::vector<double>> timestamps;
        std::size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (trim(line).empty()) continue;
            const auto cells = split_row(line);
            if (cells.size() != 3) {
                throw ParseError("csv: row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, expected 3");
            }
            const std::string& id = cells[0];
            auto it = index.find(id);
            if (it == index.end()) {
                it = index.emplace(id, set.names.size()).first;
                set.names.push_back(id);
                set.series.emplace_back();
                timestamps.emplace_back();
            }
            timestamps[it->second].push_back(parse_cell(cells[1], row, 2));
            set.series[it->second].push_back(parse_cell(cells[2], row, 3));
        }
        if (set.series.empty()) throw ParseError("csv: no data rows in " + path);
        for (std::size_t s = 0; s < set.series.size(); ++s) {
            check_monotone(timestamps[s], set.names[s]);
            if (options.downsample_to) {
                set.series[s] = downsample(set.series[s], timestamps[s], *options.downsample_to,
                                           options.aggregator, set.names[s]);
            }
        }
    }
    if (options.downsample_to) {
        set.frequency = format_full(*options.downsample_to);
    }
    return set;
}

void write_wide_csv(const std::string& path, const SeriesSet& set) {
    if (set.series.empty()) throw InvalidParams("write_wide_csv: empty series set");
    const std::size_t len = set.series.front().size();
    for (const auto& s : set.series) {
        if (s.size() != len) {
            throw InvalidParams("write_wide_csv: wide layout requires equal-length series");
        }
    }
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    out << "timestamp";
    for (const auto& name : set.names) out << ',' << name;
    out << '\n';
    for (std::size_t t = 0; t < len; ++t) {
        out << t;
        for (const auto& s : set.series) out << ',' << format_full(s[t]);
        out << '\n';
    }
    if (!out) throw IoError("csv: write failed for " + path);
}

void write_long_csv(const std::string& path, const SeriesSet& set) {
    if (set.series.empty()) throw InvalidParams("write_long_csv: empty series set");
    std::ofstream out(path);
    if (!out) throw IoError("csv: cannot write " + path);
    out << "series_id,timestamp,value\n";
    for (std::size_t s = 0; s < set.series.size(); ++s) {
        for (std::size_t t = 0; t < set.series[s].size(); ++t) {
            out << set.names[s] << ',' << t << ',' << format_full(set.series[s][t]) << '\n';
        }
    }
    if (!out) throw IoError("csv: write failed for " + path);
}

}  // namespace tailcast
