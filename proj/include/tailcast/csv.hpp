#pragma once

#include <optional>
#include <string>

#include "tailcast/data.hpp"

namespace tailcast {

enum class CsvLayout { Wide, Long };
enum class Aggregator { Mean, Sum };

std::string csv_layout_name(CsvLayout layout);
CsvLayout csv_layout_from_name(const std::string& name);
std::string aggregator_name(Aggregator agg);
Aggregator aggregator_from_name(const std::string& name);

struct CsvLoadOptions {
    CsvLayout layout = CsvLayout::Wide;
    // Downsample to this timestamp interval (same units as the timestamp
    // column). Requires uniform source spacing; complete groups only,
    // trailing remainders are dropped.
    std::optional<double> downsample_to;
    Aggregator aggregator = Aggregator::Mean;
};

// Wide layout: header `timestamp,<name>,<name>,...`, one numeric row per
// time step. Long layout: header `series_id,timestamp,value`, rows grouped
// by series in file order. Timestamps are numeric and must be strictly
// increasing per series.
SeriesSet load_csv(const std::string& path, const CsvLoadOptions& options);

// Writers for the same two layouts (timestamps 0..len-1). Generated sets
// export as wide CSV so they can be fed back through load_csv.
void write_wide_csv(const std::string& path, const SeriesSet& set);
void write_long_csv(const std::string& path, const SeriesSet& set);

}  // namespace tailcast
