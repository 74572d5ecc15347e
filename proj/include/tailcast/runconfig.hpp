#pragma once

#include <optional>
#include <string>

#include "tailcast/csv.hpp"
#include "tailcast/data.hpp"
#include "tailcast/metrics.hpp"
#include "tailcast/trainer.hpp"

#include <json.hpp>

namespace tailcast {

enum class DatasetKind { Sine, Gaussian, Pareto, Csv };

std::string dataset_kind_name(DatasetKind kind);
DatasetKind dataset_kind_from_name(const std::string& name);

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Sine;
    // synthetic
    int n_series = 100;
    int length = 960;
    double phi = 0.5;  // AR(1) sets
    // csv
    std::string path;
    CsvLayout layout = CsvLayout::Wide;
    std::optional<double> downsample_to;
    Aggregator aggregator = Aggregator::Mean;
};

struct WindowConfig {
    int k = 8;
    int h = 8;
    int stride = 1;
    // exactly one of the two boundary forms
    std::optional<double> split_fraction = 0.8;
    std::optional<int> split_index;

    SplitBoundary boundary() const;
};

enum class ModelKindConfig { Ar, Rnn };

struct ModelConfig {
    ModelKindConfig kind = ModelKindConfig::Rnn;
    int order = 8;         // ar
    int hidden_size = 32;  // rnn
};

struct ReportConfig {
    ErrorKind metric = ErrorKind::Nd;
    std::vector<double> var_levels{0.95, 0.98, 0.99};
    int histogram_bins = 40;
};

// Declarative run description; every command resolves one of these. Unknown
// keys anywhere in the file are rejected.
struct RunConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    DatasetConfig dataset;
    WindowConfig window;
    ModelConfig model;
    TrainConfig train;
    ReportConfig report;

    // Blocks explicitly present in the file (commands require the ones they
    // consume).
    bool has_dataset = false;
    bool has_window = false;
    bool has_model = false;
    bool has_train = false;
    bool has_report = false;
};

RunConfig parse_run_config(const nlohmann::ordered_json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

// Materializes the configured dataset (generating or loading CSV).
SeriesSet resolve_dataset(const DatasetConfig& dataset, std::uint64_t seed);

}  // namespace tailcast
