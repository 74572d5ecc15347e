#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tailcast/runconfig.hpp"
#include "tailcast/study.hpp"

namespace tailcast {

// TailReport <-> flat 8-field record.
nlohmann::ordered_json tail_report_to_json(const TailReport& report);
TailReport tail_report_from_json(const nlohmann::ordered_json& j);
std::string tail_report_csv(const TailReport& report);  // header + one row

// Writes `data.csv` (wide layout) and `manifest.json` into the output
// directory. Byte-identical for identical config + seed.
void cmd_generate(const RunConfig& config);

// Trains (or closed-form fits) the configured model on the train split and
// writes `checkpoint.tc`, `diagnostics.csv`, and `config_snapshot.json`.
// A nonempty resume path continues a previous run to config.train.epochs.
void cmd_train(const RunConfig& config, const std::string& resume_checkpoint = "");

// Evaluates a checkpoint on the test split and writes `tail_report.json`,
// `tail_report.csv`, `errors.csv`, `error_histogram.csv`, `quantiles.csv`,
// and `config_snapshot.json`.
void cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path);

// Comparison of tail reports against the first (baseline) file; lower is
// better in every column.
struct CompareTable {
    static constexpr std::array<const char*, 8> kColumns = {
        "mean", "var95", "var98", "var99", "max", "kurtosis", "skew", "tail_length"};
    std::string metric;
    std::vector<std::string> labels;
    std::vector<std::array<std::optional<double>, 8>> values;
    std::vector<std::array<bool, 8>> better;  // strictly lower than baseline
    std::vector<std::array<bool, 8>> best;    // column minimum (ties all marked)

    std::string render() const;  // 4-decimal text table with +/* marks
};
CompareTable cmd_compare(const std::vector<std::string>& report_files,
                         const std::string& out_dir);

// Runs the synthetic study and writes the bundle: 3 label histograms,
// 6 error histograms, 6 tail reports, and a summary grid.
StudyReport cmd_study(std::uint64_t seed, const std::string& out_dir,
                      const StudyConfig& study_config = {});

}  // namespace tailcast
