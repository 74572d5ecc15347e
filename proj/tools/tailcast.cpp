#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailcast/commands.hpp"

namespace {

tailcast::RunConfig resolve_config(const std::string& config_path,
                                   const std::optional<std::uint64_t>& seed,
                                   const std::string& out_dir) {
    tailcast::RunConfig cfg = tailcast::load_run_config(config_path);
    if (seed) {
        cfg.seed = *seed;
        cfg.train.seed = *seed;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tailcast: probabilistic time-series forecasting with tail-aware losses"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string checkpoint_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> report_files;

    auto* generate = app.add_subcommand("generate", "write a synthetic dataset CSV + manifest");
    generate->add_option("--config", config_path, "run config JSON")->required();
    generate->add_option("--seed", seed, "override config seed");
    generate->add_option("--out", out_dir, "override output directory");

    auto* train = app.add_subcommand("train", "train a model, write checkpoint + diagnostics");
    train->add_option("--config", config_path, "run config JSON")->required();
    train->add_option("--seed", seed, "override config seed");
    train->add_option("--out", out_dir, "override output directory");
    train->add_option("--checkpoint", checkpoint_path, "resume from this checkpoint");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
    evaluate->add_option("--config", config_path, "run config JSON")->required();
    evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint to evaluate")->required();
    evaluate->add_option("--seed", seed, "override config seed");
    evaluate->add_option("--out", out_dir, "override output directory");

    auto* compare = app.add_subcommand("compare", "mark better/best across tail reports");
    compare->add_option("reports", report_files, "tail report JSON files (first is the baseline)")
        ->required()
        ->expected(2, -1);
    compare->add_option("--out", out_dir, "output directory for comparison.txt");

    auto* study = app.add_subcommand("study", "run the synthetic 2-model x 3-dataset study");
    study->add_option("--seed", seed, "study seed (default 0)");
    study->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            tailcast::cmd_generate(resolve_config(config_path, seed, out_dir));
        } else if (train->parsed()) {
            tailcast::cmd_train(resolve_config(config_path, seed, out_dir), checkpoint_path);
        } else if (evaluate->parsed()) {
            tailcast::cmd_evaluate(resolve_config(config_path, seed, out_dir), checkpoint_path);
        } else if (compare->parsed()) {
            const auto table = tailcast::cmd_compare(report_files, out_dir);
            std::cout << table.render();
        } else if (study->parsed()) {
            tailcast::cmd_study(seed.value_or(0), out_dir);
        }
    } catch (const tailcast::InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
