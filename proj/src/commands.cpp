#include "tailcast/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace tailcast {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

std::string histogram_csv(const LogLogHistogram& hist) {
    std::ostringstream os;
    os << "bin_lower_edge,count\n";
    for (std::size_t i = 0; i < hist.lower_edges.size(); ++i) {
        os << format_full(hist.lower_edges[i]) << ',' << hist.counts[i] << '\n';
    }
    return os.str();
}

std::string opt_full(const std::optional<double>& v) {
    return v ? format_full(*v) : "nan";
}

ordered_json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

// Split-region prefixes of each series, for fitting the AR baseline.
std::vector<std::vector<double>> train_region(const SeriesSet& set, const WindowConfig& window) {
    std::vector<std::vector<double>> out;
    out.reserve(set.series.size());
    for (const auto& s : set.series) {
        std::size_t cut;
        if (window.split_index) {
            cut = static_cast<std::size_t>(std::clamp(*window.split_index, 0,
                                                      static_cast<int>(s.size())));
        } else {
            cut = static_cast<std::size_t>(*window.split_fraction *
                                           static_cast<double>(s.size()));
        }
        out.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(cut));
    }
    return out;
}

std::string diagnostics_csv(const std::vector<EpochDiagnostics>& rows) {
    std::ostringstream os;
    os << "epoch,mean_base_loss,mean_aux_loss,xi,eta,aux_kurtosis\n";
    for (const auto& d : rows) {
        os << d.epoch << ',' << format_full(d.mean_base_loss) << ','
           << format_full(d.mean_aux_loss) << ',' << format_full(d.xi) << ','
           << format_full(d.eta) << ',' << format_full(d.aux_kurtosis) << '\n';
    }
    return os.str();
}

ordered_json eval_to_json(const EvalResult& eval, ErrorKind metric) {
    ordered_json j;
    j["metric"] = error_kind_name(metric);
    j["excluded_zero_denominator"] = eval.excluded_zero_denominator;
    j["report"] = tail_report_to_json(eval.report);
    return j;
}

void write_eval_files(const std::string& dir, const EvalResult& eval, const ReportConfig& report) {
    write_text(dir + "/tail_report.json", eval_to_json(eval, report.metric).dump(2) + "\n");
    write_text(dir + "/tail_report.csv", tail_report_csv(eval.report));

    std::ostringstream errors;
    errors << "series_id,start,error\n";
    for (const auto& row : eval.rows) {
        errors << row.series_id << ',' << row.start << ',' << format_full(row.error) << '\n';
    }
    write_text(dir + "/errors.csv", errors.str());

    write_text(dir + "/error_histogram.csv",
               histogram_csv(loglog_histogram(eval.errors.values, report.histogram_bins)));

    std::ostringstream quants;
    quants << "alpha,value\n";
    for (double a : report.var_levels) {
        quants << format_full(a) << ',' << format_full(var_alpha(eval.errors, a)) << '\n';
    }
    write_text(dir + "/quantiles.csv", quants.str());
}

}  // namespace

ordered_json tail_report_to_json(const TailReport& r) {
    ordered_json j;
    j["mean"] = r.mean;
    j["var95"] = r.var95;
    j["var98"] = r.var98;
    j["var99"] = r.var99;
    j["max"] = r.max;
    j["kurtosis"] = opt_json(r.kurtosis);
    j["skew"] = opt_json(r.skew);
    j["tail_length"] = opt_json(r.tail_length);
    return j;
}

TailReport tail_report_from_json(const ordered_json& j) {
    TailReport r;
    for (const char* key : {"mean", "var95", "var98", "var99", "max", "kurtosis", "skew",
                            "tail_length"}) {
        if (!j.contains(key)) throw ParseError(std::string("tail report: missing field ") + key);
    }
    r.mean = j.at("mean").get<double>();
    r.var95 = j.at("var95").get<double>();
    r.var98 = j.at("var98").get<double>();
    r.var99 = j.at("var99").get<double>();
    r.max = j.at("max").get<double>();
    if (!j.at("kurtosis").is_null()) r.kurtosis = j.at("kurtosis").get<double>();
    if (!j.at("skew").is_null()) r.skew = j.at("skew").get<double>();
    if (!j.at("tail_length").is_null()) r.tail_length = j.at("tail_length").get<double>();
    return r;
}

std::string tail_report_csv(const TailReport& r) {
    std::ostringstream os;
    os << "mean,var95,var98,var99,max,kurtosis,skew,tail_length\n";
    os << format_full(r.mean) << ',' << format_full(r.var95) << ',' << format_full(r.var98) << ','
       << format_full(r.var99) << ',' << format_full(r.max) << ',' << opt_full(r.kurtosis) << ','
       << opt_full(r.skew) << ',' << opt_full(r.tail_length) << '\n';
    return os.str();
}

void cmd_generate(const RunConfig& config) {
    if (!config.has_dataset) throw InvalidConfig("generate: config needs a dataset block");
    if (config.dataset.kind == DatasetKind::Csv) {
        throw InvalidConfig("generate: dataset kind must be synthetic (sine/gaussian/pareto)");
    }
    ensure_dir(config.output_dir);
    const SeriesSet set = resolve_dataset(config.dataset, config.seed);
    write_wide_csv(config.output_dir + "/data.csv", set);

    ordered_json manifest;
    manifest["seed"] = config.seed;
    manifest["kind"] = dataset_kind_name(config.dataset.kind);
    manifest["n_series"] = config.dataset.n_series;
    manifest["length"] = config.dataset.length;
    if (config.dataset.kind != DatasetKind::Sine) manifest["phi"] = config.dataset.phi;
    write_text(config.output_dir + "/manifest.json", manifest.dump(2) + "\n");
}

void cmd_train(const RunConfig& config, const std::string& resume_checkpoint) {
    if (!config.has_dataset || !config.has_model) {
        throw InvalidConfig("train: config needs dataset and model blocks");
    }
    ensure_dir(config.output_dir);
    const SeriesSet set = resolve_dataset(config.dataset, config.seed);
    const WindowSpec spec{config.window.k, config.window.h};
    const auto split = train_test_split(window(set, spec, config.window.stride),
                                        config.window.boundary());
    if (split.train.examples.empty()) {
        throw InvalidConfig("train: split leaves no training windows");
    }

    Checkpoint ckpt;
    std::vector<EpochDiagnostics> diagnostics;

    if (config.model.kind == ModelKindConfig::Ar) {
        const ArModel model = fit_ar(train_region(set, config.window), config.model.order);
        ckpt.kind = Checkpoint::ModelKind::Ar;
        ckpt.ar = model;

        // single in-sample diagnostics row so AR runs log the same schema
        std::vector<double> base, aux;
        for (const auto& ex : split.train.examples) {
            const auto dist = model.forecast(ex.history, spec.h);
            double nll = 0.0;
            for (int j = 0; j < spec.h; ++j) {
                nll += gaussian_nll(dist.means[static_cast<std::size_t>(j)],
                                    std::max(dist.stds[static_cast<std::size_t>(j)], 1e-12),
                                    ex.target[static_cast<std::size_t>(j)]);
            }
            base.push_back(nll / static_cast<double>(spec.h));
            aux.push_back(mae_loss(dist.means, ex.target));
        }
        EpochDiagnostics d;
        d.epoch = 0;
        d.mean_base_loss = vec_mean(base);
        d.mean_aux_loss = vec_mean(aux);
        d.aux_kurtosis = std::numeric_limits<double>::quiet_NaN();
        try {
            const auto fit = fit_gpd_mom(aux);
            d.xi = fit.params.xi;
            d.eta = fit.params.eta;
        } catch (const DegenerateSample&) {
        }
        try {
            d.aux_kurtosis = moments(ErrorSample{aux}).kurtosis;
        } catch (const DegenerateSample&) {
        }
        diagnostics.push_back(d);
    } else {
        TrainResult result;
        if (!resume_checkpoint.empty()) {
            Checkpoint prev = load_checkpoint(resume_checkpoint);
            if (prev.kind != Checkpoint::ModelKind::Rnn || !prev.has_train_state) {
                throw InvalidConfig("train: resume checkpoint lacks a recurrent training state");
            }
            if (prev.rnn.model.k != spec.k || prev.rnn.model.h != spec.h) {
                throw InvalidConfig("train: resume checkpoint (k,h) does not match config");
            }
            result = train_resume(split.train, prev.rnn, config.train);
        } else {
            const auto init = make_rnn(config.model.hidden_size, spec.k, spec.h,
                                       derive_seed(config.seed, 100));
            result = train(split.train, init, config.train);
        }
        ckpt.kind = Checkpoint::ModelKind::Rnn;
        ckpt.rnn = std::move(result.state);
        ckpt.has_train_state = true;
        diagnostics = std::move(result.diagnostics);
    }

    save_checkpoint(config.output_dir + "/checkpoint.tc", ckpt);
    write_text(config.output_dir + "/diagnostics.csv", diagnostics_csv(diagnostics));
    write_text(config.output_dir + "/config_snapshot.json",
               run_config_to_json(config).dump(2) + "\n");
}

void cmd_evaluate(const RunConfig& config, const std::string& checkpoint_path) {
    if (!config.has_dataset) throw InvalidConfig("evaluate: config needs a dataset block");
    ensure_dir(config.output_dir);
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);

    const SeriesSet set = resolve_dataset(config.dataset, config.seed);
    const WindowSpec spec{config.window.k, config.window.h};
    const auto split = train_test_split(window(set, spec, config.window.stride),
                                        config.window.boundary());
    if (split.test.examples.empty()) {
        throw InvalidConfig("evaluate: split leaves no test windows");
    }

    EvalResult eval;
    if (ckpt.kind == Checkpoint::ModelKind::Ar) {
        eval = evaluate(ckpt.ar, split.test, config.report.metric);
    } else {
        if (ckpt.rnn.model.k != spec.k) {
            throw InvalidConfig("evaluate: checkpoint history length k=" +
                                std::to_string(ckpt.rnn.model.k) +
                                " does not match window config k=" + std::to_string(spec.k));
        }
        eval = evaluate(ckpt.rnn.model, split.test, config.report.metric);
    }

    write_eval_files(config.output_dir, eval, config.report);
    write_text(config.output_dir + "/config_snapshot.json",
               run_config_to_json(config).dump(2) + "\n");

    // internal consistency: the emitted quantile fields must reproduce the
    // emitted tail length
    if (eval.report.tail_length) {
        const double recomputed = tail_length(eval.report.mean, eval.report.var95,
                                              eval.report.var98, eval.report.var99,
                                              eval.report.max);
        if (std::abs(recomputed - *eval.report.tail_length) > 1e-9) {
            throw Error("evaluate: tail_length consistency check failed");
        }
    }
}

std::string CompareTable::render() const {
    std::ostringstream os;
    os << "# metric: " << metric << "\n";
    os << "# marks: + better than baseline (lower), * best in column\n";
    std::size_t width = 12;
    for (const auto& l : labels) width = std::max(width, l.size() + 2);

    os << std::string(width, ' ');
    for (const auto* col : kColumns) {
        std::string head(col);
        os << head << std::string(head.size() < 14 ? 14 - head.size() : 1, ' ');
    }
    os << '\n';
    for (std::size_t rn = 0; rn < labels.size(); ++rn) {
        std::string label = labels[rn];
        label.resize(width, ' ');
        os << label;
        for (std::size_t c = 0; c < kColumns.size(); ++c) {
            std::string cell = values[rn][c] ? format_fixed4(*values[rn][c]) : "nan";
            if (better[rn][c]) cell += '+';
            if (best[rn][c]) cell += '*';
            cell.resize(14, ' ');
            os << cell;
        }
        os << '\n';
    }
    return os.str();
}

CompareTable cmd_compare(const std::vector<std::string>& report_files,
                         const std::string& out_dir) {
    if (report_files.size() < 2) {
        throw InvalidConfig("compare: need at least 2 report files");
    }
    CompareTable table;
    for (const auto& path : report_files) {
        std::ifstream in(path);
        if (!in) throw IoError("compare: cannot open " + path);
        ordered_json j;
        try {
            j = ordered_json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("compare: " + path + " is not valid JSON: " + e.what());
        }
        if (!j.contains("metric") || !j.contains("report")) {
            throw ParseError("compare: " + path + " lacks metric/report fields");
        }
        const std::string metric = j.at("metric").get<std::string>();
        if (table.metric.empty()) {
            table.metric = metric;
        } else if (metric != table.metric) {
            throw MetricKindMismatch("compare: " + path + " reports metric '" + metric +
                                     "', expected '" + table.metric + "'");
        }
        const TailReport r = tail_report_from_json(j.at("report"));
        table.labels.push_back(fs::path(path).filename().string());
        table.values.push_back({r.mean, r.var95, r.var98, r.var99, r.max, r.kurtosis, r.skew,
                                r.tail_length});
    }

    const std::size_t rows = table.values.size();
    table.better.assign(rows, {});
    table.best.assign(rows, {});
    for (std::size_t c = 0; c < CompareTable::kColumns.size(); ++c) {
        std::optional<double> col_min;
        for (std::size_t rn = 0; rn < rows; ++rn) {
            const auto& v = table.values[rn][c];
            if (v && (!col_min || *v < *col_min)) col_min = *v;
        }
        for (std::size_t rn = 0; rn < rows; ++rn) {
            const auto& v = table.values[rn][c];
            if (!v) continue;
            const auto& base = table.values[0][c];
            table.better[rn][c] = rn > 0 && base && *v < *base;
            table.best[rn][c] = col_min && *v == *col_min;
        }
    }

    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text(out_dir + "/comparison.txt", table.render());
    }
    return table;
}

StudyReport cmd_study(std::uint64_t seed, const std::string& out_dir,
                      const StudyConfig& study_config) {
    ensure_dir(out_dir);
    StudyReport report = run_synthetic_study(seed, study_config);

    for (const auto& lh : report.labels) {
        write_text(out_dir + "/labels_" + lh.dataset + ".csv", histogram_csv(lh.histogram));
    }
    std::ostringstream summary;
    summary << "model,dataset,mean,var95,var98,var99,max,kurtosis,skew,tail_length,excluded\n";
    for (const auto& cell : report.cells) {
        const std::string tag = cell.model + "_" + cell.dataset;
        write_text(out_dir + "/errors_" + tag + ".csv", histogram_csv(cell.error_histogram));
        write_text(out_dir + "/report_" + tag + ".json",
                   eval_to_json(cell.eval, report.config.metric).dump(2) + "\n");
        const auto& r = cell.eval.report;
        summary << cell.model << ',' << cell.dataset << ',' << format_full(r.mean) << ','
                << format_full(r.var95) << ',' << format_full(r.var98) << ','
                << format_full(r.var99) << ',' << format_full(r.max) << ','
                << opt_full(r.kurtosis) << ',' << opt_full(r.skew) << ','
                << opt_full(r.tail_length) << ',' << cell.eval.excluded_zero_denominator << '\n';
    }
    write_text(out_dir + "/summary.csv", summary.str());
    return report;
}

}  // namespace tailcast
