#include "tailcast/runconfig.hpp"

#include <fstream>
#include <set>

namespace tailcast {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& msg) { throw InvalidConfig("config: " + msg); }

void check_keys(const ordered_json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            bad("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
        }
    }
}

double get_number(const ordered_json& obj, const std::string& where, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) bad("'" + where + "." + key + "' must be a number");
    return obj.at(key).get<double>();
}

int get_int(const ordered_json& obj, const std::string& where, const std::string& key,
            int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer()) bad("'" + where + "." + key + "' must be an integer");
    return obj.at(key).get<int>();
}

std::string get_string(const ordered_json& obj, const std::string& where, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) bad("'" + where + "." + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

}  // namespace

std::string dataset_kind_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::Sine: return "sine";
        case DatasetKind::Gaussian: return "gaussian";
        case DatasetKind::Pareto: return "pareto";
        case DatasetKind::Csv: return "csv";
    }
    throw InvalidParams("unknown dataset kind");
}

DatasetKind dataset_kind_from_name(const std::string& name) {
    if (name == "sine") return DatasetKind::Sine;
    if (name == "gaussian") return DatasetKind::Gaussian;
    if (name == "pareto") return DatasetKind::Pareto;
    if (name == "csv") return DatasetKind::Csv;
    throw InvalidConfig("config: unknown dataset kind '" + name + "'");
}

SplitBoundary WindowConfig::boundary() const {
    if (split_index) return SplitBoundary::index(*split_index);
    if (split_fraction) return SplitBoundary::fraction(*split_fraction);
    throw InvalidConfig("config: window needs split_fraction or split_index");
}

RunConfig parse_run_config(const ordered_json& j) {
    if (!j.is_object()) bad("top level must be an object");
    check_keys(j, "", {"seed", "output_dir", "dataset", "window", "model", "train", "report"});

    RunConfig cfg;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer()) bad("'seed' must be an integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    cfg.output_dir = get_string(j, "", "output_dir", cfg.output_dir);

    if (j.contains("dataset")) {
        cfg.has_dataset = true;
        const auto& d = j.at("dataset");
        if (!d.is_object()) bad("'dataset' must be an object");
        check_keys(d, "dataset",
                   {"kind", "n_series", "length", "phi", "path", "layout", "downsample_to",
                    "aggregator"});
        cfg.dataset.kind = dataset_kind_from_name(get_string(d, "dataset", "kind", "sine"));
        cfg.dataset.n_series = get_int(d, "dataset", "n_series", cfg.dataset.n_series);
        cfg.dataset.length = get_int(d, "dataset", "length", cfg.dataset.length);
        cfg.dataset.phi = get_number(d, "dataset", "phi", cfg.dataset.phi);
        cfg.dataset.path = get_string(d, "dataset", "path", "");
        cfg.dataset.layout =
            csv_layout_from_name(get_string(d, "dataset", "layout", "wide"));
        if (d.contains("downsample_to")) {
            if (!d.at("downsample_to").is_number()) bad("'dataset.downsample_to' must be a number");
            cfg.dataset.downsample_to = d.at("downsample_to").get<double>();
        }
        cfg.dataset.aggregator =
            aggregator_from_name(get_string(d, "dataset", "aggregator", "mean"));
        if (cfg.dataset.kind == DatasetKind::Csv && cfg.dataset.path.empty()) {
            bad("'dataset.path' is required for csv datasets");
        }
    }

    if (j.contains("window")) {
        cfg.has_window = true;
        const auto& w = j.at("window");
        if (!w.is_object()) bad("'window' must be an object");
        check_keys(w, "window", {"k", "h", "stride", "split_fraction", "split_index"});
        cfg.window.k = get_int(w, "window", "k", cfg.window.k);
        cfg.window.h = get_int(w, "window", "h", cfg.window.h);
        cfg.window.stride = get_int(w, "window", "stride", cfg.window.stride);
        if (w.contains("split_index")) {
            cfg.window.split_index = get_int(w, "window", "split_index", 0);
            cfg.window.split_fraction.reset();
            if (w.contains("split_fraction")) {
                bad("'window' cannot have both split_fraction and split_index");
            }
        } else if (w.contains("split_fraction")) {
            cfg.window.split_fraction = get_number(w, "window", "split_fraction", 0.8);
        }
    }

    if (j.contains("model")) {
        cfg.has_model = true;
        const auto& m = j.at("model");
        if (!m.is_object()) bad("'model' must be an object");
        check_keys(m, "model", {"kind", "order", "hidden_size"});
        const std::string kind = get_string(m, "model", "kind", "rnn");
        if (kind == "ar") {
            cfg.model.kind = ModelKindConfig::Ar;
        } else if (kind == "rnn") {
            cfg.model.kind = ModelKindConfig::Rnn;
        } else {
            bad("unknown model kind '" + kind + "'");
        }
        cfg.model.order = get_int(m, "model", "order", cfg.model.order);
        cfg.model.hidden_size = get_int(m, "model", "hidden_size", cfg.model.hidden_size);
    }

    if (j.contains("train")) {
        cfg.has_train = true;
        const auto& t = j.at("train");
        if (!t.is_object()) bad("'train' must be an object");
        check_keys(t, "train",
                   {"epochs", "batch_size", "learning_rate", "warmup_epochs", "clip_norm",
                    "gpd_refit", "gpd_ema", "modifier", "optimizer"});
        cfg.train.epochs = get_int(t, "train", "epochs", cfg.train.epochs);
        cfg.train.batch_size = get_int(t, "train", "batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = get_number(t, "train", "learning_rate", cfg.train.learning_rate);
        cfg.train.warmup_epochs = get_int(t, "train", "warmup_epochs", cfg.train.warmup_epochs);
        cfg.train.clip_norm = get_number(t, "train", "clip_norm", cfg.train.clip_norm);
        cfg.train.gpd_refit =
            gpd_refit_from_name(get_string(t, "train", "gpd_refit", "per_batch"));
        cfg.train.gpd_ema = get_number(t, "train", "gpd_ema", cfg.train.gpd_ema);
        if (t.contains("modifier")) {
            const auto& mo = t.at("modifier");
            if (!mo.is_object()) bad("'train.modifier' must be an object");
            check_keys(mo, "train.modifier",
                       {"kind", "lambda", "focal_gamma", "shrinkage_a", "shrinkage_c", "lds_bins",
                        "lds_kernel_width", "lds_min_prob"});
            auto& mod = cfg.train.modifier;
            mod.kind = modifier_kind_from_name(get_string(mo, "train.modifier", "kind", "none"));
            mod.lambda = get_number(mo, "train.modifier", "lambda", default_lambda(mod.kind));
            mod.focal_gamma = get_number(mo, "train.modifier", "focal_gamma", mod.focal_gamma);
            mod.shrinkage_a = get_number(mo, "train.modifier", "shrinkage_a", mod.shrinkage_a);
            mod.shrinkage_c = get_number(mo, "train.modifier", "shrinkage_c", mod.shrinkage_c);
            mod.lds_bins = get_int(mo, "train.modifier", "lds_bins", mod.lds_bins);
            mod.lds_kernel_width =
                get_number(mo, "train.modifier", "lds_kernel_width", mod.lds_kernel_width);
            mod.lds_min_prob = get_number(mo, "train.modifier", "lds_min_prob", mod.lds_min_prob);
        }
        if (t.contains("optimizer")) {
            const auto& o = t.at("optimizer");
            if (!o.is_object()) bad("'train.optimizer' must be an object");
            check_keys(o, "train.optimizer", {"kind", "beta1", "beta2", "eps"});
            cfg.train.optimizer.kind =
                optimizer_kind_from_name(get_string(o, "train.optimizer", "kind", "adam"));
            cfg.train.optimizer.beta1 =
                get_number(o, "train.optimizer", "beta1", cfg.train.optimizer.beta1);
            cfg.train.optimizer.beta2 =
                get_number(o, "train.optimizer", "beta2", cfg.train.optimizer.beta2);
            cfg.train.optimizer.eps = get_number(o, "train.optimizer", "eps", cfg.train.optimizer.eps);
        }
    }

    if (j.contains("report")) {
        cfg.has_report = true;
        const auto& r = j.at("report");
        if (!r.is_object()) bad("'report' must be an object");
        check_keys(r, "report", {"metric", "var_levels", "histogram_bins"});
        cfg.report.metric = error_kind_from_name(get_string(r, "report", "metric", "nd"));
        cfg.report.histogram_bins = get_int(r, "report", "histogram_bins", cfg.report.histogram_bins);
        if (r.contains("var_levels")) {
            if (!r.at("var_levels").is_array()) bad("'report.var_levels' must be an array");
            cfg.report.var_levels.clear();
            for (const auto& v : r.at("var_levels")) {
                if (!v.is_number()) bad("'report.var_levels' entries must be numbers");
                const double a = v.get<double>();
                if (!(a > 0.0) || !(a < 1.0)) bad("'report.var_levels' entries must be in (0, 1)");
                cfg.report.var_levels.push_back(a);
            }
            if (cfg.report.var_levels.empty()) bad("'report.var_levels' must not be empty");
        }
    }

    cfg.train.seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidConfig("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j);
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    if (cfg.has_dataset) {
        ordered_json d;
        d["kind"] = dataset_kind_name(cfg.dataset.kind);
        if (cfg.dataset.kind == DatasetKind::Csv) {
            d["path"] = cfg.dataset.path;
            d["layout"] = csv_layout_name(cfg.dataset.layout);
            if (cfg.dataset.downsample_to) d["downsample_to"] = *cfg.dataset.downsample_to;
            d["aggregator"] = aggregator_name(cfg.dataset.aggregator);
        } else {
            d["n_series"] = cfg.dataset.n_series;
            d["length"] = cfg.dataset.length;
            if (cfg.dataset.kind != DatasetKind::Sine) d["phi"] = cfg.dataset.phi;
        }
        j["dataset"] = d;
    }
    if (cfg.has_window) {
        ordered_json w;
        w["k"] = cfg.window.k;
        w["h"] = cfg.window.h;
        w["stride"] = cfg.window.stride;
        if (cfg.window.split_index) {
            w["split_index"] = *cfg.window.split_index;
        } else if (cfg.window.split_fraction) {
            w["split_fraction"] = *cfg.window.split_fraction;
        }
        j["window"] = w;
    }
    if (cfg.has_model) {
        ordered_json m;
        m["kind"] = cfg.model.kind == ModelKindConfig::Ar ? "ar" : "rnn";
        if (cfg.model.kind == ModelKindConfig::Ar) {
            m["order"] = cfg.model.order;
        } else {
            m["hidden_size"] = cfg.model.hidden_size;
        }
        j["model"] = m;
    }
    if (cfg.has_train) {
        ordered_json t;
        t["epochs"] = cfg.train.epochs;
        t["batch_size"] = cfg.train.batch_size;
        t["learning_rate"] = cfg.train.learning_rate;
        t["warmup_epochs"] = cfg.train.warmup_epochs;
        t["clip_norm"] = cfg.train.clip_norm;
        t["gpd_refit"] = gpd_refit_name(cfg.train.gpd_refit);
        t["gpd_ema"] = cfg.train.gpd_ema;
        ordered_json mo;
        mo["kind"] = modifier_kind_name(cfg.train.modifier.kind);
        mo["lambda"] = cfg.train.modifier.lambda;
        switch (cfg.train.modifier.kind) {
            case ModifierKind::Focal:
                mo["focal_gamma"] = cfg.train.modifier.focal_gamma;
                break;
            case ModifierKind::Shrinkage:
                mo["shrinkage_a"] = cfg.train.modifier.shrinkage_a;
                mo["shrinkage_c"] = cfg.train.modifier.shrinkage_c;
                break;
            case ModifierKind::Lds:
                mo["lds_bins"] = cfg.train.modifier.lds_bins;
                mo["lds_kernel_width"] = cfg.train.modifier.lds_kernel_width;
                mo["lds_min_prob"] = cfg.train.modifier.lds_min_prob;
                break;
            default:
                break;
        }
        t["modifier"] = mo;
        ordered_json o;
        o["kind"] = optimizer_kind_name(cfg.train.optimizer.kind);
        o["beta1"] = cfg.train.optimizer.beta1;
        o["beta2"] = cfg.train.optimizer.beta2;
        o["eps"] = cfg.train.optimizer.eps;
        t["optimizer"] = o;
        j["train"] = t;
    }
    if (cfg.has_report) {
        ordered_json r;
        r["metric"] = error_kind_name(cfg.report.metric);
        r["var_levels"] = cfg.report.var_levels;
        r["histogram_bins"] = cfg.report.histogram_bins;
        j["report"] = r;
    }
    return j;
}

SeriesSet resolve_dataset(const DatasetConfig& dataset, std::uint64_t seed) {
    switch (dataset.kind) {
        case DatasetKind::Sine:
            return gen_sine(dataset.n_series, dataset.length, seed);
        case DatasetKind::Gaussian:
            return gen_ar1(NoiseKind::Gaussian, dataset.phi, dataset.n_series, dataset.length, seed);
        case DatasetKind::Pareto:
            return gen_ar1(NoiseKind::Pareto, dataset.phi, dataset.n_series, dataset.length, seed);
        case DatasetKind::Csv: {
            CsvLoadOptions opts;
            opts.layout = dataset.layout;
            opts.downsample_to = dataset.downsample_to;
            opts.aggregator = dataset.aggregator;
            return load_csv(dataset.path, opts);
        }
    }
    throw InvalidConfig("config: unknown dataset kind");
}

}  // namespace tailcast
