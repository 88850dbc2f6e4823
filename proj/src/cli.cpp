#include "portnet/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "portnet/ais_csv.hpp"
#include "portnet/checkpoint.hpp"
#include "portnet/config.hpp"
#include "portnet/error.hpp"
#include "portnet/experiments.hpp"
#include "portnet/ports.hpp"
#include "portnet/segmentation.hpp"
#include "portnet/synth.hpp"
#include "portnet/temporal_graph.hpp"

namespace portnet::cli {
namespace {

namespace fs = std::filesystem;
using Settings = std::map<std::string, std::string>;

struct Key {
    const char* name;
    const char* help;
};

// Every recognized setting; CLI flags use the same names with '-' for '_'.
constexpr Key kKeys[] = {
    {"out", "output directory"},
    {"seed", "random seed for generation and training"},
    {"ais", "AIS CSV input"},
    {"registry", "port registry JSON"},
    {"truth", "ground-truth registry used to label extracted ports"},
    {"labeled", "labeled messages CSV"},
    {"snapshots", "snapshot NDJSON"},
    {"checkpoint", "model checkpoint JSON"},
    {"eps", "DBSCAN radius in degrees"},
    {"min_pts", "DBSCAN minimum neighborhood size"},
    {"sog_max", "stationary speed cutoff in knots"},
    {"buffer", "port polygon buffer in degrees"},
    {"label_tolerance", "max centroid distance for label transfer, degrees"},
    {"lr", "Adam learning rate"},
    {"dropout", "dropout probability"},
    {"patience", "early-stopping patience in epochs"},
    {"heads", "attention heads"},
    {"hidden_dim", "hidden width"},
    {"cheb_order", "number of Chebyshev terms"},
    {"max_epochs", "epoch cap"},
    {"splits", "time-series CV folds"},
    {"attention", "true to learn attention coefficients"},
    {"temporal", "true to carry the recurrent state across days"},
    {"normalize", "z-score features with training-fold statistics"},
    {"n_actual_ports", "synthetic actual ports"},
    {"n_gateway_ports", "synthetic gateway ports"},
    {"n_vessels", "synthetic vessels"},
    {"days", "synthetic days"},
    {"report_interval", "seconds between synthetic reports"},
    {"gateway_dwell_multiplier", "gateway dwell relative to actual ports"},
    {"gateway_radius", "gateway placement radius, degrees"},
    {"dwell_median", "median stay at an actual port, hours"},
    {"dwell_log_sd", "log-normal spread of stay durations"},
    {"port_dwell_log_sd", "log-normal spread of median stays across ports"},
    {"popularity_skew", "Zipf exponent of destination popularity"},
    {"seasonal_amplitude", "log-weight swing of seasonal port popularity"},
    {"seasonal_period", "seasonal popularity period, days"},
    {"gateway_queue_probability", "probability of queueing at a gateway"},
    {"start", "scenario start, ISO-8601 UTC"},
};

bool known(const std::string& key) {
    for (const auto& k : kKeys)
        if (key == k.name) return true;
    return false;
}

std::string flag_of(const std::string& key) {
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

double to_double(const Settings& s, const std::string& key, double fallback) {
    auto it = s.find(key);
    if (it == s.end()) return fallback;
    const auto& v = it->second;
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw InvalidInput("'" + v + "' is not a number", key);
    return out;
}

long long to_int(const Settings& s, const std::string& key, long long fallback) {
    auto it = s.find(key);
    if (it == s.end()) return fallback;
    const auto& v = it->second;
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw InvalidInput("'" + v + "' is not an integer", key);
    return out;
}

bool to_bool(const Settings& s, const std::string& key, bool fallback) {
    auto it = s.find(key);
    if (it == s.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw InvalidInput("'" + it->second + "' is not a boolean", key);
}

std::string path_of(const Settings& s, const std::string& key, const std::string& default_name) {
    auto it = s.find(key);
    if (it != s.end()) return it->second;
    return (fs::path(s.at("out")) / default_name).string();
}

std::string require_path(const Settings& s, const std::string& key, const std::string& default_name) {
    const auto p = path_of(s, key, default_name);
    if (!fs::exists(p)) throw InvalidInput("missing input file " + p, key);
    return p;
}

std::string read_text(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("cannot read " + path, "path");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidInput("cannot write " + path.string(), "out");
    os << text;
    if (!os) throw InvalidInput("failed writing " + path.string(), "out");
}

ScenarioConfig scenario_of(const Settings& s) {
    ScenarioConfig c;
    c.seed = static_cast<std::uint64_t>(to_int(s, "seed", static_cast<long long>(c.seed)));
    c.n_actual_ports = static_cast<int>(to_int(s, "n_actual_ports", c.n_actual_ports));
    c.n_gateway_ports = static_cast<int>(to_int(s, "n_gateway_ports", c.n_gateway_ports));
    c.n_vessels = static_cast<int>(to_int(s, "n_vessels", c.n_vessels));
    c.days = static_cast<int>(to_int(s, "days", c.days));
    c.report_interval_s = static_cast<int>(to_int(s, "report_interval", c.report_interval_s));
    c.gateway_dwell_multiplier = to_double(s, "gateway_dwell_multiplier", c.gateway_dwell_multiplier);
    c.gateway_radius_deg = to_double(s, "gateway_radius", c.gateway_radius_deg);
    c.dwell_median_h = to_double(s, "dwell_median", c.dwell_median_h);
    c.dwell_log_sd = to_double(s, "dwell_log_sd", c.dwell_log_sd);
    c.port_dwell_log_sd = to_double(s, "port_dwell_log_sd", c.port_dwell_log_sd);
    c.popularity_skew = to_double(s, "popularity_skew", c.popularity_skew);
    c.seasonal_amplitude = to_double(s, "seasonal_amplitude", c.seasonal_amplitude);
    c.seasonal_period_days = to_double(s, "seasonal_period", c.seasonal_period_days);
    c.gateway_queue_probability = to_double(s, "gateway_queue_probability", c.gateway_queue_probability);
    if (auto it = s.find("start"); it != s.end()) c.start = it->second;
    c.validate();
    return c;
}

PortExtractionParams extraction_of(const Settings& s) {
    PortExtractionParams p;
    p.dbscan.eps = to_double(s, "eps", p.dbscan.eps);
    const auto min_pts = to_int(s, "min_pts", static_cast<long long>(p.dbscan.min_pts));
    if (min_pts < 1) throw InvalidInput("min_pts must be >= 1", "min_pts");
    p.dbscan.min_pts = static_cast<std::size_t>(min_pts);
    p.sog_max = to_double(s, "sog_max", p.sog_max);
    p.buffer = to_double(s, "buffer", p.buffer);
    return p;
}

tgnn::TrainConfig train_config_of(const Settings& s) {
    tgnn::TrainConfig c;
    c.seed = static_cast<std::uint64_t>(to_int(s, "seed", static_cast<long long>(c.seed)));
    c.learning_rate = to_double(s, "lr", c.learning_rate);
    c.dropout = to_double(s, "dropout", c.dropout);
    c.patience = static_cast<int>(to_int(s, "patience", c.patience));
    c.heads = static_cast<int>(to_int(s, "heads", c.heads));
    c.hidden_dim = static_cast<int>(to_int(s, "hidden_dim", c.hidden_dim));
    c.cheb_order = static_cast<int>(to_int(s, "cheb_order", c.cheb_order));
    c.max_epochs = static_cast<int>(to_int(s, "max_epochs", c.max_epochs));
    c.n_splits = static_cast<int>(to_int(s, "splits", c.n_splits));
    c.use_attention = to_bool(s, "attention", c.use_attention);
    c.use_temporal = to_bool(s, "temporal", c.use_temporal);
    c.normalize = to_bool(s, "normalize", c.normalize);
    c.validate();
    return c;
}

std::string setting_name(const tgnn::TrainConfig& c) {
    if (c.use_attention && c.use_temporal) return "alpha+t";
    if (c.use_attention) return "alpha";
    if (c.use_temporal) return "t";
    return "none";
}

class Pipeline {
public:
    Pipeline(Settings s, std::ostream& out, std::ostream& err) : s_(std::move(s)), out_(out), err_(err) {
        if (!s_.contains("out")) s_["out"] = "out";
    }

    void synth() {
        const auto cfg = scenario_of(s_);
        const auto g = generate(cfg);
        const auto ais = path_of(s_, "ais", "ais.csv");
        const auto truth = path_of(s_, "truth", "ports_truth.json");
        write_text(ais, g.ais_csv);
        write_text(truth, registry_to_json(g.registry));
        out_ << "wrote " << ais << " and " << truth << '\n';
    }

    void extract_ports() {
        const auto messages = read_ais_csv(require_path(s_, "ais", "ais.csv"));
        auto ports = portnet::extract_ports(messages, extraction_of(s_));
        const auto truth = path_of(s_, "truth", "ports_truth.json");
        if (fs::exists(truth)) {
            const auto reference = read_registry(truth);
            transfer_labels(ports, reference, to_double(s_, "label_tolerance", 0.01));
        }
        const auto path = path_of(s_, "registry", "ports.json");
        write_text(path, registry_to_json(ports));
        out_ << "extracted " << ports.size() << " ports -> " << path << '\n';
    }

    void annotate() {
        const auto messages = read_ais_csv(require_path(s_, "ais", "ais.csv"));
        const auto ports = read_registry(require_path(s_, "registry", "ports.json"));
        const auto labeled = portnet::annotate(messages, ports);
        const auto path = path_of(s_, "labeled", "labeled.csv");
        write_text(path, serialize_labeled_csv(labeled));
        out_ << "annotated " << labeled.size() << " messages -> " << path << '\n';
    }

    void voyages() {
        const auto labeled = parse_labeled_csv(read_text(require_path(s_, "labeled", "labeled.csv")));
        const auto visits = extract_visits(labeled);
        const auto voyages = extract_voyages(visits, labeled);
        const fs::path dir = s_.at("out");
        write_text(dir / "visits.csv", serialize_visits_csv(visits));
        write_text(dir / "voyages.csv", serialize_voyages_csv(voyages));
        out_ << visits.size() << " visits, " << voyages.size() << " voyages -> " << dir.string() << '\n';
    }

    void build_graphs() {
        const auto labeled = parse_labeled_csv(read_text(require_path(s_, "labeled", "labeled.csv")));
        const auto ports = read_registry(require_path(s_, "registry", "ports.json"));
        const auto visits = extract_visits(labeled);
        const auto voyages = extract_voyages(visits, labeled);
        const auto snapshots = build_snapshots(voyages, visits, labeled, ports);
        const auto path = path_of(s_, "snapshots", "snapshots.ndjson");
        write_text(path, snapshots_to_ndjson(snapshots));
        out_ << snapshots.size() << " daily snapshots -> " << path << '\n';
    }

    void train() {
        const auto snapshots = load_snapshots();
        const auto config = train_config_of(s_);
        const auto cv = cross_validate(snapshots, config, progress());
        const fs::path dir = s_.at("out");
        const auto name = setting_name(config);
        const ReportRow row{name, cv.report};
        write_text(dir / "cv.csv", report_to_csv("flags", std::span(&row, 1)));
        write_text(dir / ("confusion_" + name + ".csv"), confusion_to_csv(cv.confusion));
        write_text(dir / "loss_history.csv", loss_history_csv(cv.folds.back().training));
        write_text(dir / "loss_history_all.csv", loss_history_all_csv(cv));
        const auto ckpt = path_of(s_, "checkpoint", "checkpoint.json");
        tgnn::save_checkpoint(ckpt, {config, cv.folds.back().training, static_cast<int>(kFeatureDim)});
        out_ << report_to_text("flags", std::span(&row, 1));
        out_ << "parameters: " << cv.folds.back().training.parameter_count << ", checkpoint -> " << ckpt << '\n';
    }

    void evaluate() {
        const auto snapshots = load_snapshots();
        const auto ckpt = tgnn::load_checkpoint(require_path(s_, "checkpoint", "checkpoint.json"));
        if (ckpt.result.val.end > snapshots.size())
            throw InvalidInput("checkpoint validation range exceeds the snapshot count", "checkpoint");
        const auto outcome = evaluate_fold(snapshots, ckpt.config, ckpt.result);
        const auto cm = confusion(outcome.y_true, outcome.y_pred);
        const fs::path dir = s_.at("out");
        std::ostringstream os;
        os << "precision,recall,fscore\n"
           << format_double(outcome.scores.precision) << ',' << format_double(outcome.scores.recall) << ','
           << format_double(outcome.scores.fscore) << '\n';
        write_text(dir / "evaluation.csv", os.str());
        write_text(dir / "confusion_evaluation.csv", confusion_to_csv(cm));
        out_ << "precision " << outcome.scores.precision << " recall " << outcome.scores.recall << " fscore "
             << outcome.scores.fscore << '\n';
    }

    void ablate() {
        const auto snapshots = load_snapshots();
        const auto rows = ablation_report(snapshots, train_config_of(s_), progress());
        const fs::path dir = s_.at("out");
        const auto table = rows_of(rows);
        write_text(dir / "ablation.csv", report_to_csv("flags", table));
        write_text(dir / "ablation.txt", report_to_text("flags", table));
        for (const auto& r : rows) write_text(dir / ("confusion_" + r.flags + ".csv"), confusion_to_csv(r.cv.confusion));
        out_ << report_to_text("flags", table);
    }

    void sweep_dropout() {
        const auto snapshots = load_snapshots();
        const auto rows = dropout_sweep(snapshots, train_config_of(s_), kDropoutGrid, progress());
        const fs::path dir = s_.at("out");
        const auto table = rows_of(rows);
        write_text(dir / "dropout_sweep.csv", report_to_csv("p", table));
        write_text(dir / "dropout_sweep.txt", report_to_text("p", table));
        out_ << report_to_text("p", table);
    }

    void all() {
        if (!s_.contains("ais")) synth();
        extract_ports();
        annotate();
        voyages();
        build_graphs();
        train();
        evaluate();
        ablate();
        sweep_dropout();
    }

private:
    std::vector<GraphSnapshot> load_snapshots() {
        return snapshots_from_ndjson(read_text(require_path(s_, "snapshots", "snapshots.ndjson")));
    }

    ProgressFn progress() {
        return [this](const std::string& msg) { err_ << msg << '\n'; };
    }

    Settings s_;
    std::ostream& out_;
    std::ostream& err_;
};

using Step = void (Pipeline::*)();

struct Command {
    const char* name;
    const char* help;
    Step step;
};

constexpr Command kCommands[] = {
    {"synth", "generate a synthetic AIS scenario and its ground-truth registry", &Pipeline::synth},
    {"extract-ports", "cluster stationary messages into a port registry", &Pipeline::extract_ports},
    {"annotate", "label every message with its port or seapoint", &Pipeline::annotate},
    {"voyages", "derive visits and voyages from labeled messages", &Pipeline::voyages},
    {"build-graphs", "build daily port graph snapshots", &Pipeline::build_graphs},
    {"train", "cross-validate the classifier and save the last fold's model", &Pipeline::train},
    {"evaluate", "score a checkpoint on its validation block", &Pipeline::evaluate},
    {"ablate", "compare attention-only, temporal-only and full models", &Pipeline::ablate},
    {"sweep-dropout", "cross-validate over dropout probabilities", &Pipeline::sweep_dropout},
    {"all", "run the whole chain", &Pipeline::all},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Port classification from AIS tracks with a temporal graph network", "portnet"};
    app.require_subcommand(1);
    std::string config_path;
    std::map<std::string, std::string> flag_values;
    bool no_attention = false, no_temporal = false;
    for (const auto& c : kCommands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "flat key = value settings file");
        for (const auto& k : kKeys) sub->add_option(flag_of(k.name), flag_values[k.name], k.help);
        sub->add_flag("--no-attention", no_attention, "use fixed uniform neighbor weights");
        sub->add_flag("--no-temporal", no_temporal, "reset the recurrent state every day");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        Settings settings;
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) throw InvalidInput("missing config file " + config_path, "config");
            settings = read_flat_config(config_path);
            for (const auto& [key, value] : settings)
                if (!known(key)) throw InvalidInput("unknown config key '" + key + "'", key);
        }
        for (const auto& k : kKeys) {
            auto* sub = app.get_subcommands().front();
            if (sub->count(flag_of(k.name)) > 0) settings[k.name] = flag_values[k.name];
        }
        if (no_attention) settings["attention"] = "false";
        if (no_temporal) settings["temporal"] = "false";

        Pipeline pipeline(settings, out, err);
        const std::string name = app.get_subcommands().front()->get_name();
        for (const auto& c : kCommands)
            if (name == c.name) (pipeline.*c.step)();
        return kExitOk;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace portnet::cli
