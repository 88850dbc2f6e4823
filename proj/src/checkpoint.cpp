#include "portnet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "portnet/error.hpp"

namespace portnet::tgnn {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

Matrix matrix_from(const json& j, const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw InvalidInput("tensor has the wrong number of rows", name);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& r = j[static_cast<std::size_t>(i)];
        if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
            throw InvalidInput("tensor has the wrong number of columns", name);
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

json row_json(const FeatureRow& r) { return json(std::vector<double>(r.begin(), r.end())); }

FeatureRow row_from(const json& j, const char* name) {
    if (!j.is_array() || j.size() != kFeatureDim) throw InvalidInput("expected a feature row", name);
    FeatureRow r{};
    for (std::size_t i = 0; i < kFeatureDim; ++i) r[i] = j[i].get<double>();
    return r;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& c) {
    const auto& cfg = c.config;
    json j;
    j["config"] = {{"learning_rate", cfg.learning_rate}, {"dropout", cfg.dropout},
                   {"patience", cfg.patience},           {"heads", cfg.heads},
                   {"edge_dim", cfg.edge_dim},           {"hidden_dim", cfg.hidden_dim},
                   {"cheb_order", cfg.cheb_order},       {"max_epochs", cfg.max_epochs},
                   {"seed", cfg.seed},                   {"use_attention", cfg.use_attention},
                   {"use_temporal", cfg.use_temporal},   {"normalize", cfg.normalize},
                   {"n_splits", cfg.n_splits},           {"leaky_slope", cfg.leaky_slope}};
    const auto& r = c.result;
    j["in_dim"] = c.in_dim;
    j["train"] = {r.train.begin, r.train.end};
    j["val"] = {r.val.begin, r.val.end};
    j["stats"] = {{"mean", row_json(r.stats.mean)}, {"stddev", row_json(r.stats.stddev)}};
    j["class_weights"] = r.class_weights;
    j["best_epoch"] = r.best_epoch;
    j["stop"] = r.stop == StopReason::EarlyStopping ? "early_stopping" : "max_epochs";
    json hist = json::array();
    for (const auto& e : r.history) hist.push_back({e.epoch, e.train_loss, e.val_loss});
    j["history"] = std::move(hist);
    json params = json::object();
    r.params.visit([&](const std::string& name, const Matrix& t) { params[name] = matrix_json(t); });
    j["params"] = std::move(params);
    return j.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("checkpoint is not valid JSON: ") + e.what(), "checkpoint");
    }
    Checkpoint c;
    try {
        const auto& k = j.at("config");
        auto& cfg = c.config;
        cfg.learning_rate = k.at("learning_rate").get<double>();
        cfg.dropout = k.at("dropout").get<double>();
        cfg.patience = k.at("patience").get<int>();
        cfg.heads = k.at("heads").get<int>();
        cfg.edge_dim = k.at("edge_dim").get<int>();
        cfg.hidden_dim = k.at("hidden_dim").get<int>();
        cfg.cheb_order = k.at("cheb_order").get<int>();
        cfg.max_epochs = k.at("max_epochs").get<int>();
        cfg.seed = k.at("seed").get<std::uint64_t>();
        cfg.use_attention = k.at("use_attention").get<bool>();
        cfg.use_temporal = k.at("use_temporal").get<bool>();
        cfg.normalize = k.at("normalize").get<bool>();
        cfg.n_splits = k.at("n_splits").get<int>();
        cfg.leaky_slope = k.at("leaky_slope").get<double>();
        cfg.validate();
        c.in_dim = j.at("in_dim").get<int>();
        if (c.in_dim != static_cast<int>(kFeatureDim)) throw InvalidInput("unsupported input dimension", "in_dim");
        auto& r = c.result;
        r.train = {j.at("train").at(0).get<std::size_t>(), j.at("train").at(1).get<std::size_t>()};
        r.val = {j.at("val").at(0).get<std::size_t>(), j.at("val").at(1).get<std::size_t>()};
        r.stats.mean = row_from(j.at("stats").at("mean"), "stats.mean");
        r.stats.stddev = row_from(j.at("stats").at("stddev"), "stats.stddev");
        r.class_weights = j.at("class_weights").get<std::vector<double>>();
        r.best_epoch = j.at("best_epoch").get<int>();
        r.stop = j.at("stop").get<std::string>() == "early_stopping" ? StopReason::EarlyStopping : StopReason::MaxEpochs;
        for (const auto& e : j.at("history"))
            r.history.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
        r.params = init_parameters(c.in_dim, cfg, 0);
        const auto& params = j.at("params");
        r.params.visit([&](const std::string& name, Matrix& t) {
            if (!params.contains(name)) throw InvalidInput("missing tensor", name);
            t = matrix_from(params.at(name), name, t.rows(), t.cols());
        });
        r.parameter_count = parameter_count(r.params);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed checkpoint: ") + e.what(), "checkpoint");
    }
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidInput("cannot write " + path, "path");
    os << checkpoint_to_json(c);
    if (!os) throw InvalidInput("failed writing " + path, "path");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidInput("cannot read " + path, "path");
    std::ostringstream ss;
    ss << is.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace portnet::tgnn
