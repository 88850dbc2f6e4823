#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "portnet/cli.hpp"
#include "portnet/experiments.hpp"

namespace fs = std::filesystem;
using portnet::cli::run;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("portnet_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int call(std::vector<std::string> args, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

const char* kDemo =
    "# small scenario\n"
    "n_actual_ports = 4\n"
    "n_gateway_ports = 2\n"
    "n_vessels = 3\n"
    "days = 12\n"
    "hidden_dim = 4\n"
    "max_epochs = 3\n"
    "splits = 3\n"
    "start = \"2019-03-01T00:00:00Z\"\n";

}  // namespace

TEST_CASE("annotate needs a registry") {
    TempDir dir("noreg");
    REQUIRE(call({"synth", "--out", dir.str(), "--n-vessels", "1", "--days", "1"}) == 0);
    std::string err;
    CHECK(call({"annotate", "--out", dir.str()}, &err) == portnet::cli::kExitValidation);
    CHECK(err.find("ports.json") != std::string::npos);
}

TEST_CASE("bad invocations exit with a validation error") {
    TempDir dir("bad");
    CHECK(call({}) == portnet::cli::kExitValidation);
    CHECK(call({"frobnicate"}) == portnet::cli::kExitValidation);
    write(dir.path / "bad.toml", "colour = blue\n");
    std::string err;
    CHECK(call({"synth", "--config", (dir.path / "bad.toml").string()}, &err) == portnet::cli::kExitValidation);
    CHECK(err.find("colour") != std::string::npos);
    CHECK(call({"synth", "--config", (dir.path / "missing.toml").string()}) == portnet::cli::kExitValidation);
    CHECK(call({"synth", "--out", dir.str(), "--days", "ten"}) == portnet::cli::kExitValidation);
    CHECK(call({"train", "--snapshots", (dir.path / "none.ndjson").string()}) == portnet::cli::kExitValidation);
}

TEST_CASE("divergent training exits with a numeric error") {
    TempDir dir("nan");
    write(dir.path / "demo.toml", kDemo);
    const auto cfg = (dir.path / "demo.toml").string();
    for (const char* step : {"synth", "extract-ports", "annotate", "voyages", "build-graphs"})
        REQUIRE(call({step, "--config", cfg, "--out", dir.str()}) == 0);
    std::string err;
    CHECK(call({"train", "--config", cfg, "--out", dir.str(), "--lr", "1e300"}, &err) == portnet::cli::kExitNumeric);
    CHECK(err.find("epoch") != std::string::npos);
}

TEST_CASE("full chain is reproducible") {
    TempDir a("all_a"), b("all_b");
    write(a.path / "demo.toml", kDemo);
    const auto cfg = (a.path / "demo.toml").string();
    REQUIRE(call({"all", "--config", cfg, "--seed", "7", "--out", a.str()}) == 0);
    REQUIRE(call({"all", "--config", cfg, "--seed", "7", "--out", b.str()}) == 0);
    for (const char* f : {"ais.csv", "ports.json", "labeled.csv", "voyages.csv", "snapshots.ndjson", "checkpoint.json",
                          "ablation.csv", "dropout_sweep.csv", "loss_history.csv", "evaluation.csv",
                          "confusion_alpha.csv", "confusion_t.csv", "confusion_alpha+t.csv"}) {
        INFO(f);
        REQUIRE(fs::exists(a.path / f));
        CHECK(slurp(a.path / f) == slurp(b.path / f));
    }
    const auto rows = portnet::report_from_csv(slurp(a.path / "ablation.csv"));
    CHECK(rows.size() == 3);
    CHECK(portnet::report_from_csv(slurp(a.path / "dropout_sweep.csv")).size() == 4);

    // Flags override the config file.
    REQUIRE(call({"train", "--config", cfg, "--out", a.str(), "--no-attention", "--dropout", "0"}) == 0);
    CHECK(fs::exists(a.path / "confusion_t.csv"));
    CHECK(slurp(a.path / "checkpoint.json").find("\"use_attention\": false") != std::string::npos);
}
