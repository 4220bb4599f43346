#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef SPINFER_CLI_PATH
#define SPINFER_CLI_PATH "./spinfer"
#endif
#ifndef SPINFER_SOURCE_DIR
#define SPINFER_SOURCE_DIR "."
#endif

namespace {

std::string cli_path() {
    if (const char* env = std::getenv("SPINFER_CLI")) return env;
    return SPINFER_CLI_PATH;
}

std::string source_dir() {
    if (const char* env = std::getenv("SPINFER_SOURCE")) return env;
    return SPINFER_SOURCE_DIR;
}

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "spinfer_cli_XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        REQUIRE(mkdtemp(buf.data()) != nullptr);
        path = buf.data();
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
    std::string cmd = "\"" + cli_path() + "\" " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.good());
    f << content;
}

bool dir_empty(const fs::path& p) { return fs::directory_iterator(p) == fs::directory_iterator(); }

// fields of the first data row of an effects csv (after the schema comment and
// the header line)
std::vector<std::string> effect_fields(const std::string& csv) {
    std::istringstream ss(csv);
    std::string line;
    int seen = 0;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (++seen == 2) break;
    }
    REQUIRE(seen == 2);
    std::vector<std::string> out;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) out.push_back(cell);
    return out;
}

// frozen output of the shipped cw10 config; matches tests/golden/cw10_oracle.csv
constexpr double kCw10De = 0.741146346106;
constexpr double kCw10Ie = 0.332446768073;

}  // namespace

TEST_CASE("oracle run reproduces the golden effects table byte for byte") {
    TempDir out;
    std::string spec = source_dir() + std::string("/configs/cw10.json");
    REQUIRE(run_cli("oracle --spec \"" + spec + "\" --out-dir \"" + out.path.string() + "\"") == 0);
    std::string got = slurp(out.file("cw10_effects.csv"));
    std::string want = slurp(source_dir() + std::string("/tests/golden/cw10_oracle.csv"));
    CHECK(got == want);

    auto meta = json::parse(slurp(out.file("cw10_meta.json")));
    CHECK(meta["schema"] == "spinfer-csv-1");
    CHECK(meta["wall_ms"].is_array());
    CHECK(meta["wall_ms"][0]["method"] == "oracle");
}

TEST_CASE("repeated runs emit byte-identical tables") {
    TempDir a, b;
    std::string spec = source_dir() + std::string("/configs/cw10.json");
    REQUIRE(run_cli("estimate --method block --spec \"" + spec + "\" --out-dir \"" +
                    a.path.string() + "\"") == 0);
    REQUIRE(run_cli("estimate --method block --spec \"" + spec + "\" --out-dir \"" +
                    b.path.string() + "\"") == 0);
    CHECK(slurp(a.file("cw10_effects.csv")) == slurp(b.file("cw10_effects.csv")));
}

TEST_CASE("block estimate through the cli lands within three standard errors of the oracle") {
    TempDir out;
    json spec = {
        {"spec_version", 1},
        {"seed", 77},
        {"model",
         {{"interaction", {{"kind", "curie_weiss"}, {"n", 10}, {"beta", 0.8}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.4}, {"theta", json::array()}, {"gamma", 0.0}}},
        {"method", {{"name", "block"}, {"replicates", 2000}, {"max_blocks", 1}}},
        {"output", {{"csv", "effects.csv"}}},
    };
    std::string spec_path = out.file("spec.json");
    spill(spec_path, spec.dump(2));
    REQUIRE(run_cli("estimate --spec \"" + spec_path + "\" --out-dir \"" + out.path.string() +
                    "\"") == 0);
    auto f = effect_fields(slurp(out.file("effects.csv")));
    REQUIRE(f.size() == 11);
    CHECK(f[0] == "block");
    CHECK(f[3] == "2000");
    double de = std::stod(f[7]), de_se = std::stod(f[8]);
    double ie = std::stod(f[9]), ie_se = std::stod(f[10]);
    CHECK(de_se > 0.0);
    CHECK(ie_se > 0.0);
    CHECK(std::abs(de - kCw10De) < 3.0 * de_se);
    CHECK(std::abs(ie - kCw10Ie) < 3.0 * ie_se);
}

TEST_CASE("a spec without a seed exits with the schema code and writes nothing") {
    TempDir out;
    json spec = {
        {"spec_version", 1},
        {"model",
         {{"interaction", {{"kind", "curie_weiss"}, {"n", 10}, {"beta", 0.8}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.4}}},
        {"method", {{"name", "oracle"}}},
        {"output", {{"csv", "effects.csv"}}},
    };
    TempDir specs;
    std::string spec_path = specs.file("spec.json");
    spill(spec_path, spec.dump(2));
    CHECK(run_cli("oracle --spec \"" + spec_path + "\" --out-dir \"" + out.path.string() +
                  "\"") == 2);
    CHECK(dir_empty(out.path));
}

TEST_CASE("an unknown estimator name exits with the schema code") {
    TempDir out;
    std::string spec = source_dir() + std::string("/configs/cw10.json");
    CHECK(run_cli("estimate --method bogus --spec \"" + spec + "\" --out-dir \"" +
                  out.path.string() + "\"") == 2);
    CHECK(dir_empty(out.path));
}

TEST_CASE("limits refuses interaction kinds without a block-graphon limit") {
    TempDir out;
    json spec = {
        {"spec_version", 1},
        {"seed", 5},
        {"model",
         {{"interaction", {{"kind", "gaussian"}, {"n", 10}, {"beta", 0.3}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.4}}},
        {"output", {{"csv", "limits.csv"}}},
    };
    std::string spec_path = out.file("spec.json");
    spill(spec_path, spec.dump(2));
    CHECK(run_cli("limits --spec \"" + spec_path + "\" --out-dir \"" + out.path.string() +
                  "\"") == 3);
    CHECK(!fs::exists(out.file("limits.csv")));
}

TEST_CASE("limits reports a numerical failure at a supercritical symmetric point") {
    TempDir out;
    json spec = {
        {"spec_version", 1},
        {"seed", 5},
        {"model",
         {{"interaction", {{"kind", "curie_weiss"}, {"n", 10}, {"beta", 1.5}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.0}, {"theta", json::array()}, {"gamma", 0.0}}},
        {"output", {{"csv", "limits.csv"}}},
    };
    std::string spec_path = out.file("spec.json");
    spill(spec_path, spec.dump(2));
    CHECK(run_cli("limits --spec \"" + spec_path + "\" --out-dir \"" + out.path.string() +
                  "\"") == 4);
    CHECK(!fs::exists(out.file("limits.csv")));
}

TEST_CASE("limits matches the subcritical closed form through the cli") {
    TempDir out;
    json spec = {
        {"spec_version", 1},
        {"seed", 5},
        {"model",
         {{"interaction", {{"kind", "zero"}, {"n", 10}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.7}, {"theta", json::array()}, {"gamma", 0.0}}},
        {"output", {{"csv", "limits.csv"}}},
    };
    std::string spec_path = out.file("spec.json");
    spill(spec_path, spec.dump(2));
    REQUIRE(run_cli("limits --spec \"" + spec_path + "\" --out-dir \"" + out.path.string() +
                    "\"") == 0);
    auto f = effect_fields(slurp(out.file("limits.csv")));
    REQUIRE(f.size() == 5);
    CHECK(f[0] == "zero");
    CHECK(std::abs(std::stod(f[2]) - 2.0 * std::tanh(0.7)) < 1e-8);
    CHECK(std::abs(std::stod(f[3])) < 1e-8);
}

TEST_CASE("generate then fit recovers the treatment coefficient") {
    TempDir dir;
    json gen = {
        {"spec_version", 1},
        {"seed", 4242},
        {"model",
         {{"interaction", {{"kind", "curie_weiss"}, {"n", 200}, {"beta", 0.5}}},
          {"covariates", {{"kind", "none"}}},
          {"propensity", {{"coupling", "zero"}}}}},
        {"params", {{"tau", 0.5}, {"theta", json::array()}, {"gamma", 0.0}}},
        {"method", {{"sweeps", 500}}},
        {"output", {{"matrix", "m.txt"}, {"data", "d.csv"}}},
    };
    std::string gen_path = dir.file("gen.json");
    spill(gen_path, gen.dump(2));
    REQUIRE(run_cli("generate --spec \"" + gen_path + "\" --out-dir \"" + dir.path.string() +
                    "\"") == 0);
    REQUIRE(fs::exists(dir.file("m.txt")));
    REQUIRE(fs::exists(dir.file("d.csv")));

    json fit = {
        {"spec_version", 1},
        {"seed", 4243},
        {"model",
         {{"interaction", {{"kind", "curie_weiss"}, {"n", 200}, {"beta", 0.5}}},
          {"covariates", {{"kind", "none"}}}}},
        {"params", {{"tau", 0.0}, {"theta", json::array()}, {"gamma", 0.0}}},
        {"input", {{"matrix", dir.file("m.txt")}, {"data", dir.file("d.csv")}}},
        {"output", {{"report", "fit.json"}}},
    };
    std::string fit_path = dir.file("fit_spec.json");
    spill(fit_path, fit.dump(2));
    REQUIRE(run_cli("fit --spec \"" + fit_path + "\" --out-dir \"" + dir.path.string() +
                    "\"") == 0);
    auto rep = json::parse(slurp(dir.file("fit.json")));
    CHECK(rep["converged"].get<bool>());
    CHECK(rep["grad_norm"].get<double>() < 1e-7);
    CHECK(std::abs(rep["tau_hat"].get<double>() - 0.5) < 0.35);
    CHECK(std::abs(rep["gamma_hat"].get<double>()) < 0.35);
}
