// batch driver: reads a JSON experiment spec, runs one subcommand, emits
// deterministic CSV plus a JSON sidecar for timings. Exit codes: 0 ok,
// 2 spec error, 3 method precondition, 4 numerical failure.
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spinfer/amp.hpp"
#include "spinfer/block_estimator.hpp"
#include "spinfer/errors.hpp"
#include "spinfer/glauber.hpp"
#include "spinfer/limits.hpp"
#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"
#include "spinfer/mpl.hpp"
#include "spinfer/oracle.hpp"
#include "spinfer/report.hpp"
#include "spinfer/rng.hpp"

using nlohmann::json;
using namespace spinfer;

namespace {

// every stochastic stage derives its seed from the master seed and a fixed
// stream id (splitmix step), so runs are reproducible stage by stage:
//   1 interaction noise, 2 covariates, 3 treatments, 4 outcome chain,
//   5 estimator replicates, 6 mixing chains
std::uint64_t sub_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + stream * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

const json& require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw SpecError("spec: missing field '" + std::string(key) + "' in " + where);
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw SpecError("spec: field " + where + " must be a number");
    return j.get<double>();
}

double opt_number(const json& j, const char* key, double fallback, const std::string& where) {
    auto it = j.find(key);
    return it == j.end() ? fallback : as_number(*it, where + "." + key);
}

int opt_int(const json& j, const char* key, int fallback, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) throw SpecError("spec: field " + where + "." + key + " must be an integer");
    return it->get<int>();
}

std::string opt_string(const json& j, const char* key, const std::string& fallback,
                       const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) throw SpecError("spec: field " + where + "." + key + " must be a string");
    return it->get<std::string>();
}

std::vector<double> as_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw SpecError("spec: field " + where + " must be an array");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_number(v, where + "[]"));
    return out;
}

struct LoadedSpec {
    json root;
    std::uint64_t seed = 0;
    std::string interaction_kind;
    double interaction_beta = 0.0;  // 0 when the kind has no scale
    bool has_beta = false;
    InteractionMatrix a;
    CovariateDist xdist = CovariateDist::none();
    OutcomeParams params;
    json model;
    json method;  // may be null
    json output;  // may be null
    json input;   // may be null
};

CovariateDist parse_covariates(const json& model) {
    auto it = model.find("covariates");
    if (it == model.end()) return CovariateDist::none();
    const json& c = *it;
    std::string kind = opt_string(c, "kind", "none", "model.covariates");
    if (kind == "none") return CovariateDist::none();
    if (kind == "uniform_box")
        return CovariateDist::uniform_box(opt_int(c, "d", 1, "model.covariates"));
    if (kind == "finite") {
        const json& jl = require(c, "levels", "model.covariates");
        if (!jl.is_array()) throw SpecError("spec: model.covariates.levels must be an array");
        std::vector<std::vector<double>> levels;
        for (const auto& row : jl) levels.push_back(as_vector(row, "model.covariates.levels[]"));
        std::vector<double> probs =
            as_vector(require(c, "probs", "model.covariates"), "model.covariates.probs");
        return CovariateDist::finite(std::move(levels), std::move(probs));
    }
    throw SpecError("spec: unknown covariate kind '" + kind + "'");
}

SymMatrix parse_strength(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SpecError("spec: field " + where + " must be a nonempty matrix");
    const int b = static_cast<int>(j.size());
    SymMatrix m(b);
    for (int i = 0; i < b; ++i) {
        std::vector<double> row = as_vector(j[i], where + "[]");
        if (static_cast<int>(row.size()) != b) throw SpecError("spec: field " + where + " must be square");
        for (int k = 0; k < b; ++k) {
            if (k >= i) m.set(i, k, row[k]);
            else if (m(i, k) != row[k])
                throw SpecError("spec: field " + where + " must be symmetric");
        }
    }
    return m;
}

LoadedSpec load_spec(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SpecError("spec: cannot open " + path);
    LoadedSpec s;
    try {
        s.root = json::parse(f);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("spec parse: ") + e.what());
    }
    if (!s.root.is_object()) throw SpecError("spec: root must be an object");
    int version = opt_int(s.root, "spec_version", -1, "root");
    if (version != 1) throw SpecError("spec: spec_version must be 1");
    const json& jseed = require(s.root, "seed", "root");
    if (!jseed.is_number_integer()) throw SpecError("spec: field seed must be an integer");
    s.seed = jseed.get<std::uint64_t>();

    s.model = require(s.root, "model", "root");
    const json& ji = require(s.model, "interaction", "model");
    s.interaction_kind = require(ji, "kind", "model.interaction").get<std::string>();
    int n = opt_int(ji, "n", 0, "model.interaction");
    if (n <= 0) throw SpecError("spec: model.interaction.n must be positive");
    const std::string iw = "model.interaction";
    if (s.interaction_kind == "zero") {
        s.a = make_zero(n);
    } else if (s.interaction_kind == "curie_weiss") {
        s.interaction_beta = as_number(require(ji, "beta", iw), iw + ".beta");
        s.has_beta = true;
        s.a = make_curie_weiss(n, s.interaction_beta);
    } else if (s.interaction_kind == "blockmodel") {
        std::vector<double> fractions = as_vector(require(ji, "fractions", iw), iw + ".fractions");
        SymMatrix strength = parse_strength(require(ji, "strength", iw), iw + ".strength");
        s.a = make_blockmodel(n, fractions, strength);
    } else if (s.interaction_kind == "erdos_renyi") {
        double p = as_number(require(ji, "p", iw), iw + ".p");
        s.interaction_beta = as_number(require(ji, "beta", iw), iw + ".beta");
        s.has_beta = true;
        s.a = make_erdos_renyi(n, p, s.interaction_beta, sub_seed(s.seed, 1));
    } else if (s.interaction_kind == "gaussian") {
        s.interaction_beta = as_number(require(ji, "beta", iw), iw + ".beta");
        s.has_beta = true;
        s.a = make_gaussian(n, s.interaction_beta, sub_seed(s.seed, 1));
    } else {
        throw SpecError("spec: unknown interaction kind '" + s.interaction_kind + "'");
    }

    s.xdist = parse_covariates(s.model);

    const json& jp = require(s.root, "params", "root");
    s.params.tau = as_number(require(jp, "tau", "params"), "params.tau");
    if (jp.contains("theta")) s.params.theta = as_vector(jp["theta"], "params.theta");
    s.params.gamma = opt_number(jp, "gamma", 0.0, "params");

    if (s.root.contains("method")) s.method = s.root["method"];
    if (s.root.contains("output")) s.output = s.root["output"];
    if (s.root.contains("input")) s.input = s.root["input"];
    return s;
}

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty()) return file;
    if (!dir.empty() && dir.back() == '/') return dir + file;
    return dir + "/" + file;
}

std::string output_path(const LoadedSpec& s, const char* key, const std::string& out_dir) {
    if (s.output.is_null()) throw SpecError("spec: missing field 'output' in root");
    return join_path(out_dir, require(s.output, key, "output").get<std::string>());
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// deferred writes: everything is rendered before the first byte hits disk
struct Pending {
    std::vector<std::pair<std::string, std::string>> files;
    void stage(std::string path, std::string content) {
        files.emplace_back(std::move(path), std::move(content));
    }
    void commit() const {
        for (const auto& [path, content] : files) write_text(path, content);
    }
};

EffectRow base_row(const LoadedSpec& s, const std::string& method) {
    EffectRow r;
    r.method = method;
    r.n = s.a.n();
    r.seed = s.seed;
    r.tau = s.params.tau;
    r.theta = s.params.theta;
    r.gamma = s.params.gamma;
    return r;
}

EffectRow run_method(const LoadedSpec& s, const std::string& name) {
    const json& m = s.method.is_null() ? json::object() : s.method;
    const std::string mw = "method";
    auto t0 = std::chrono::steady_clock::now();
    EffectRow row = base_row(s, name);
    if (name == "oracle") {
        std::string mode_s = opt_string(m, "mode", "full", mw);
        OracleMode mode;
        if (mode_s == "full") mode = OracleMode::full;
        else if (mode_s == "monte_carlo") mode = OracleMode::monte_carlo;
        else throw SpecError("spec: method.mode must be full or monte_carlo");
        OracleLimit lim;
        lim.mc_draws = opt_int(m, "draws", lim.mc_draws, mw);
        OracleEstimate de = exact_direct_effect(s.a, s.params, s.xdist, mode, sub_seed(s.seed, 5), lim);
        OracleEstimate ie = exact_indirect_effect(s.a, s.params, s.xdist, mode, sub_seed(s.seed, 5), lim);
        row.replicates = std::max(de.draws, ie.draws);
        row.de = de.value;
        row.de_se = de.se;
        row.ie = ie.value;
        row.ie_se = ie.se;
    } else if (name == "block") {
        BlockEstimatorOptions opt;
        opt.replicates = opt_int(m, "replicates", opt.replicates, mw);
        opt.max_blocks = opt_int(m, "max_blocks", opt.max_blocks, mw);
        opt.eps = opt_number(m, "eps", opt.eps, mw);
        opt.discretize_m = opt_int(m, "discretize_m", opt.discretize_m, mw);
        opt.seed = sub_seed(s.seed, 5);
        BlockEstimate est = block_estimate_effects(s.a, s.params, s.xdist, opt);
        row.replicates = est.replicates;
        row.de = est.de;
        row.de_se = est.de_se;
        row.ie = est.ie;
        row.ie_se = est.ie_se;
    } else if (name == "amp") {
        AmpEstimatorOptions opt;
        opt.replicates = opt_int(m, "replicates", opt.replicates, mw);
        opt.iterations = opt_int(m, "iterations", opt.iterations, mw);
        opt.max_levels = opt_int(m, "max_levels", opt.max_levels, mw);
        opt.dx = opt_number(m, "dx", opt.dx, mw);
        opt.gh_order = opt_int(m, "gh_order", opt.gh_order, mw);
        opt.seed = sub_seed(s.seed, 5);
        double beta = opt_number(m, "beta", s.has_beta ? s.interaction_beta : 0.0, mw);
        if (!(beta > 0.0))
            throw SpecError("spec: amp needs an interaction scale (method.beta or a beta-bearing kind)");
        AmpEstimate est = amp_estimate_effects(s.a, beta, s.params, s.xdist, opt);
        row.replicates = est.replicates;
        row.de = est.de;
        row.de_se = est.de_se;
        row.ie = est.ie;
        row.ie_se = est.ie_se;
    } else if (name == "glauber") {
        ChainConfig cfg;
        cfg.sweeps = opt_int(m, "sweeps", cfg.sweeps, mw);
        cfg.burn_in = opt_int(m, "burn_in", cfg.burn_in, mw);
        cfg.thin = opt_int(m, "thin", cfg.thin, mw);
        int replicates = opt_int(m, "replicates", 50, mw);
        GlauberEstimate est =
            glauber_estimate_effects(s.a, s.params, s.xdist, replicates, cfg, sub_seed(s.seed, 5));
        row.replicates = est.replicates;
        row.de = est.de;
        row.de_se = est.de_se;
        row.ie = est.ie;
        row.ie_se = est.ie_se;
    } else {
        throw SpecError("spec: unknown method '" + name + "'");
    }
    row.wall_ms = wall_since(t0);
    return row;
}

int cmd_effects(const LoadedSpec& s, const std::string& method_name, const std::string& out_dir) {
    std::vector<EffectRow> rows = {run_method(s, method_name)};
    Pending out;
    out.stage(output_path(s, "csv", out_dir), render_csv(effect_table(rows)));
    if (!s.output.is_null() && s.output.contains("sidecar"))
        out.stage(output_path(s, "sidecar", out_dir), render_sidecar(rows));
    out.commit();
    return 0;
}

int cmd_generate(const LoadedSpec& s, const std::string& out_dir) {
    const json& m = s.method.is_null() ? json::object() : s.method;
    const int n = s.a.n();
    Rng cov_rng(sub_seed(s.seed, 2));
    Covariates x = sample_covariates(s.xdist, n, cov_rng);

    const json prop = s.model.contains("propensity") ? s.model["propensity"] : json::object();
    std::string coupling_kind = opt_string(prop, "coupling", "zero", "model.propensity");
    SymMatrix coupling(n);
    if (coupling_kind == "same") coupling = s.a.matrix();
    else if (coupling_kind != "zero")
        throw SpecError("spec: model.propensity.coupling must be zero or same");
    PropensityParams pp;
    if (prop.contains("coef")) pp.coef = as_vector(prop["coef"], "model.propensity.coef");
    else pp.coef.assign(x.d, 0.0);
    int prop_sweeps = opt_int(prop, "sweeps", 0, "model.propensity");
    Rng t_rng(sub_seed(s.seed, 3));
    std::vector<int> t = sample_treatments(coupling, pp, x, prop_sweeps, t_rng);

    int sweeps = opt_int(m, "sweeps", 2000, "method");
    Rng y_rng(sub_seed(s.seed, 4));
    std::vector<int> y = y_rng.rademacher_vector(n);
    std::vector<double> h = site_fields(s.params, t, x);
    for (int sweep = 0; sweep < sweeps; ++sweep) glauber_sweep(s.a.matrix(), h, y, y_rng);

    std::ostringstream data;
    data << "# schema: " << kCsvSchema << "\n";
    data << "i,y,t";
    for (int d = 0; d < x.d; ++d) data << ",x" << d;
    data << "\n";
    for (int i = 0; i < n; ++i) {
        data << i << "," << y[i] << "," << t[i];
        for (int d = 0; d < x.d; ++d) data << "," << format_double(x.at(i, d));
        data << "\n";
    }

    // save_matrix writes directly; render the csv first so spec errors in
    // either path leave nothing behind
    std::string matrix_path = output_path(s, "matrix", out_dir);
    std::string data_path = output_path(s, "data", out_dir);
    save_matrix(matrix_path, s.a.matrix());
    write_text(data_path, data.str());
    return 0;
}

struct DataFile {
    std::vector<int> y, t;
    Covariates x;
};

DataFile load_data_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw SpecError("fit: cannot open data file " + path);
    DataFile out;
    std::string line;
    int d = -1;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("i,y,t", 0) == 0) {
            d = 0;
            for (char c : line) d += (c == ',');
            d -= 2;  // i, y, t columns
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (d < 0 || static_cast<int>(cells.size()) != d + 3)
            throw SpecError("fit: malformed data row '" + line + "'");
        out.y.push_back(std::stoi(cells[1]));
        out.t.push_back(std::stoi(cells[2]));
        for (int k = 0; k < d; ++k) out.x.x.push_back(std::stod(cells[3 + k]));
    }
    out.x.n = static_cast<int>(out.y.size());
    out.x.d = d < 0 ? 0 : d;
    if (out.y.empty()) throw SpecError("fit: data file has no rows");
    return out;
}

int cmd_fit(const LoadedSpec& s, const std::string& out_dir) {
    if (s.input.is_null()) throw SpecError("spec: missing field 'input' in root");
    std::string matrix_path = require(s.input, "matrix", "input").get<std::string>();
    std::string data_path = require(s.input, "data", "input").get<std::string>();
    DataFile df = load_data_csv(data_path);

    ObservedData data;
    data.a = InteractionMatrix(load_matrix(matrix_path));
    data.y = df.y;
    data.t = df.t;
    data.x = df.x;

    OutcomeParams init;
    init.theta.assign(data.x.d, 0.0);
    init.gamma = s.params.gamma;
    NewtonOptions newton;
    const json& m = s.method.is_null() ? json::object() : s.method;
    newton.max_iterations = opt_int(m, "max_iterations", newton.max_iterations, "method");
    newton.grad_tol = opt_number(m, "grad_tol", newton.grad_tol, "method");
    MplFit fit = fit_mpl(data, init, newton);

    json rep;
    rep["tau_hat"] = fit.params.tau;
    rep["theta_hat"] = fit.params.theta;
    rep["gamma_hat"] = fit.params.gamma;
    rep["objective"] = fit.diag.objective;
    rep["grad_norm"] = fit.diag.grad_norm;
    rep["iterations"] = fit.diag.iterations;
    rep["converged"] = fit.diag.converged;
    rep["boundary"] = fit.diag.boundary;

    Pending out;
    out.stage(output_path(s, "report", out_dir), rep.dump(2) + "\n");

    std::string plug_method = opt_string(m, "name", "", "method");
    if (!plug_method.empty()) {
        PlugInOptions popt;
        popt.init = init;
        popt.newton = newton;
        if (plug_method == "block") {
            popt.method = PlugInMethod::block;
            popt.block.replicates = opt_int(m, "replicates", popt.block.replicates, "method");
            popt.block.max_blocks = opt_int(m, "max_blocks", popt.block.max_blocks, "method");
            popt.block.seed = sub_seed(s.seed, 5);
        } else if (plug_method == "amp") {
            popt.method = PlugInMethod::amp;
            popt.amp.replicates = opt_int(m, "replicates", popt.amp.replicates, "method");
            popt.amp.seed = sub_seed(s.seed, 5);
            popt.beta = opt_number(m, "beta", s.has_beta ? s.interaction_beta : 0.0, "method");
        } else {
            throw SpecError("spec: fit method must be block or amp");
        }
        PlugInResult plug = plug_in(data, s.xdist, popt);
        EffectRow row = base_row(s, "plug_in_" + plug_method);
        row.n = data.n();
        row.tau = plug.fit.params.tau;
        row.theta = plug.fit.params.theta;
        row.gamma = plug.fit.params.gamma;
        row.replicates = plug_method == "block" ? popt.block.replicates : popt.amp.replicates;
        row.de = plug.de;
        row.de_se = plug.de_se;
        row.ie = plug.ie;
        row.ie_se = plug.ie_se;
        out.stage(output_path(s, "csv", out_dir), render_csv(effect_table({row})));
    }
    out.commit();
    return 0;
}

int cmd_limits(const LoadedSpec& s, const std::string& out_dir) {
    BlockGraphon g;
    std::string label;
    if (s.interaction_kind == "zero") {
        g.w = SymMatrix(1);
        g.p = {1.0};
        label = "zero";
    } else if (s.interaction_kind == "curie_weiss") {
        g.w = SymMatrix(1);
        g.w.set(0, 0, s.interaction_beta);
        g.p = {1.0};
        label = "curie_weiss:beta=" + format_double(s.interaction_beta);
    } else if (s.interaction_kind == "blockmodel") {
        const json& ji = s.model["interaction"];
        g.w = parse_strength(require(ji, "strength", "model.interaction"),
                             "model.interaction.strength");
        g.p = as_vector(require(ji, "fractions", "model.interaction"),
                        "model.interaction.fractions");
        label = "blockmodel:blocks=" + std::to_string(g.blocks());
    } else {
        throw PreconditionError("limits: interaction kind '" + s.interaction_kind +
                                "' has no block-graphon limit here");
    }
    const json& m = s.method.is_null() ? json::object() : s.method;
    double fd_step = opt_number(m, "fd_step", 1e-3, "method");
    GraphonEffects eff = limiting_effects_graphon(g, s.params, s.xdist, fd_step);

    Table t;
    t.columns = {"label", "tau", "de_inf", "ie_inf", "fd_gap"};
    t.add_row({label, format_double(s.params.tau), format_double(eff.de),
               format_double(eff.ie), format_double(eff.fd_gap)});
    Pending out;
    out.stage(output_path(s, "csv", out_dir), render_csv(t));
    out.commit();
    return 0;
}

int cmd_mixing(const LoadedSpec& s, const std::string& out_dir) {
    const json& m = s.method.is_null() ? json::object() : s.method;
    ChainConfig cfg;
    cfg.sweeps = opt_int(m, "sweeps", 10000, "method");
    cfg.burn_in = opt_int(m, "burn_in", 0, "method");
    const int n = s.a.n();
    Rng cov_rng(sub_seed(s.seed, 2));
    Covariates x = sample_covariates(s.xdist, n, cov_rng);
    Rng t_rng(sub_seed(s.seed, 3));
    std::vector<int> t = t_rng.rademacher_vector(n);
    double gap = metastability_gap(s.a, s.params, t, x, cfg, sub_seed(s.seed, 6));

    Table tab;
    tab.columns = {"method", "n", "seed", "sweeps", "tau", "gamma", "gap"};
    tab.add_row({"mixing", std::to_string(n), std::to_string(s.seed),
                 std::to_string(cfg.sweeps), format_double(s.params.tau),
                 format_double(s.params.gamma), format_double(gap)});
    Pending out;
    out.stage(output_path(s, "csv", out_dir), render_csv(tab));
    out.commit();
    return 0;
}

int cmd_bench(const LoadedSpec& s, const std::string& out_dir) {
    const json& m = s.method.is_null() ? json::object() : s.method;
    std::vector<std::string> methods = {"oracle", "block", "glauber"};
    if (m.contains("methods")) {
        methods.clear();
        for (const auto& v : m["methods"]) methods.push_back(v.get<std::string>());
    }
    std::vector<EffectRow> rows;
    for (const auto& name : methods) rows.push_back(run_method(s, name));
    Pending out;
    out.stage(output_path(s, "csv", out_dir), render_csv(effect_table(rows, true)));
    if (!s.output.is_null() && s.output.contains("sidecar"))
        out.stage(output_path(s, "sidecar", out_dir), render_sidecar(rows));
    out.commit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"network-interference effect estimation toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, method_override;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", spec_path, "experiment spec (JSON)")->required();
        sub->add_option("--out-dir", out_dir, "directory prefix for output paths");
    };
    CLI::App* c_generate = app.add_subcommand("generate", "simulate a dataset from the model");
    CLI::App* c_estimate = app.add_subcommand("estimate", "run an effect estimator at the spec parameters");
    CLI::App* c_oracle = app.add_subcommand("oracle", "exact effects by enumeration");
    CLI::App* c_fit = app.add_subcommand("fit", "maximum pseudo-likelihood fit (optionally plug-in effects)");
    CLI::App* c_limits = app.add_subcommand("limits", "block-graphon limiting effects");
    CLI::App* c_mixing = app.add_subcommand("mixing", "two-start magnetization gap diagnostic");
    CLI::App* c_bench = app.add_subcommand("bench", "method comparison with wall times");
    for (CLI::App* sub : {c_generate, c_estimate, c_oracle, c_fit, c_limits, c_mixing, c_bench})
        add_common(sub);
    c_estimate->add_option("--method", method_override, "estimator: block, amp, or glauber");

    CLI11_PARSE(app, argc, argv);

    if (const char* threads = std::getenv("SPINFER_THREADS")) {
        if (std::string(threads) != "1")
            std::cerr << "note: SPINFER_THREADS=" << threads
                      << " requested; this build runs replicates single-threaded\n";
    }

    try {
        LoadedSpec spec = load_spec(spec_path);
        if (c_generate->parsed()) return cmd_generate(spec, out_dir);
        if (c_oracle->parsed()) return cmd_effects(spec, "oracle", out_dir);
        if (c_estimate->parsed()) {
            std::string name = method_override;
            if (name.empty())
                name = opt_string(spec.method.is_null() ? json::object() : spec.method, "name",
                                  "", "method");
            if (name.empty()) throw SpecError("spec: estimate needs method.name or --method");
            return cmd_effects(spec, name, out_dir);
        }
        if (c_fit->parsed()) return cmd_fit(spec, out_dir);
        if (c_limits->parsed()) return cmd_limits(spec, out_dir);
        if (c_mixing->parsed()) return cmd_mixing(spec, out_dir);
        if (c_bench->parsed()) return cmd_bench(spec, out_dir);
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
