#include "spinfer/limits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "spinfer/errors.hpp"
#include "spinfer/numerics.hpp"
#include "spinfer/rng.hpp"

namespace spinfer {

double rate_function(double m) {
    if (m < -1.0 || m > 1.0) throw SpecError("rate function: mean outside [-1, 1]");
    double lo = (1.0 + m == 0.0) ? 0.0 : 0.5 * (1.0 + m) * std::log1p(m);
    double hi = (1.0 - m == 0.0) ? 0.0 : 0.5 * (1.0 - m) * std::log1p(-m);
    return lo + hi;
}

double rate_function_prime(double m) {
    if (m < -1.0 || m > 1.0) throw SpecError("rate function: mean outside [-1, 1]");
    return std::atanh(m);
}

double rate_function_second(double m) {
    if (m < -1.0 || m > 1.0) throw SpecError("rate function: mean outside [-1, 1]");
    return 1.0 / ((1.0 - m) * (1.0 + m));
}

double phi_tau(const InteractionMatrix& a, const std::vector<int>& t, double tau) {
    const int n = a.n();
    if (static_cast<int>(t.size()) != n) throw SpecError("phi: treatment size mismatch");
    for (int v : t)
        if (v != 1 && v != -1) throw SpecError("phi: treatments must be +-1");
    CompensatedSum s;
    for (int v : t) s.add(log_2cosh(tau * v));
    return a.matrix().half_quad_spins(t) / n + s.value() / n;
}

double psi_reconstruct(const InteractionMatrix& a, const std::vector<double>& tau_grid,
                       const std::vector<double>& de, double max_jump) {
    if (tau_grid.size() != de.size()) throw SpecError("psi: grid and de sizes differ");
    if (tau_grid.size() < 2) throw SpecError("psi: need at least two grid points");
    if (tau_grid.front() != 0.0) throw SpecError("psi: grid must start at tau = 0");
    for (std::size_t k = 1; k < tau_grid.size(); ++k) {
        if (tau_grid[k] <= tau_grid[k - 1]) throw SpecError("psi: grid must be increasing");
        if (std::fabs(de[k] - de[k - 1]) > max_jump)
            throw PreconditionError("psi: de grid too coarse (jump " +
                                    std::to_string(std::fabs(de[k] - de[k - 1])) +
                                    " exceeds " + std::to_string(max_jump) + ")");
    }
    const int n = a.n();
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a.matrix()(i, i);
    double mean_phi = 0.5 * trace / n + log_2cosh(tau_grid.back());
    return mean_phi - 0.5 * trapezoid(tau_grid, de);
}

void BlockGraphon::validate() const {
    const int b = blocks();
    if (b <= 0) throw SpecError("graphon: no blocks");
    if (w.n() != b) throw SpecError("graphon: coupling matrix size mismatch");
    double total = 0.0;
    for (double v : p) {
        if (!(v > 0.0)) throw SpecError("graphon: block weights must be positive");
        total += v;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw SpecError("graphon: block weights must sum to 1");
    for (int i = 0; i < b; ++i)
        for (int j = i; j < b; ++j) {
            double v = w(i, j);
            if (!std::isfinite(v)) throw SpecError("graphon: non-finite coupling");
            if (v < 0.0) throw SpecError("graphon: negative coupling");
        }
}

void MeanFieldOptions::validate() const {
    if (max_iterations <= 0) throw SpecError("meanfield: max_iterations must be positive");
    if (!(tol > 0.0)) throw SpecError("meanfield: tol must be positive");
    if (damping < 0.0 || damping >= 1.0) throw SpecError("meanfield: damping must be in [0, 1)");
    if (random_starts < 0) throw SpecError("meanfield: random_starts must be >= 0");
}

namespace {

// (covariate level, treatment sign) cells shared by every block
struct CellLayout {
    std::vector<double> field;    // tau * s + theta . x + gamma
    std::vector<double> weight;   // level prob * sign prob
};

CellLayout make_cells(const OutcomeParams& p, const CovariateDist& xdist,
                      TreatmentBranch branch) {
    std::vector<std::vector<double>> levels;
    std::vector<double> level_prob;
    switch (xdist.kind()) {
        case CovariateDist::Kind::none:
            levels.push_back({});
            level_prob.push_back(1.0);
            break;
        case CovariateDist::Kind::finite:
            levels = xdist.levels();
            level_prob = xdist.probs();
            break;
        case CovariateDist::Kind::uniform_box:
            throw PreconditionError("meanfield: finite covariate support required");
    }
    for (const auto& lv : levels)
        if (lv.size() != p.theta.size())
            throw SpecError("meanfield: covariate dimension does not match theta");

    std::vector<int> signs;
    std::vector<double> sign_prob;
    if (branch == TreatmentBranch::uniform) {
        signs = {1, -1};
        sign_prob = {0.5, 0.5};
    } else {
        signs = {-1};
        sign_prob = {1.0};
    }

    CellLayout out;
    for (std::size_t a = 0; a < levels.size(); ++a) {
        double shift = p.gamma;
        for (std::size_t d = 0; d < levels[a].size(); ++d) shift += p.theta[d] * levels[a][d];
        for (std::size_t s = 0; s < signs.size(); ++s) {
            out.field.push_back(p.tau * signs[s] + shift);
            out.weight.push_back(level_prob[a] * sign_prob[s]);
        }
    }
    return out;
}

struct FixedPointRun {
    std::vector<double> m;
    bool converged = false;
};

FixedPointRun iterate_cells(const BlockGraphon& g, const CellLayout& cells,
                            std::vector<double> m, const MeanFieldOptions& opt) {
    const int nb = g.blocks();
    const int nc = static_cast<int>(cells.field.size());
    std::vector<double> mbar(nb), couple(nb);
    for (int it = 0; it < opt.max_iterations; ++it) {
        for (int b = 0; b < nb; ++b) {
            double acc = 0.0;
            for (int c = 0; c < nc; ++c) acc += cells.weight[c] * m[b * nc + c];
            mbar[b] = acc;
        }
        for (int b = 0; b < nb; ++b) {
            double acc = 0.0;
            for (int bp = 0; bp < nb; ++bp) acc += g.w(b, bp) * g.p[bp] * mbar[bp];
            couple[b] = acc;
        }
        double residual = 0.0;
        for (int b = 0; b < nb; ++b)
            for (int c = 0; c < nc; ++c) {
                double target = std::tanh(couple[b] + cells.field[c]);
                double& cur = m[b * nc + c];
                residual = std::max(residual, std::fabs(target - cur));
                cur = opt.damping * cur + (1.0 - opt.damping) * target;
            }
        if (residual <= opt.tol) return {std::move(m), true};
    }
    return {std::move(m), false};
}

double functional_value(const BlockGraphon& g, const CellLayout& cells,
                        const std::vector<double>& m, std::vector<double>* block_mean) {
    const int nb = g.blocks();
    const int nc = static_cast<int>(cells.field.size());
    std::vector<double> mbar(nb);
    for (int b = 0; b < nb; ++b) {
        double acc = 0.0;
        for (int c = 0; c < nc; ++c) acc += cells.weight[c] * m[b * nc + c];
        mbar[b] = acc;
    }
    double quad = 0.0;
    for (int b = 0; b < nb; ++b)
        for (int bp = 0; bp < nb; ++bp)
            quad += 0.5 * g.w(b, bp) * g.p[b] * g.p[bp] * mbar[b] * mbar[bp];
    double lin = 0.0, ent = 0.0;
    for (int b = 0; b < nb; ++b)
        for (int c = 0; c < nc; ++c) {
            double wgt = g.p[b] * cells.weight[c];
            lin += wgt * cells.field[c] * m[b * nc + c];
            ent += wgt * rate_function(m[b * nc + c]);
        }
    if (block_mean) *block_mean = std::move(mbar);
    return std::log(2.0) + quad + lin - ent;
}

}  // namespace

MeanFieldSolution meanfield_value(const BlockGraphon& w, const OutcomeParams& p,
                                  const CovariateDist& xdist, TreatmentBranch branch,
                                  const MeanFieldOptions& opt) {
    w.validate();
    opt.validate();
    CellLayout cells = make_cells(p, xdist, branch);
    const int dim = w.blocks() * static_cast<int>(cells.field.size());

    std::vector<std::vector<double>> starts;
    for (double v : {-0.9, 0.0, 0.9}) starts.emplace_back(dim, v);
    Rng rng(opt.seed);
    for (int r = 0; r < opt.random_starts; ++r) {
        std::vector<double> s(dim);
        for (double& v : s) v = 1.9 * rng.uniform() - 0.95;
        starts.push_back(std::move(s));
    }

    MeanFieldSolution best;
    bool have = false;
    for (auto& s : starts) {
        FixedPointRun run = iterate_cells(w, cells, std::move(s), opt);
        std::vector<double> mbar;
        double value = functional_value(w, cells, run.m, &mbar);
        if (run.converged) ++best.starts_converged;
        // converged points win over non-converged ones regardless of value
        bool better = !have || (run.converged && !best.converged) ||
                      (run.converged == best.converged && value > best.value);
        if (better) {
            best.value = value;
            best.m = std::move(run.m);
            best.block_mean = std::move(mbar);
            best.converged = run.converged;
        }
        have = true;
    }
    return best;
}

namespace {

struct Derivative {
    double value = 0.0;  // Richardson-extrapolated central difference
    double gap = 0.0;    // |forward - backward| one-sided disagreement
};

Derivative differentiate(const std::function<double(double)>& f, double at, double h,
                         const char* axis) {
    double center = f(at);
    double hi = f(at + h), lo = f(at - h);
    double coarse = (hi - lo) / (2.0 * h);
    double fine = (f(at + 0.5 * h) - f(at - 0.5 * h)) / h;
    double fwd = (hi - center) / h;
    double bwd = (center - lo) / h;
    Derivative d;
    d.value = (4.0 * fine - coarse) / 3.0;
    d.gap = std::fabs(fwd - bwd);
    if (d.gap > 10.0 * h) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "limits: non-differentiable point in %s (one-sided derivatives %.8f and %.8f)",
                      axis, fwd, bwd);
        throw NumericalError(buf);
    }
    return d;
}

}  // namespace

GraphonEffects limiting_effects_graphon(const BlockGraphon& w, const OutcomeParams& p,
                                        const CovariateDist& xdist, double fd_step,
                                        const MeanFieldOptions& opt) {
    if (!(fd_step > 0.0)) throw SpecError("limits: fd_step must be positive");
    auto value_at = [&](double tau, double gamma, TreatmentBranch branch) {
        OutcomeParams q = p;
        q.tau = tau;
        q.gamma = gamma;
        return meanfield_value(w, q, xdist, branch, opt).value;
    };

    GraphonEffects out;
    Derivative dtau = differentiate(
        [&](double t) { return value_at(t, p.gamma, TreatmentBranch::uniform); }, p.tau,
        fd_step, "tau");
    out.de = 2.0 * dtau.value;

    Derivative dg_uniform = differentiate(
        [&](double g) { return value_at(p.tau, g, TreatmentBranch::uniform); }, p.gamma,
        fd_step, "gamma");
    Derivative dg_minus = differentiate(
        [&](double g) { return value_at(p.tau, g, TreatmentBranch::minus_one); }, p.gamma,
        fd_step, "gamma");
    out.ie = dg_uniform.value - dg_minus.value - 0.5 * out.de;
    out.value = value_at(p.tau, p.gamma, TreatmentBranch::uniform);
    out.fd_gap = std::max({dtau.gap, dg_uniform.gap, dg_minus.gap});
    return out;
}

}  // namespace spinfer
