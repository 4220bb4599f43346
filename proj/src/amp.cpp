#include "spinfer/amp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "spinfer/errors.hpp"
#include "spinfer/rng.hpp"

namespace spinfer {

namespace {

constexpr double kQFloor = 1e-4;

double clamp_q(const ParisiMeasure& mu) {
    double q1 = mu.q.front();
    return q1 < kQFloor ? 0.0 : q1;
}

double auto_x_max(double max_field, double beta) { return 12.0 + max_field + 4.0 * beta; }

struct RunOutcome {
    AmpState state;
    double max_abs_x = 0.0;
};

RunOutcome run_iterations(const InteractionMatrix& a, double beta,
                          const std::vector<double>& h1, const std::vector<double>& h2,
                          const AmpKernel& kern, int iterations, bool keep_history) {
    const int n = a.n();
    RunOutcome out;
    AmpState& st = out.state;
    st.q = kern.q;
    st.iterations = iterations;

    std::vector<double> m_prev(n, 0.0), m_cur(n, 0.0), x(n, 0.0), m_next(n);
    for (int k = 0; k < iterations; ++k) {
        double dk = 0.0;
        if (k >= 1) {
            for (int i = 0; i < n; ++i) dk += kern.dg(x[i]);
            dk /= n;
        }
        if (dk < -1e-12 || dk > 1.0 + 1e-12)
            throw NumericalError("amp_run: Onsager factor left [0,1]");
        std::vector<double> w = a.matrix().matvec(m_cur);
        const double ons = beta * beta * dk;
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double xi = w[i] - ons * m_prev[i] + h1[i] + h2[i];
            x[i] = xi;
            out.max_abs_x = std::max(out.max_abs_x, std::fabs(xi));
            m_next[i] = kern.g(xi);
            norm2 += m_next[i] * m_next[i];
        }
        st.onsager.push_back(dk);
        st.self_overlap.push_back(norm2 / n);
        if (keep_history) st.history.push_back(m_next);
        std::swap(m_prev, m_cur);
        std::swap(m_cur, m_next);
    }
    st.m = m_cur;
    return out;
}

FieldDistribution split_atoms(const FieldDistribution& f, double eps) {
    FieldDistribution g;
    g.tau = f.tau;
    for (const auto& at : f.atoms) {
        g.atoms.push_back({at.t, at.h + eps, at.prob / 2.0});
        g.atoms.push_back({at.t, at.h - eps, at.prob / 2.0});
    }
    return g;
}

}  // namespace

void AmpOptions::validate() const {
    if (iterations < 1) throw SpecError("AmpOptions: iterations must be >= 1");
    if (dx <= 0.0) throw SpecError("AmpOptions: dx must be positive");
    if (gh_order < 2) throw SpecError("AmpOptions: gh_order must be >= 2");
}

void AmpEstimatorOptions::validate() const {
    if (iterations < 1) throw SpecError("AmpEstimatorOptions: iterations must be >= 1");
    if (replicates < 1) throw SpecError("AmpEstimatorOptions: replicates must be >= 1");
    if (max_levels < 1) throw SpecError("AmpEstimatorOptions: max_levels must be >= 1");
    if (dx <= 0.0) throw SpecError("AmpEstimatorOptions: dx must be positive");
}

AmpKernel make_amp_kernel(const ParisiMeasure& mu, double beta, double x_max, double dx,
                          int gh_order) {
    mu.validate();
    PdeOptions opt;
    opt.x_max = x_max;
    opt.dx = dx;
    opt.gh_order = gh_order;
    auto grids = solve_parisi_pde(mu, beta, opt);
    AmpKernel kern;
    kern.q = clamp_q(mu);
    int lvl = grids.index_of(kern.q);
    kern.g = grids.dphi[lvl];
    kern.dg = grids.ddphi[lvl];
    kern.x_hi = kern.g.x_max();
    return kern;
}

AmpState amp_run(const InteractionMatrix& a, double beta, const std::vector<double>& h1,
                 const std::vector<double>& h2, const ParisiMeasure& mu_star,
                 const AmpOptions& opt) {
    opt.validate();
    const int n = a.n();
    if (static_cast<int>(h1.size()) != n || static_cast<int>(h2.size()) != n)
        throw SpecError("amp_run: field length != n");
    double max_field = 0.0;
    for (int i = 0; i < n; ++i) max_field = std::max(max_field, std::fabs(h1[i] + h2[i]));

    AmpKernel kern =
        make_amp_kernel(mu_star, beta, auto_x_max(max_field, beta), opt.dx, opt.gh_order);
    RunOutcome out = run_iterations(a, beta, h1, h2, kern, opt.iterations, opt.keep_history);
    if (out.max_abs_x > kern.x_hi) {
        kern = make_amp_kernel(mu_star, beta, out.max_abs_x + 2.0, opt.dx, opt.gh_order);
        out = run_iterations(a, beta, h1, h2, kern, opt.iterations, opt.keep_history);
        out.state.grid_extended = true;
        if (out.max_abs_x > kern.x_hi)
            throw NumericalError("amp_run: iterate left the solver grid after extension");
    }
    return out.state;
}

double amp_de(const AmpState& state, const std::vector<int>& t_bar, bool paper_literal) {
    const std::size_t n = state.m.size();
    if (t_bar.size() != n) throw SpecError("amp_de: treatment length != n");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += t_bar[i] * state.m[i];
    return (paper_literal ? 1.0 : 2.0) * acc / static_cast<double>(n);
}

double amp_ie(const AmpState& state, const AmpState& state_minus, double de,
              bool paper_literal) {
    const std::size_t n = state.m.size();
    if (state_minus.m.size() != n) throw SpecError("amp_ie: state sizes differ");
    double sum = 0.0, sum_minus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += state.m[i];
        sum_minus += state_minus.m[i];
    }
    return (sum - sum_minus) / static_cast<double>(n) - (paper_literal ? de : de / 2.0);
}

StateEvolution state_evolution(double beta, const FieldDistribution& f,
                               const ParisiMeasure& mu_star, int iterations, int gh_order) {
    if (iterations < 0) throw SpecError("state_evolution: iterations must be >= 0");
    f.validate();
    AmpKernel kern = make_amp_kernel(mu_star, beta, auto_x_max(f.max_field(), beta) + 8.0,
                                     0.01, gh_order);
    StateEvolution se;
    se.q = kern.q;
    se.var_w = beta * beta * kern.q;
    se.a.push_back(0.0);
    auto gh = gauss_hermite(gh_order);
    for (int k = 0; k < iterations; ++k) {
        double t = std::min(se.a.back(), se.var_w);
        double rem = std::sqrt(std::max(0.0, se.var_w - t));
        double acc = 0.0;
        for (const auto& at : f.atoms) {
            double field = f.tau * at.t + at.h;
            acc += at.prob * gh.expect(field, std::sqrt(t), [&](double y) {
                double inner = gh.expect(y, rem, [&](double z) { return kern.g(z); });
                return inner * inner;
            });
        }
        se.a.push_back(beta * beta * acc);
    }
    return se;
}

FieldDistribution field_law(const OutcomeParams& p, const CovariateDist& xdist) {
    p.validate();
    if (p.d() != xdist.d())
        throw SpecError("field_law: covariate dim != theta dim");
    FieldDistribution f;
    f.tau = p.tau;
    switch (xdist.kind()) {
        case CovariateDist::Kind::none:
            f.atoms = {{1.0, p.gamma, 0.5}, {-1.0, p.gamma, 0.5}};
            break;
        case CovariateDist::Kind::finite: {
            const auto& lv = xdist.levels();
            const auto& pr = xdist.probs();
            for (std::size_t s = 0; s < lv.size(); ++s) {
                double h = p.gamma;
                for (int j = 0; j < xdist.d(); ++j) h += p.theta[j] * lv[s][j];
                f.atoms.push_back({1.0, h, pr[s] / 2.0});
                f.atoms.push_back({-1.0, h, pr[s] / 2.0});
            }
            break;
        }
        case CovariateDist::Kind::uniform_box:
            throw PreconditionError("field_law: continuous covariate law not supported");
    }
    return f;
}

AmpEstimate amp_estimate_effects(const InteractionMatrix& a, double beta,
                                 const OutcomeParams& p, const CovariateDist& xdist,
                                 const AmpEstimatorOptions& opt) {
    opt.validate();
    const int n = a.n();
    auto f = field_law(p, xdist);
    MinimizeOptions mo;
    mo.max_levels = opt.max_levels;
    mo.dx = opt.dx;
    mo.gh_order = opt.gh_order;
    auto lim = limiting_effects(beta, f, mo);

    const double x_max = auto_x_max(std::fabs(f.tau) + f.max_field(), beta);
    AmpKernel kern = make_amp_kernel(lim.measure, beta, x_max, opt.dx, opt.gh_order);
    AmpKernel kern_minus =
        make_amp_kernel(lim.measure_minus, beta, x_max, opt.dx, opt.gh_order);

    auto se_pred = state_evolution(beta, f, lim.measure, opt.iterations, opt.gh_order);

    std::vector<double> de_vals, ie_vals;
    Rng root(opt.seed);
    for (int r = 0; r < opt.replicates; ++r) {
        Rng rr = root.split(static_cast<std::uint64_t>(r));
        auto draw = draw_replicate(xdist, n, rr);
        std::vector<double> h1(n), h1m(n, -p.tau), h2(n, p.gamma);
        for (int i = 0; i < n; ++i) {
            h1[i] = p.tau * draw.t[i];
            for (int j = 0; j < draw.x.d; ++j) h2[i] += p.theta[j] * draw.x.at(i, j);
        }
        auto run_one = [&](AmpKernel& k, const ParisiMeasure& mu,
                           const std::vector<double>& hh1) {
            RunOutcome out = run_iterations(a, beta, hh1, h2, k, opt.iterations, false);
            if (out.max_abs_x > k.x_hi) {
                k = make_amp_kernel(mu, beta, out.max_abs_x + 2.0, opt.dx, opt.gh_order);
                out = run_iterations(a, beta, hh1, h2, k, opt.iterations, false);
                out.state.grid_extended = true;
                if (out.max_abs_x > k.x_hi)
                    throw NumericalError("amp_estimate_effects: grid extension failed");
            }
            return out.state;
        };
        AmpState st = run_one(kern, lim.measure, h1);
        AmpState stm = run_one(kern_minus, lim.measure_minus, h1m);
        double de_r = amp_de(st, draw.t, opt.paper_literal_estimators);
        de_vals.push_back(de_r);
        ie_vals.push_back(amp_ie(st, stm, de_r, opt.paper_literal_estimators));
    }

    AmpEstimate est;
    auto dm = mean_and_se(de_vals);
    auto im = mean_and_se(ie_vals);
    est.de = dm.mean;
    est.de_se = dm.se;
    est.ie = im.mean;
    est.ie_se = im.se;
    est.q = kern.q;
    est.a_last = se_pred.a.back();
    est.levels = lim.measure.levels();
    est.replicates = opt.replicates;
    est.iterations = opt.iterations;
    return est;
}

StabilityProbe amp_stability_probe(const InteractionMatrix& a, double beta,
                                   const FieldDistribution& f, double eps, int iterations,
                                   const MinimizeOptions& mopt, std::uint64_t seed) {
    if (eps < 0.0) throw SpecError("amp_stability_probe: eps must be >= 0");
    f.validate();
    const int n = a.n();
    Rng rng(seed);
    std::vector<double> h1(n), h2(n), h2t(n);
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform(), acc = 0.0;
        const FieldAtom* pick = &f.atoms.back();
        for (const auto& at : f.atoms) {
            acc += at.prob;
            if (u < acc) {
                pick = &at;
                break;
            }
        }
        h1[i] = f.tau * pick->t;
        h2[i] = pick->h;
    }
    for (int i = 0; i < n; ++i) h2t[i] = h2[i] + eps * rng.rademacher();

    auto mu = minimize_parisi(beta, f, mopt).measure;
    ParisiMeasure mu_t =
        eps == 0.0 ? mu : minimize_parisi(beta, split_atoms(f, eps), mopt).measure;

    AmpOptions ao;
    ao.iterations = iterations;
    ao.dx = mopt.dx;
    ao.gh_order = mopt.gh_order;
    ao.keep_history = true;
    AmpState s1 = amp_run(a, beta, h1, h2, mu, ao);
    AmpState s2 = amp_run(a, beta, h1, h2t, mu_t, ao);

    StabilityProbe pr;
    for (int k = 0; k < iterations; ++k) {
        double d = 0.0;
        for (int i = 0; i < n; ++i) {
            double diff = s1.history[k][i] - s2.history[k][i];
            d += diff * diff;
        }
        pr.delta.push_back(d / n);
        pr.max_delta = std::max(pr.max_delta, d / n);
    }
    return pr;
}

}  // namespace spinfer
