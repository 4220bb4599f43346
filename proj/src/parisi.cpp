#include "spinfer/parisi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinfer/errors.hpp"

namespace spinfer {

double ParisiMeasure::cdf(double s) const {
    double c = 0.0;
    for (int j = 0; j < levels(); ++j)
        if (q[j] <= s + 1e-15) c = m[j];
    return c;
}

void ParisiMeasure::validate() const {
    if (q.empty() || q.size() != m.size())
        throw SpecError("ParisiMeasure: needs matching nonempty q and m");
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (!std::isfinite(q[j]) || q[j] < 0.0 || q[j] > 1.0)
            throw SpecError("ParisiMeasure: atom location outside [0,1]");
        if (!std::isfinite(m[j]) || m[j] <= 0.0 || m[j] > 1.0 + 1e-12)
            throw SpecError("ParisiMeasure: cumulative mass outside (0,1]");
        if (j > 0 && q[j] <= q[j - 1])
            throw SpecError("ParisiMeasure: atom locations must increase");
        if (j > 0 && m[j] < m[j - 1] - 1e-15)
            throw SpecError("ParisiMeasure: cumulative masses must not decrease");
    }
    if (std::fabs(m.back() - 1.0) > 1e-9)
        throw SpecError("ParisiMeasure: total mass must be 1");
}

double FieldDistribution::max_field() const {
    double mx = 0.0;
    for (const auto& a : atoms) mx = std::max(mx, std::fabs(tau * a.t + a.h));
    return mx;
}

void FieldDistribution::validate() const {
    if (atoms.empty()) throw SpecError("FieldDistribution: no atoms");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.t) || !std::isfinite(a.h) || !std::isfinite(a.prob) || a.prob < 0.0)
            throw SpecError("FieldDistribution: bad atom");
        total += a.prob;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw SpecError("FieldDistribution: probabilities sum to " + std::to_string(total));
    if (!std::isfinite(tau)) throw SpecError("FieldDistribution: non-finite tau");
}

int ParisiGrids::index_of(double qval) const {
    for (std::size_t i = 0; i < q.size(); ++i)
        if (std::fabs(q[i] - qval) < 1e-9) return static_cast<int>(i);
    throw SpecError("ParisiGrids: no slice at q = " + std::to_string(qval));
}

namespace {

struct Slice {
    std::vector<double> phi, dphi, ddphi;
};

}  // namespace

ParisiGrids solve_parisi_pde(const ParisiMeasure& mu, double beta, const PdeOptions& opt) {
    mu.validate();
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw SpecError("solve_parisi_pde: beta must be finite and >= 0");
    if (!(opt.dx > 0.0)) throw SpecError("solve_parisi_pde: dx must be positive");
    const double x_max = opt.x_max > 0.0 ? opt.x_max : 12.0 + 4.0 * beta;
    const int half = static_cast<int>(std::ceil(x_max / opt.dx));
    const int npts = 2 * half + 1;
    const double x0 = -half * opt.dx;

    // breakpoints 0, atoms, 1 (deduplicated)
    std::vector<double> bp = {0.0};
    for (double qa : mu.q)
        if (qa > bp.back() + 1e-12) bp.push_back(qa);
    if (bp.back() < 1.0 - 1e-12) bp.push_back(1.0);

    const int L = static_cast<int>(bp.size());
    auto gh = gauss_hermite(opt.gh_order);
    const int G = static_cast<int>(gh.nodes.size());

    // terminal slice, exact
    Slice cur;
    cur.phi.resize(npts);
    cur.dphi.resize(npts);
    cur.ddphi.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double x = x0 + i * opt.dx;
        cur.phi[i] = log_2cosh(x);
        cur.dphi[i] = std::tanh(x);
        cur.ddphi[i] = sech2(x);
    }

    ParisiGrids out;
    out.q.resize(L);
    out.phi.resize(L);
    out.dphi.resize(L);
    out.ddphi.resize(L);
    auto store = [&](int level, const Slice& s) {
        out.q[level] = bp[level];
        out.phi[level] = GridFunction(x0, opt.dx, s.phi, Extend::linear);
        out.dphi[level] = GridFunction(x0, opt.dx, s.dphi, Extend::constant);
        out.ddphi[level] = GridFunction(x0, opt.dx, s.ddphi, Extend::constant);
    };
    store(L - 1, cur);

    std::vector<double> w0(G), off(G);
    for (int level = L - 2; level >= 0; --level) {
        const double dq = bp[level + 1] - bp[level];
        const double tilt = mu.cdf(0.5 * (bp[level] + bp[level + 1]));
        const double sigma = beta * std::sqrt(dq);
        if (sigma == 0.0) {
            store(level, cur);
            continue;
        }
        for (int g = 0; g < G; ++g) {
            w0[g] = gh.weights[g];  // normalized below
            off[g] = sigma * 1.4142135623730951 * gh.nodes[g];
        }
        const GridFunction fphi(x0, opt.dx, cur.phi, Extend::linear);
        const GridFunction fd(x0, opt.dx, cur.dphi, Extend::constant);
        const GridFunction fdd(x0, opt.dx, cur.ddphi, Extend::constant);

        Slice next;
        next.phi.resize(npts);
        next.dphi.resize(npts);
        next.ddphi.resize(npts);
        std::vector<double> pv(G), dv(G), ddv(G), tw(G);
        for (int i = 0; i < npts; ++i) {
            const double x = x0 + i * opt.dx;
            double pmax = -std::numeric_limits<double>::infinity();
            for (int g = 0; g < G; ++g) {
                double y = x + off[g];
                pv[g] = fphi(y);
                dv[g] = fd(y);
                ddv[g] = fdd(y);
                pmax = std::max(pmax, pv[g]);
            }
            // normalized tilted weights; tilt = 0 reduces to the plain mean
            double wsum = 0.0;
            for (int g = 0; g < G; ++g) {
                tw[g] = w0[g] * std::exp(tilt * (pv[g] - pmax));
                wsum += tw[g];
            }
            double e_d = 0.0, e_d2 = 0.0, e_dd = 0.0, e_phi = 0.0;
            for (int g = 0; g < G; ++g) {
                double w = tw[g] / wsum;
                e_d += w * dv[g];
                e_d2 += w * dv[g] * dv[g];
                e_dd += w * ddv[g];
                e_phi += w * pv[g];
            }
            if (tilt > 0.0) {
                double w0sum = 0.0;
                for (int g = 0; g < G; ++g) w0sum += w0[g];
                next.phi[i] = pmax + std::log(wsum / w0sum) / tilt;
            } else {
                next.phi[i] = e_phi;
            }
            next.dphi[i] = e_d;
            next.ddphi[i] = e_dd + tilt * (e_d2 - e_d * e_d);
        }
        // bound checks, then clamp
        double exc = 0.0;
        for (int i = 0; i < npts; ++i) {
            exc = std::max(exc, std::fabs(next.dphi[i]) - 1.0);
            exc = std::max(exc, -next.ddphi[i]);
            exc = std::max(exc, next.ddphi[i] - 1.0);
            next.dphi[i] = std::clamp(next.dphi[i], -1.0, 1.0);
            next.ddphi[i] = std::clamp(next.ddphi[i], 0.0, 1.0);
        }
        out.max_excursion = std::max(out.max_excursion, exc);
        if (out.max_excursion > 1e-6)
            throw NumericalError("solve_parisi_pde: derivative bounds violated by " +
                                 std::to_string(out.max_excursion));
        cur = std::move(next);
        store(level, cur);
    }
    return out;
}

double parisi_compensator(const ParisiMeasure& mu, double beta) {
    mu.validate();
    double acc = 0.0;
    for (int j = 0; j < mu.levels(); ++j) {
        double q_next = j + 1 < mu.levels() ? mu.q[j + 1] : 1.0;
        acc += mu.m[j] * (q_next * q_next - mu.q[j] * mu.q[j]);
    }
    return 0.5 * beta * beta * acc / 2.0;
}

double parisi_functional(const ParisiMeasure& mu, double beta, const FieldDistribution& f,
                         const PdeOptions& opt) {
    f.validate();
    PdeOptions o = opt;
    if (o.x_max <= 0.0) o.x_max = 12.0 + f.max_field() + 4.0 * beta;
    auto grids = solve_parisi_pde(mu, beta, o);
    const GridFunction& phi0 = grids.phi.front();
    double acc = 0.0;
    for (const auto& a : f.atoms) acc += a.prob * phi0(f.tau * a.t + a.h);
    return acc - parisi_compensator(mu, beta);
}

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

// unconstrained chart: J stick-breaking coordinates for the q's, J-1 softmax
// logits for the masses (last logit pinned at 0)
ParisiMeasure unpack(const std::vector<double>& u, int levels) {
    ParisiMeasure mu;
    mu.q.resize(levels);
    mu.m.resize(levels);
    double prev = 0.0;
    for (int j = 0; j < levels; ++j) {
        prev = prev + (1.0 - prev) * sigmoid(u[j]);
        mu.q[j] = prev;
    }
    double zmax = 0.0;
    for (int j = 0; j < levels - 1; ++j) zmax = std::max(zmax, u[levels + j]);
    double norm = std::exp(0.0 - zmax);
    std::vector<double> p(levels);
    for (int j = 0; j < levels - 1; ++j) norm += std::exp(u[levels + j] - zmax);
    p[levels - 1] = std::exp(0.0 - zmax) / norm;
    for (int j = 0; j < levels - 1; ++j) p[j] = std::exp(u[levels + j] - zmax) / norm;
    double c = 0.0;
    for (int j = 0; j < levels; ++j) {
        c += p[j];
        mu.m[j] = std::min(c, 1.0);
    }
    mu.m[levels - 1] = 1.0;
    // guard against collapsing atoms in the chart's saturated corners
    for (int j = 1; j < levels; ++j)
        if (mu.q[j] <= mu.q[j - 1]) mu.q[j] = std::nextafter(mu.q[j - 1], 2.0) + 1e-12;
    for (int j = 0; j < levels; ++j) mu.q[j] = std::min(mu.q[j], 1.0);
    return mu;
}

double logit(double p) {
    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
    return std::log(p / (1.0 - p));
}

std::vector<double> pack(const ParisiMeasure& mu) {
    const int levels = mu.levels();
    std::vector<double> u(2 * levels - 1);
    double prev = 0.0;
    for (int j = 0; j < levels; ++j) {
        double frac = (mu.q[j] - prev) / std::max(1.0 - prev, 1e-12);
        u[j] = logit(frac);
        prev = mu.q[j];
    }
    std::vector<double> p(levels);
    double last = 0.0;
    for (int j = 0; j < levels; ++j) {
        p[j] = mu.m[j] - (j > 0 ? mu.m[j - 1] : 0.0);
        p[j] = std::max(p[j], 1e-12);
    }
    last = p[levels - 1];
    for (int j = 0; j < levels - 1; ++j) u[levels + j] = std::log(p[j] / last);
    return u;
}

}  // namespace

ParisiMinimum minimize_parisi(double beta, const FieldDistribution& f,
                              const MinimizeOptions& opt) {
    f.validate();
    if (opt.max_levels < 1) throw SpecError("minimize_parisi: max_levels must be >= 1");
    PdeOptions pde;
    pde.dx = opt.dx;
    pde.gh_order = opt.gh_order;
    pde.x_max = 12.0 + f.max_field() + 4.0 * beta;

    ParisiMinimum best;
    best.value = std::numeric_limits<double>::infinity();
    std::vector<double> warm;
    int evals_total = 0;
    for (int levels = 1; levels <= opt.max_levels; ++levels) {
        auto objective = [&](const std::vector<double>& u) {
            return parisi_functional(unpack(u, levels), beta, f, pde);
        };
        std::vector<double> u0;
        if (levels == 1) {
            u0 = {0.0};
        } else {
            // split the heaviest atom of the previous solution
            ParisiMeasure prev = unpack(warm, levels - 1);
            int heavy = 0;
            double hmass = -1.0;
            for (int j = 0; j < levels - 1; ++j) {
                double mass = prev.m[j] - (j > 0 ? prev.m[j - 1] : 0.0);
                if (mass > hmass) {
                    hmass = mass;
                    heavy = j;
                }
            }
            ParisiMeasure seed;
            for (int j = 0; j < levels - 1; ++j) {
                double mass = prev.m[j] - (j > 0 ? prev.m[j - 1] : 0.0);
                if (j == heavy) {
                    double lo = std::max(prev.q[j] - 0.02, j > 0 ? prev.q[j - 1] + 1e-6 : 0.0);
                    double hi = std::min(prev.q[j] + 0.02,
                                         j + 1 < levels - 1 ? prev.q[j + 1] - 1e-6 : 1.0);
                    if (hi <= lo) hi = std::min(lo + 1e-4, 1.0);
                    seed.q.push_back(lo);
                    seed.q.push_back(hi);
                    seed.m.push_back((j > 0 ? prev.m[j - 1] : 0.0) + 0.5 * mass);
                    seed.m.push_back(prev.m[j]);
                } else {
                    seed.q.push_back(prev.q[j]);
                    seed.m.push_back(prev.m[j]);
                }
            }
            for (int j = 1; j < levels; ++j)
                if (seed.q[j] <= seed.q[j - 1]) seed.q[j] = seed.q[j - 1] + 1e-6;
            u0 = pack(seed);
        }
        NelderMeadOptions nm;
        nm.max_evals = opt.nm_evals;
        nm.initial_step = 0.5;
        auto res = nelder_mead(objective, u0, nm);
        evals_total += res.evals;
        best.value_by_levels.push_back(res.value);
        warm = res.x;  // next level always splits this level's solution
        if (res.value < best.value - 1e-12 || levels == 1) {
            best.value = res.value;
            best.measure = unpack(res.x, levels);
        }
    }
    best.evals = evals_total;

    // atom-wise stationarity diagnostics in the unconstrained chart
    auto chart = pack(best.measure);
    const int levels = best.measure.levels();
    best.param_grad.resize(chart.size());
    auto obj = [&](const std::vector<double>& u) {
        return parisi_functional(unpack(u, levels), beta, f, pde);
    };
    const double fd = 1e-4;
    for (std::size_t k = 0; k < chart.size(); ++k) {
        auto up = chart, dn = chart;
        up[k] += fd;
        dn[k] -= fd;
        best.param_grad[k] = (obj(up) - obj(dn)) / (2.0 * fd);
    }
    return best;
}

LimitingEffects limiting_effects(double beta, const FieldDistribution& f,
                                 const MinimizeOptions& opt) {
    f.validate();
    FieldDistribution f_minus = f;
    for (auto& a : f_minus.atoms) a.t = -1.0;

    auto min_plus = minimize_parisi(beta, f, opt);
    auto min_minus = minimize_parisi(beta, f_minus, opt);

    PdeOptions pde;
    pde.dx = opt.dx;
    pde.gh_order = opt.gh_order;
    pde.x_max = 12.0 + f.max_field() + 4.0 * beta;
    auto grids = solve_parisi_pde(min_plus.measure, beta, pde);
    auto grids_minus = solve_parisi_pde(min_minus.measure, beta, pde);
    const GridFunction& d0 = grids.dphi.front();
    const GridFunction& d0m = grids_minus.dphi.front();

    LimitingEffects out;
    double de = 0.0, mean_plus = 0.0, mean_minus = 0.0;
    for (const auto& a : f.atoms) {
        double g = d0(f.tau * a.t + a.h);
        de += a.prob * a.t * g;
        mean_plus += a.prob * g;
        mean_minus += a.prob * d0m(-f.tau + a.h);
    }
    out.de = 2.0 * de;
    out.ie = mean_plus - mean_minus - 0.5 * out.de;
    out.value = min_plus.value;
    out.value_minus = min_minus.value;
    out.measure = min_plus.measure;
    out.measure_minus = min_minus.measure;
    return out;
}

}  // namespace spinfer
