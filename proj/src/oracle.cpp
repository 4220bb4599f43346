#include "spinfer/oracle.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "spinfer/errors.hpp"
#include "spinfer/numerics.hpp"

namespace spinfer {

void OracleLimit::check_spin(int n) const {
    const int hard = 24;
    int cap = std::min(max_n, hard);
    if (n > cap)
        throw PreconditionError("oracle: n = " + std::to_string(n) +
                                " exceeds spin enumeration cap " + std::to_string(cap));
    if (n < 1) throw SpecError("oracle: n must be positive");
}

void OracleLimit::check_treatment(int n) const {
    const int hard = 20;
    int cap = std::min(max_treatment_n, hard);
    if (n > cap)
        throw PreconditionError("oracle: n = " + std::to_string(n) +
                                " exceeds treatment enumeration cap " + std::to_string(cap));
}

namespace {

// Gray-code sweep over {+-1}^n. visit(bits, H) sees every state once; H is
// kept exact with compensated accumulation plus periodic recomputes.
template <typename Visitor>
void sweep_spins(const SymMatrix& a, const std::vector<double>& h, Visitor&& visit) {
    const int n = a.n();
    std::vector<int> y(n, -1);
    std::vector<double> f = a.matvec_spins(y);
    CompensatedSum ham;
    ham.add(a.half_quad_spins(y));
    for (int i = 0; i < n; ++i) ham.add(-h[i]);
    std::uint64_t bits = 0;
    visit(bits, ham.value());
    const std::uint64_t count = 1ull << n;
    for (std::uint64_t k = 1; k < count; ++k) {
        const int i = std::countr_zero(k);
        const int s = y[i];
        ham.add(-2.0 * s * (f[i] + h[i]));
        y[i] = -s;
        bits ^= (1ull << i);
        const double delta = -2.0 * s;
        const double* row = a.data().data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) f[j] += row[j] * delta;
        if ((k & 0xFFFF) == 0) {
            // tame drift on long runs
            f = a.matvec_spins(y);
        }
        visit(bits, ham.value());
    }
}

std::vector<double> marginals_impl(const SymMatrix& a, const std::vector<double>& h) {
    const int n = a.n();
    double log_z;
    {
        LogSumExp lse;
        sweep_spins(a, h, [&](std::uint64_t, double ham) { lse.add(ham); });
        log_z = lse.value();
    }
    std::vector<CompensatedSum> acc(n);
    sweep_spins(a, h, [&](std::uint64_t bits, double ham) {
        const double w = std::exp(ham - log_z);
        for (int i = 0; i < n; ++i)
            acc[i].add((bits >> i) & 1 ? w : -w);
    });
    std::vector<double> m(n);
    for (int i = 0; i < n; ++i) m[i] = acc[i].value();
    return m;
}

void check_fields(const std::vector<double>& h, int n, const char* what) {
    if (static_cast<int>(h.size()) != n)
        throw SpecError(std::string(what) + ": field length " + std::to_string(h.size()) +
                        " != n = " + std::to_string(n));
    for (double v : h)
        if (!std::isfinite(v)) throw SpecError(std::string(what) + ": non-finite field");
}

// enumerate assignments of a finite covariate law over n sites; f(x, prob)
template <typename F>
void for_each_covariate_assignment(const CovariateDist& dist, int n, F&& f) {
    const int m = dist.support_size();
    const int d = dist.d();
    std::vector<int> odo(n, 0);
    Covariates x;
    x.n = n;
    x.d = d;
    x.x.assign(static_cast<std::size_t>(n) * d, 0.0);
    bool done = false;
    while (!done) {
        double prob = 1.0;
        for (int i = 0; i < n; ++i) {
            prob *= dist.probs()[odo[i]];
            for (int j = 0; j < d; ++j)
                x.x[static_cast<std::size_t>(i) * d + j] = dist.levels()[odo[i]][j];
        }
        f(x, prob);
        int pos = 0;
        while (pos < n) {
            if (++odo[pos] < m) break;
            odo[pos] = 0;
            ++pos;
        }
        done = pos == n;
    }
}

std::int64_t covariate_state_count(const CovariateDist& dist, int n,
                                   const OracleLimit& lim) {
    if (dist.kind() == CovariateDist::Kind::none) return 1;
    if (dist.kind() != CovariateDist::Kind::finite) return -1;  // continuous
    const int m = dist.support_size();
    if (m == 1) return 1;
    double states = std::pow(static_cast<double>(m), n);
    if (states > static_cast<double>(lim.max_covariate_states)) return -1;
    return static_cast<std::int64_t>(states);
}

struct FullModeTerms {
    double de = 0.0;      // (2/n) E_T <y^T T>
    double mean_sum = 0.0;  // (1/n) E_T <sum y>
    double minus_sum = 0.0; // (1/n) <sum y> at T = all -1
};

FullModeTerms full_terms_fixed_x(const InteractionMatrix& a, const OutcomeParams& p,
                                 const Covariates& x, const OracleLimit& lim) {
    const int n = a.n();
    std::vector<int> t_dummy(n, 1);
    OutcomeParams base = p;
    base.tau = 0.0;
    auto c = site_fields(base, t_dummy, x);  // theta.x + gamma only
    auto agg = treatment_aggregates(a, p.tau, c, lim);
    const std::uint64_t count = 1ull << n;
    CompensatedSum de_acc, sum_acc;
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        if (!(agg.z[idx] > 1e-300))
            throw NumericalError("oracle full mode: treatment partition value underflow");
        de_acc.add(agg.ty[idx] / agg.z[idx]);
        sum_acc.add(agg.ysum[idx] / agg.z[idx]);
    }
    FullModeTerms out;
    const double inv = 1.0 / static_cast<double>(count);
    out.de = 2.0 * de_acc.value() * inv / n;
    out.mean_sum = sum_acc.value() * inv / n;
    out.minus_sum = agg.ysum[0] / agg.z[0] / n;  // index 0 = all bits clear = all -1
    return out;
}

// full treatment enumeration with the covariate expectation handled by exact
// enumeration when cheap, MC fallback otherwise
FullModeTerms full_terms(const InteractionMatrix& a, const OutcomeParams& p,
                         const CovariateDist& xdist, std::uint64_t seed,
                         const OracleLimit& lim, OracleEstimate& meta) {
    const int n = a.n();
    const std::int64_t states = covariate_state_count(xdist, n, lim);
    FullModeTerms acc;
    if (states == 1) {
        Rng rng(seed);
        auto x = xdist.sample(n, rng);  // degenerate or empty law
        return full_terms_fixed_x(a, p, x, lim);
    }
    if (states > 0) {
        for_each_covariate_assignment(xdist, n, [&](const Covariates& x, double prob) {
            auto terms = full_terms_fixed_x(a, p, x, lim);
            acc.de += prob * terms.de;
            acc.mean_sum += prob * terms.mean_sum;
            acc.minus_sum += prob * terms.minus_sum;
        });
        return acc;
    }
    // covariate population too large (or continuous): MC over X only
    meta.covariate_mc = true;
    meta.draws = lim.covariate_mc_draws;
    Rng root(seed);
    std::vector<double> de_d, mean_d, minus_d;
    for (int r = 0; r < lim.covariate_mc_draws; ++r) {
        Rng rep = root.split(r);
        auto x = xdist.sample(n, rep);
        auto terms = full_terms_fixed_x(a, p, x, lim);
        de_d.push_back(terms.de);
        mean_d.push_back(terms.mean_sum);
        minus_d.push_back(terms.minus_sum);
    }
    acc.de = mean_and_se(de_d).mean;
    acc.mean_sum = mean_and_se(mean_d).mean;
    acc.minus_sum = mean_and_se(minus_d).mean;
    // conservative: se of the dominant term
    meta.se = mean_and_se(de_d).se;
    return acc;
}

}  // namespace

double exact_log_partition(const InteractionMatrix& a, const std::vector<double>& fields,
                           const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    check_fields(fields, n, "exact_log_partition");
    LogSumExp lse;
    sweep_spins(a.matrix(), fields, [&](std::uint64_t, double ham) { lse.add(ham); });
    return lse.value();
}

std::vector<double> exact_marginals(const InteractionMatrix& a,
                                    const std::vector<double>& fields,
                                    const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    check_fields(fields, n, "exact_marginals");
    return marginals_impl(a.matrix(), fields);
}

TreatmentAggregates treatment_aggregates(const InteractionMatrix& a, double tau,
                                         const std::vector<double>& base_fields,
                                         const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    lim.check_treatment(n);
    check_fields(base_fields, n, "treatment_aggregates");
    const std::uint64_t count = 1ull << n;

    TreatmentAggregates agg;
    agg.z.assign(count, 0.0);
    double h_max = -1e300;
    sweep_spins(a.matrix(), base_fields, [&](std::uint64_t bits, double ham) {
        agg.z[bits] = ham;
        if (ham > h_max) h_max = ham;
    });
    agg.ty.assign(count, 0.0);
    agg.ysum.assign(count, 0.0);
    for (std::uint64_t idx = 0; idx < count; ++idx) {
        const double w = std::exp(agg.z[idx] - h_max);
        agg.z[idx] = w;
        agg.ysum[idx] = w * (2.0 * std::popcount(idx) - n);
    }

    // site-wise contraction: after pass i the arrays are indexed by t_i
    const double ch = 2.0 * std::cosh(tau);
    const double ka = std::exp(tau) / ch;
    const double kb = std::exp(-tau) / ch;
    for (int i = 0; i < n; ++i) {
        const std::uint64_t bit = 1ull << i;
        for (std::uint64_t base = 0; base < count; base += 2 * bit) {
            for (std::uint64_t off = 0; off < bit; ++off) {
                const std::uint64_t u0 = base + off;
                const std::uint64_t u1 = u0 + bit;
                const double z1 = agg.z[u1], z0 = agg.z[u0];
                const double s1 = agg.ty[u1], s0 = agg.ty[u0];
                const double p1 = agg.ysum[u1], p0 = agg.ysum[u0];
                agg.z[u1] = ka * z1 + kb * z0;
                agg.z[u0] = kb * z1 + ka * z0;
                agg.ty[u1] = ka * s1 + kb * s0 + ka * z1 - kb * z0;
                agg.ty[u0] = kb * s1 + ka * s0 - kb * z1 + ka * z0;
                agg.ysum[u1] = ka * p1 + kb * p0;
                agg.ysum[u0] = kb * p1 + ka * p0;
            }
        }
    }
    return agg;
}

OracleEstimate exact_direct_effect(const InteractionMatrix& a, const OutcomeParams& p,
                                   const CovariateDist& xdist, OracleMode mode,
                                   std::uint64_t seed, const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    p.validate();
    OracleEstimate out;
    out.mode = mode;
    if (mode == OracleMode::full) {
        auto terms = full_terms(a, p, xdist, seed, lim, out);
        out.value = terms.de;
        return out;
    }
    Rng root(seed);
    std::vector<double> draws;
    draws.reserve(lim.mc_draws);
    for (int r = 0; r < lim.mc_draws; ++r) {
        Rng rep = root.split(r);
        auto draw = draw_replicate(xdist, n, rep);
        auto h = site_fields(p, draw.t, draw.x);
        auto m = marginals_impl(a.matrix(), h);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += draw.t[i] * m[i];
        draws.push_back(2.0 * s / n);
    }
    auto ms = mean_and_se(draws);
    out.value = ms.mean;
    out.se = ms.se;
    out.draws = lim.mc_draws;
    return out;
}

OracleEstimate exact_indirect_effect(const InteractionMatrix& a, const OutcomeParams& p,
                                     const CovariateDist& xdist, OracleMode mode,
                                     std::uint64_t seed, const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    p.validate();
    OracleEstimate out;
    out.mode = mode;
    if (mode == OracleMode::full) {
        auto terms = full_terms(a, p, xdist, seed, lim, out);
        out.value = terms.mean_sum - terms.minus_sum - 0.5 * terms.de;
        return out;
    }
    Rng root(seed);
    std::vector<double> draws;
    draws.reserve(lim.mc_draws);
    const std::vector<int> t_minus(n, -1);
    for (int r = 0; r < lim.mc_draws; ++r) {
        Rng rep = root.split(r);
        auto draw = draw_replicate(xdist, n, rep);
        auto m = marginals_impl(a.matrix(), site_fields(p, draw.t, draw.x));
        auto m_minus = marginals_impl(a.matrix(), site_fields(p, t_minus, draw.x));
        double s_ty = 0.0, s_y = 0.0, s_minus = 0.0;
        for (int i = 0; i < n; ++i) {
            s_ty += draw.t[i] * m[i];
            s_y += m[i];
            s_minus += m_minus[i];
        }
        draws.push_back((s_y - s_minus) / n - s_ty / n);
    }
    auto ms = mean_and_se(draws);
    out.value = ms.mean;
    out.se = ms.se;
    out.draws = lim.mc_draws;
    return out;
}

UnitEffects unit_effects(const InteractionMatrix& a, const OutcomeParams& p, int site,
                         std::vector<int> t, const Covariates& x, const OracleLimit& lim) {
    const int n = a.n();
    lim.check_spin(n);
    if (site < 0 || site >= n) throw SpecError("unit_effects: site out of range");
    t[site] = 1;
    auto m_plus = marginals_impl(a.matrix(), site_fields(p, t, x));
    t[site] = -1;
    auto m_minus = marginals_impl(a.matrix(), site_fields(p, t, x));
    std::vector<int> all_minus(n, -1);
    auto m_base = marginals_impl(a.matrix(), site_fields(p, all_minus, x));
    UnitEffects out;
    out.de = m_plus[site] - m_minus[site];
    out.ie = m_minus[site] - m_base[site];
    return out;
}

}  // namespace spinfer
