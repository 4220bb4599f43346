#include "spinfer/glauber.hpp"

#include <cmath>

#include "spinfer/errors.hpp"
#include "spinfer/numerics.hpp"

namespace spinfer {

void ChainConfig::validate() const {
    if (sweeps <= 0) throw SpecError("ChainConfig: sweeps must be positive");
    if (burn_in < 0 || burn_in >= sweeps)
        throw SpecError("ChainConfig: burn_in must be in [0, sweeps)");
    if (thin <= 0) throw SpecError("ChainConfig: thin must be positive");
}

namespace {

// resample site i from its conditional given the rest; fields caches (A y)
void update_site(const SymMatrix& a, const std::vector<double>& h, std::vector<int>& y,
                 std::vector<double>& fields, int i, Rng& rng) {
    const int n = a.n();
    double f = fields[i] + h[i];
    double p_plus = 1.0 / (1.0 + std::exp(-2.0 * f));
    int s = rng.uniform() < p_plus ? 1 : -1;
    if (s != y[i]) {
        const double delta = 2.0 * s;  // s - old = 2s
        const double* row = a.data().data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) fields[j] += row[j] * delta;
        y[i] = s;
    }
}

std::vector<int> start_state(ChainStart start, int n, Rng& rng) {
    switch (start) {
        case ChainStart::all_plus: return std::vector<int>(n, 1);
        case ChainStart::all_minus: return std::vector<int>(n, -1);
        default: return rng.rademacher_vector(n);
    }
}

}  // namespace

void glauber_sweep(const SymMatrix& a, const std::vector<double>& h, std::vector<int>& y,
                   Rng& rng, bool systematic) {
    const int n = a.n();
    if (static_cast<int>(h.size()) != n || static_cast<int>(y.size()) != n)
        throw SpecError("glauber_sweep: size mismatch");
    std::vector<double> fields = a.matvec_spins(y);
    for (int k = 0; k < n; ++k) {
        int i = systematic ? k : rng.uniform_int(n);
        update_site(a, h, y, fields, i, rng);
    }
}

ChainResult run_chain(const SymMatrix& a, const std::vector<double>& h,
                      const ChainConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const int n = a.n();
    if (static_cast<int>(h.size()) != n) throw SpecError("run_chain: field size mismatch");
    Rng rng = Rng(seed).split(0);
    auto y = start_state(cfg.start, n, rng);
    std::vector<double> fields = a.matvec_spins(y);

    ChainResult out;
    out.mean_spin.assign(n, 0.0);
    CompensatedSum mag_acc;
    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        for (int k = 0; k < n; ++k) {
            int i = cfg.systematic_scan ? k : rng.uniform_int(n);
            update_site(a, h, y, fields, i, rng);
        }
        if (sweep < cfg.burn_in) continue;
        if ((sweep - cfg.burn_in) % cfg.thin != 0) continue;
        double m = 0.0;
        for (int i = 0; i < n; ++i) {
            // Rao-Blackwellized per-site mean
            out.mean_spin[i] += std::tanh(fields[i] + h[i]);
            m += y[i];
        }
        m /= n;
        out.magnetization_trace.push_back(m);
        mag_acc.add(m);
        ++out.recorded;
    }
    if (out.recorded == 0) throw SpecError("run_chain: no sweeps recorded");
    for (auto& v : out.mean_spin) v /= out.recorded;
    out.mean_magnetization = mag_acc.value() / out.recorded;
    return out;
}

ChainResult run_outcome_chain(const InteractionMatrix& a, const OutcomeParams& p,
                              const std::vector<int>& t, const Covariates& x,
                              const ChainConfig& cfg, std::uint64_t seed) {
    auto h = site_fields(p, t, x);
    return run_chain(a.matrix(), h, cfg, seed);
}

double metastability_gap(const InteractionMatrix& a, const OutcomeParams& p,
                         const std::vector<int>& t, const Covariates& x,
                         const ChainConfig& cfg, std::uint64_t seed) {
    auto h = site_fields(p, t, x);
    ChainConfig up = cfg;
    up.start = ChainStart::all_plus;
    ChainConfig down = cfg;
    down.start = ChainStart::all_minus;
    double m_plus = run_chain(a.matrix(), h, up, seed).mean_magnetization;
    double m_minus = run_chain(a.matrix(), h, down, seed + 1).mean_magnetization;
    return std::fabs(m_plus - m_minus);
}

GlauberEstimate glauber_estimate_effects(const InteractionMatrix& a, const OutcomeParams& p,
                                         const CovariateDist& xdist, int replicates,
                                         const ChainConfig& cfg, std::uint64_t seed) {
    if (replicates < 2) throw SpecError("glauber_estimate_effects: need >= 2 replicates");
    p.validate();
    const int n = a.n();
    Rng root(seed);
    std::vector<double> de_draws, ie_draws;
    de_draws.reserve(replicates);
    ie_draws.reserve(replicates);
    for (int r = 0; r < replicates; ++r) {
        Rng rep = root.split(r);
        auto draw = draw_replicate(xdist, n, rep);
        auto res = run_outcome_chain(a, p, draw.t, draw.x, cfg, rep.next_u64());

        // all-(-1) treatment branch on the same covariates
        std::vector<int> t_minus(n, -1);
        auto res_minus = run_outcome_chain(a, p, t_minus, draw.x, cfg, rep.next_u64());

        double s_ty = 0.0, s_y = 0.0, s_y_minus = 0.0;
        for (int i = 0; i < n; ++i) {
            s_ty += draw.t[i] * res.mean_spin[i];
            s_y += res.mean_spin[i];
            s_y_minus += res_minus.mean_spin[i];
        }
        double de = 2.0 * s_ty / n;
        de_draws.push_back(de);
        ie_draws.push_back((s_y - s_y_minus) / n - 0.5 * de);
    }
    auto de_ms = mean_and_se(de_draws);
    auto ie_ms = mean_and_se(ie_draws);
    GlauberEstimate out;
    out.de = de_ms.mean;
    out.de_se = de_ms.se;
    out.ie = ie_ms.mean;
    out.ie_se = ie_ms.se;
    out.replicates = replicates;
    return out;
}

}  // namespace spinfer
