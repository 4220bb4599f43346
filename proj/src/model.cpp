#include "spinfer/model.hpp"

#include <cmath>
#include <string>

#include "spinfer/errors.hpp"
#include "spinfer/glauber.hpp"

namespace spinfer {

namespace {

void check_spins(const std::vector<int>& v, int n, const char* what) {
    if (static_cast<int>(v.size()) != n)
        throw SpecError(std::string(what) + ": length " + std::to_string(v.size()) +
                        ", expected " + std::to_string(n));
    for (int s : v)
        if (s != 1 && s != -1) throw SpecError(std::string(what) + ": entries must be +-1");
}

}  // namespace

void OutcomeParams::validate() const {
    if (!std::isfinite(tau) || !std::isfinite(gamma))
        throw SpecError("OutcomeParams: non-finite parameter");
    if (std::fabs(tau) > kTauBound)
        throw SpecError("OutcomeParams: |tau| exceeds bound " + std::to_string(kTauBound));
    for (double v : theta) {
        if (!std::isfinite(v)) throw SpecError("OutcomeParams: non-finite theta entry");
        if (std::fabs(v) > kThetaBound)
            throw SpecError("OutcomeParams: |theta| exceeds bound " + std::to_string(kThetaBound));
    }
}

CovariateDist CovariateDist::none() {
    return CovariateDist{};
}

CovariateDist CovariateDist::finite(std::vector<std::vector<double>> levels,
                                    std::vector<double> probs) {
    if (levels.empty() || levels.size() != probs.size())
        throw SpecError("CovariateDist: levels/probs size mismatch");
    CovariateDist d;
    d.kind_ = Kind::finite;
    d.d_ = static_cast<int>(levels[0].size());
    double total = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (static_cast<int>(levels[i].size()) != d.d_)
            throw SpecError("CovariateDist: ragged level " + std::to_string(i));
        if (probs[i] < 0.0) throw SpecError("CovariateDist: negative probability");
        total += probs[i];
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw SpecError("CovariateDist: probabilities sum to " + std::to_string(total));
    d.levels_ = std::move(levels);
    d.probs_ = std::move(probs);
    return d;
}

CovariateDist CovariateDist::uniform_box(int d) {
    if (d < 1) throw SpecError("CovariateDist: uniform_box needs d >= 1");
    CovariateDist c;
    c.kind_ = Kind::uniform_box;
    c.d_ = d;
    return c;
}

int CovariateDist::support_size() const {
    if (kind_ == Kind::none) return 1;
    if (kind_ == Kind::uniform_box) return -1;
    return static_cast<int>(levels_.size());
}

Covariates CovariateDist::sample(int n, Rng& rng) const {
    Covariates out;
    out.n = n;
    out.d = d_;
    out.x.resize(static_cast<std::size_t>(n) * d_);
    if (kind_ == Kind::none) return out;
    if (kind_ == Kind::uniform_box) {
        for (auto& v : out.x) v = 2.0 * rng.uniform() - 1.0;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        std::size_t a = 0;
        double acc = probs_[0];
        while (a + 1 < probs_.size() && u >= acc) acc += probs_[++a];
        for (int j = 0; j < d_; ++j) out.x[static_cast<std::size_t>(i) * d_ + j] = levels_[a][j];
    }
    return out;
}

std::vector<double> site_fields(const OutcomeParams& p, const std::vector<int>& t,
                                const Covariates& x) {
    const int n = static_cast<int>(t.size());
    check_spins(t, n, "site_fields: t");
    if (x.n != n) throw SpecError("site_fields: covariate rows != n");
    if (x.d != p.d())
        throw SpecError("site_fields: covariate dim " + std::to_string(x.d) + " != theta dim " +
                        std::to_string(p.d()));
    std::vector<double> h(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double f = p.tau * t[i] + p.gamma;
        for (int j = 0; j < x.d; ++j) f += p.theta[j] * x.at(i, j);
        h[i] = f;
    }
    return h;
}

std::vector<double> propensity_fields(const PropensityParams& p, const Covariates& x) {
    if (x.d != p.d()) throw SpecError("propensity_fields: covariate dim != coef dim");
    std::vector<double> h(x.n, 0.0);
    for (int i = 0; i < x.n; ++i) {
        double f = 0.0;
        for (int j = 0; j < x.d; ++j) f += p.coef[j] * x.at(i, j);
        h[i] = f;
    }
    return h;
}

double hamiltonian(const InteractionMatrix& a, const OutcomeParams& p,
                   const std::vector<int>& y, const std::vector<int>& t,
                   const Covariates& x) {
    const int n = a.n();
    check_spins(y, n, "hamiltonian: y");
    auto h = site_fields(p, t, x);
    double acc = a.matrix().half_quad_spins(y);
    for (int i = 0; i < n; ++i) acc += y[i] * h[i];
    return acc;
}

double conditional_field(const InteractionMatrix& a, const OutcomeParams& p, int i,
                         const std::vector<int>& y, const std::vector<int>& t,
                         const Covariates& x) {
    const int n = a.n();
    if (i < 0 || i >= n) throw SpecError("conditional_field: index out of range");
    check_spins(y, n, "conditional_field: y");
    auto h = site_fields(p, t, x);
    double f = h[i];
    for (int j = 0; j < n; ++j) f += a(i, j) * y[j];
    return f;
}

InteractionMatrix make_zero(int n) {
    return InteractionMatrix(SymMatrix(n));
}

InteractionMatrix make_curie_weiss(int n, double beta) {
    SymMatrix m(n);
    const double v = beta / n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.set(i, j, v);
    return InteractionMatrix(std::move(m));
}

std::vector<int> block_assignment(int n, const std::vector<double>& fractions) {
    if (fractions.empty()) throw SpecError("block_assignment: no fractions");
    double total = 0.0;
    for (double f : fractions) {
        if (f <= 0.0) throw SpecError("block_assignment: non-positive fraction");
        total += f;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw SpecError("block_assignment: fractions sum to " + std::to_string(total));
    std::vector<int> b(n);
    const int nb = static_cast<int>(fractions.size());
    double acc = 0.0;
    int start = 0;
    for (int k = 0; k < nb; ++k) {
        acc += fractions[k];
        int end = (k + 1 == nb) ? n : static_cast<int>(std::lround(acc * n));
        for (int i = start; i < end; ++i) b[i] = k;
        start = end;
    }
    return b;
}

InteractionMatrix make_blockmodel(int n, const std::vector<double>& fractions,
                                  const SymMatrix& strength) {
    if (strength.n() != static_cast<int>(fractions.size()))
        throw SpecError("make_blockmodel: strength size != number of blocks");
    auto b = block_assignment(n, fractions);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.set(i, j, strength(b[i], b[j]) / n);
    return InteractionMatrix(std::move(m));
}

InteractionMatrix make_erdos_renyi(int n, double p, double beta, std::uint64_t seed) {
    if (p <= 0.0 || p > 1.0) throw SpecError("make_erdos_renyi: p must be in (0,1]");
    Rng rng(seed);
    SymMatrix m(n);
    const double v = beta / (n * p);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) m.set(i, j, v);
    return InteractionMatrix(std::move(m));
}

InteractionMatrix make_gaussian(int n, double beta, std::uint64_t seed) {
    Rng rng(seed);
    SymMatrix m(n);
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.set(i, j, beta * sd * rng.normal());
    return InteractionMatrix(std::move(m));
}

std::vector<int> sample_treatments(const SymMatrix& coupling, const PropensityParams& p,
                                   const Covariates& x, int sweeps, Rng& rng) {
    const int n = x.n;
    if (coupling.n() != n) throw SpecError("sample_treatments: coupling size != n");
    auto h = propensity_fields(p, x);
    if (coupling.max_abs() == 0.0) {
        // exact iid: P(T_i = +1) = sigmoid(2 h_i)
        std::vector<int> t(n);
        for (int i = 0; i < n; ++i) {
            double pp = 1.0 / (1.0 + std::exp(-2.0 * h[i]));
            t[i] = rng.uniform() < pp ? 1 : -1;
        }
        return t;
    }
    std::vector<int> t(n, 1);
    for (int s = 0; s < sweeps; ++s) glauber_sweep(coupling, h, t, rng);
    return t;
}

Covariates sample_covariates(const CovariateDist& dist, int n, Rng& rng) {
    return dist.sample(n, rng);
}

ReplicateDraw draw_replicate(const CovariateDist& dist, int n, Rng& rng) {
    ReplicateDraw r;
    r.t = rng.rademacher_vector(n);
    r.x = dist.sample(n, rng);
    return r;
}

}  // namespace spinfer
