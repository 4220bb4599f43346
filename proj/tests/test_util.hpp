#pragma once

// shared test helpers: brute-force reference implementations kept deliberately
// independent of the library's enumeration machinery (index loops + long double
// instead of Gray code + compensated doubles)

#include <cmath>
#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"
#include "spinfer/rng.hpp"

namespace testutil {

inline std::vector<int> spins_from_bits(std::uint64_t bits, int n) {
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[i] = (bits >> i) & 1 ? 1 : -1;
    return y;
}

inline long double hamiltonian_ld(const spinfer::SymMatrix& a, const std::vector<double>& h,
                                  const std::vector<int>& y) {
    const int n = a.n();
    long double acc = 0.0L;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += 0.5L * (long double)a(i, j) * y[i] * y[j];
    for (int i = 0; i < n; ++i) acc += (long double)h[i] * y[i];
    return acc;
}

inline long double log_partition_brute(const spinfer::SymMatrix& a,
                                       const std::vector<double>& h) {
    const int n = a.n();
    long double mx = -1e300L;
    std::vector<long double> hs;
    hs.reserve(1ull << n);
    for (std::uint64_t b = 0; b < (1ull << n); ++b) {
        auto y = spins_from_bits(b, n);
        long double v = hamiltonian_ld(a, h, y);
        hs.push_back(v);
        if (v > mx) mx = v;
    }
    long double s = 0.0L;
    for (auto v : hs) s += expl(v - mx);
    return mx + logl(s);
}

inline std::vector<long double> marginals_brute(const spinfer::SymMatrix& a,
                                                const std::vector<double>& h) {
    const int n = a.n();
    long double logz = log_partition_brute(a, h);
    std::vector<long double> m(n, 0.0L);
    for (std::uint64_t b = 0; b < (1ull << n); ++b) {
        auto y = spins_from_bits(b, n);
        long double w = expl(hamiltonian_ld(a, h, y) - logz);
        for (int i = 0; i < n; ++i) m[i] += w * y[i];
    }
    return m;
}

struct BruteEffects {
    long double de = 0.0L;
    long double ie = 0.0L;
};

// exact DE and IE for a fixed covariate matrix: enumerates treatments and spins
inline BruteEffects effects_brute_fixed_x(const spinfer::InteractionMatrix& a,
                                          const spinfer::OutcomeParams& p,
                                          const spinfer::Covariates& x) {
    const int n = a.n();
    long double de = 0.0L, mean_sum = 0.0L;
    for (std::uint64_t tb = 0; tb < (1ull << n); ++tb) {
        auto t = spins_from_bits(tb, n);
        auto h = spinfer::site_fields(p, t, x);
        auto m = marginals_brute(a.matrix(), h);
        long double s_ty = 0.0L, s_y = 0.0L;
        for (int i = 0; i < n; ++i) {
            s_ty += (long double)t[i] * m[i];
            s_y += m[i];
        }
        de += s_ty;
        mean_sum += s_y;
    }
    const long double count = powl(2.0L, n);
    de = 2.0L * de / count / n;
    mean_sum = mean_sum / count / n;
    std::vector<int> t_minus(n, -1);
    auto m_minus = marginals_brute(a.matrix(), spinfer::site_fields(p, t_minus, x));
    long double s_minus = 0.0L;
    for (int i = 0; i < n; ++i) s_minus += m_minus[i];
    BruteEffects out;
    out.de = de;
    out.ie = mean_sum - s_minus / n - 0.5L * de;
    return out;
}

inline spinfer::SymMatrix random_symmetric(int n, double scale, std::uint64_t seed) {
    spinfer::Rng rng(seed);
    spinfer::SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) m.set(i, j, scale * (2.0 * rng.uniform() - 1.0));
    return m;
}

inline spinfer::InteractionMatrix random_interaction(int n, double scale, std::uint64_t seed) {
    return spinfer::InteractionMatrix(random_symmetric(n, scale, seed));
}

inline std::vector<double> random_fields(int n, double scale, std::uint64_t seed) {
    spinfer::Rng rng(seed);
    std::vector<double> h(n);
    for (auto& v : h) v = scale * (2.0 * rng.uniform() - 1.0);
    return h;
}

}  // namespace testutil
