#include "spinfer/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spinfer/errors.hpp"
#include "spinfer/rng.hpp"

namespace spinfer {

namespace {

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(std::vector<double>& v) {
    double nz = norm2(v);
    if (nz > 0.0)
        for (double& x : v) x /= nz;
}

// one power step on M^2; returns the current sigma estimate ||M v||
double power_step(const SymMatrix& m, std::vector<double>& v) {
    auto mv = m.matvec(v);
    double sigma = norm2(mv);
    v = m.matvec(mv);
    normalize(v);
    return sigma;
}

std::vector<double> seeded_start(int n, std::uint64_t seed, int which) {
    std::vector<double> v(n);
    if (which == 0) {
        std::fill(v.begin(), v.end(), 1.0);
    } else if (which == 1) {
        for (int i = 0; i < n; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
    } else {
        Rng rng = Rng(seed).split(which);
        for (auto& x : v) x = rng.normal();
    }
    normalize(v);
    return v;
}

struct TopEigen {
    double sigma = 0.0;        // |lambda|
    std::vector<double> vec;   // eigenvector of M (not of M^2)
};

TopEigen top_eigenvector(const SymMatrix& m, int max_iters, std::uint64_t seed) {
    const int n = m.n();
    TopEigen best;
    for (int start = 0; start < 4; ++start) {
        auto v = seeded_start(n, seed, start);
        double sigma = 0.0, prev = -1.0;
        for (int it = 0; it < max_iters; ++it) {
            sigma = power_step(m, v);
            if (it > 3 && std::fabs(sigma - prev) <= 1e-14 * std::max(1.0, sigma)) break;
            prev = sigma;
        }
        if (sigma > best.sigma) {
            best.sigma = sigma;
            best.vec = v;
        }
    }
    if (best.vec.empty()) best.vec.assign(n, 0.0);

    // v spans the +-sigma eigenspace of M^2; recover an eigenvector of M by
    // projecting onto whichever of the two signed combinations survives
    auto mv = m.matvec(best.vec);
    std::vector<double> plus(n), minus(n);
    for (int i = 0; i < n; ++i) {
        plus[i] = mv[i] + best.sigma * best.vec[i];
        minus[i] = mv[i] - best.sigma * best.vec[i];
    }
    if (norm2(plus) >= norm2(minus)) {
        normalize(plus);
        best.vec = plus;
    } else {
        normalize(minus);
        best.vec = minus;
    }
    return best;
}

// least-squares block means of n A over every (i,j) pair, diagonal included
SymMatrix fit_coefficients(const SymMatrix& a, const std::vector<int>& part, int k) {
    const int n = a.n();
    std::vector<std::vector<double>> sums(k, std::vector<double>(k, 0.0));
    std::vector<long long> counts(k, 0);
    for (int i = 0; i < n; ++i) ++counts[part[i]];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sums[part[i]][part[j]] += a(i, j);
    SymMatrix c(k);
    for (int p = 0; p < k; ++p)
        for (int q = p; q < k; ++q) {
            long long cnt = counts[p] * counts[q];
            c.set(p, q, cnt > 0 ? n * sums[p][q] / (double)cnt : 0.0);
        }
    return c;
}

SymMatrix residual_matrix(const SymMatrix& a, const std::vector<int>& part,
                          const SymMatrix& c) {
    const int n = a.n();
    SymMatrix r(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) r.set(i, j, a(i, j) - c(part[i], part[j]) / n);
    return r;
}

// refine the partition by the sign of v inside each block; returns the new
// block count (== k if nothing split)
int sign_split(std::vector<int>& part, int k, const std::vector<double>& v) {
    const int n = static_cast<int>(part.size());
    std::vector<int> plus_id(k, -1), minus_id(k, -1);
    int next = 0;
    std::vector<int> fresh(n);
    for (int i = 0; i < n; ++i) {
        int b = part[i];
        int& slot = v[i] >= 0.0 ? plus_id[b] : minus_id[b];
        if (slot < 0) slot = next++;
        fresh[i] = slot;
    }
    part = fresh;
    return next;
}

}  // namespace

double spectral_norm(const SymMatrix& m, int max_iters, std::uint64_t seed) {
    if (m.n() == 0) return 0.0;
    const int n = m.n();
    double best = 0.0;
    for (int start = 0; start < 4; ++start) {
        auto v = seeded_start(n, seed, start);
        double sigma = 0.0, prev = -1.0;
        for (int it = 0; it < max_iters; ++it) {
            sigma = power_step(m, v);
            if (it > 3 && std::fabs(sigma - prev) <= 1e-14 * std::max(1.0, sigma)) break;
            prev = sigma;
        }
        best = std::max(best, sigma);
    }
    return best;
}

BlockApproximation block_approximation(const SymMatrix& a, double eps, int max_blocks,
                                       std::uint64_t seed) {
    if (eps < 0.0) throw SpecError("block_approximation: eps must be >= 0");
    if (max_blocks < 1) throw SpecError("block_approximation: max_blocks must be >= 1");
    const int n = a.n();
    if (n == 0) throw SpecError("block_approximation: empty matrix");

    BlockApproximation out;
    out.partition.assign(n, 0);
    int k = 1;
    while (true) {
        out.coefficients = fit_coefficients(a, out.partition, k);
        SymMatrix r = residual_matrix(a, out.partition, out.coefficients);
        auto top = top_eigenvector(r, 500, seed + out.rounds_used);
        out.residual_norm = top.sigma;
        out.residual_history.push_back(top.sigma);
        ++out.rounds_used;
        if (top.sigma <= eps) {
            out.target_met = true;
            break;
        }
        if (k >= max_blocks) break;
        auto refined = out.partition;
        int k_new = sign_split(refined, k, top.vec);
        if (k_new == k || k_new > max_blocks) break;
        out.partition = refined;
        k = k_new;
    }
    return out;
}

std::vector<double> apply_block_matrix(const BlockApproximation& b,
                                       const std::vector<double>& v) {
    const int n = static_cast<int>(b.partition.size());
    if (static_cast<int>(v.size()) != n)
        throw SpecError("apply_block_matrix: size mismatch");
    const int k = b.num_blocks();
    std::vector<double> block_sum(k, 0.0);
    for (int i = 0; i < n; ++i) block_sum[b.partition[i]] += v[i];
    std::vector<double> field(k, 0.0);
    for (int p = 0; p < k; ++p) {
        double acc = 0.0;
        for (int q = 0; q < k; ++q) acc += b.coefficients(p, q) * block_sum[q];
        field[p] = acc / n;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = field[b.partition[i]];
    return out;
}

SymMatrix block_matrix_dense(const BlockApproximation& b) {
    const int n = static_cast<int>(b.partition.size());
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            m.set(i, j, b.coefficients(b.partition[i], b.partition[j]) / n);
    return m;
}

}  // namespace spinfer
