#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"

namespace spinfer {

// operator norm of a symmetric matrix: power iteration on M^2 (applied
// implicitly, two matvecs per step) from several seeded starts
double spectral_norm(const SymMatrix& m, int max_iters = 500, std::uint64_t seed = 1);

// block-constant approximation A~(i,j) = coefficients(b_i, b_j)/n (diagonal
// included); coefficients are least-squares block means of n A
struct BlockApproximation {
    std::vector<int> partition;            // site -> block id
    SymMatrix coefficients;                // K x K strengths
    double residual_norm = 0.0;            // ||A - A~||_2
    std::vector<double> residual_history;  // one entry per round, K = 1 first
    int rounds_used = 0;
    bool target_met = false;

    int num_blocks() const { return coefficients.n(); }
};

// greedy decomposition: fit block means, split every block by the sign
// pattern of the residual's top eigenvector, repeat until the residual
// operator norm drops to eps or the partition would exceed max_blocks
BlockApproximation block_approximation(const SymMatrix& a, double eps, int max_blocks = 8,
                                       std::uint64_t seed = 1);

// v -> A~ v in O(n + K^2)
std::vector<double> apply_block_matrix(const BlockApproximation& b,
                                       const std::vector<double>& v);

SymMatrix block_matrix_dense(const BlockApproximation& b);

}  // namespace spinfer
