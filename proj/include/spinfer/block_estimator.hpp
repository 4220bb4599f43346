#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"

namespace spinfer {

// sites sharing (block, treatment arm, covariate row) are exchangeable under a
// block-constant interaction, so the Gibbs sum collapses onto per-cell spin
// totals
struct Cell {
    int block = 0;
    int arm = 1;          // treatment sign of every site in the cell
    double field = 0.0;   // arm*tau + theta.x + gamma, shared by the cell
    int count = 0;
    std::vector<int> sites;
};

struct CellPartition {
    int n = 0;
    int num_blocks = 0;
    std::vector<Cell> cells;
    std::vector<int> cell_of_site;
};

CellPartition build_cells(const std::vector<int>& partition, int num_blocks,
                          const OutcomeParams& p, const std::vector<int>& t,
                          const Covariates& x);

// exact expectations under the collapsed measure
//   w(y) = exp( (1/2) sum_{k,l} coefficients(k,l)/n V_k V_l + sum_cell field V_cell ),
// V_k the block spin totals; cost O(sum_k n_k^2 cells_k + K^2 prod_k (n_k+1))
struct CollapsedResult {
    double log_partition = 0.0;
    std::vector<double> cell_mean;  // <V_cell>, aligned with cells
    double treat_mean_sum = 0.0;    // sum_i t_i <Y_i>
    double site_mean_sum = 0.0;     // sum_i <Y_i>
};

CollapsedResult collapsed_expectations(const CellPartition& cells,
                                       const SymMatrix& coefficients);

// snap every coordinate to the nearest point of {-1, -1 + 2^-m, ..., 1};
// the covariate shift this induces is at most sqrt(d) 2^-m per site
struct DiscretizeResult {
    Covariates x;
    double bound = 0.0;
};
DiscretizeResult discretize_covariates(const Covariates& x, int m);

// effect-accuracy target eps translates to an interaction-approximation
// target delta = eps^2/32
double block_target_delta(double eps);

struct BlockEstimatorOptions {
    double eps = 0.2;        // accuracy target; the block fit aims at eps^2/32
    int max_blocks = 3;      // collapse cap
    int replicates = 200;
    int discretize_m = 8;    // grid exponent for continuous covariates
    std::uint64_t seed = 1;

    void validate() const;
};

struct BlockEstimate {
    double de = 0.0;
    double de_se = 0.0;
    double ie = 0.0;
    double ie_se = 0.0;
    int replicates = 0;
    double residual_norm = 0.0;  // achieved ||A - A~||
    bool regularity_met = false;
    int num_blocks = 0;
    double discretization_bound = 0.0;
};

// fit the block approximation once, then average the collapsed direct and
// indirect effects over replicate draws of (T, X)
BlockEstimate block_estimate_effects(const InteractionMatrix& a, const OutcomeParams& p,
                                     const CovariateDist& xdist,
                                     const BlockEstimatorOptions& opt);

}  // namespace spinfer
