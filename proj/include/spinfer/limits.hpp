#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"

namespace spinfer {

// large-deviation rate of a uniform +-1 spin tilted to mean m:
//   I(m) = ((1+m)/2) log(1+m) + ((1-m)/2) log(1-m),  I(+-1) = log 2
double rate_function(double m);
double rate_function_prime(double m);   // atanh(m), diverges at +-1
double rate_function_second(double m);  // 1/(1-m^2)

// (1/2n) t^T A t + (1/n) sum_i log 2cosh(tau t_i) for a spin vector t
double phi_tau(const InteractionMatrix& a, const std::vector<int>& t, double tau);

// Reconstructs the zero-coupling-field log-partition density from direct-effect
// values on a tau grid running from 0 to tau_max:
//   psi = E[phi(tau_max)] - (1/2) * trapezoid(de over the grid).
// The expectation over uniform treatments is exact: E[t^T A t] = tr(A), so
// E[phi] = tr(A)/(2n) + log 2cosh(tau_max). Successive de values differing by
// more than max_jump flag the grid as too coarse.
double psi_reconstruct(const InteractionMatrix& a, const std::vector<double>& tau_grid,
                       const std::vector<double>& de, double max_jump = 0.25);

// block-constant limit of n * A(i,j): coupling w(b,b') between blocks with
// weights p_b. Entries may exceed 1 (the scale absorbs beta); negative
// couplings are rejected.
struct BlockGraphon {
    SymMatrix w;
    std::vector<double> p;

    int blocks() const { return static_cast<int>(p.size()); }
    void validate() const;
};

// treatment law entering the mean-field functional: signs uniform on +-1, or
// frozen at -1 (the all-control branch used by the indirect effect)
enum class TreatmentBranch { uniform, minus_one };

struct MeanFieldOptions {
    int max_iterations = 50000;
    double tol = 1e-12;
    double damping = 0.5;
    int random_starts = 5;
    std::uint64_t seed = 2026;

    void validate() const;
};

struct MeanFieldSolution {
    double value = 0.0;            // log 2 + quadratic + field term - entropy
    std::vector<double> m;         // cell means, indexed (block, level, sign)
    std::vector<double> block_mean; // p-weighted mean per block
    bool converged = false;        // at least one start reached tol
    int starts_converged = 0;
};

// sup over block/level/sign-constant magnetization profiles of
//   (1/2) sum_{b,b'} w(b,b') p_b p_b' mbar_b mbar_b'
//   + sum cells weight * field * m - sum cells weight * I(m) + log 2
// via damped fixed-point iteration m = tanh(sum_b' w p mbar + field) from
// multiple starts; covariates must have finite support (or none)
MeanFieldSolution meanfield_value(const BlockGraphon& w, const OutcomeParams& p,
                                  const CovariateDist& xdist, TreatmentBranch branch,
                                  const MeanFieldOptions& opt = {});

struct GraphonEffects {
    double de = 0.0;
    double ie = 0.0;
    double value = 0.0;    // mean-field value at the given parameters, uniform branch
    double fd_gap = 0.0;   // worst one-sided derivative disagreement seen
};

// limiting effects by numerical differentiation of the mean-field value:
// de = 2 d/dtau (central differences + Richardson), ie from the gamma
// derivative of both treatment branches minus de/2. A one-sided derivative
// gap above 10 * fd_step raises NumericalError (non-differentiable point,
// message carries both one-sided values).
GraphonEffects limiting_effects_graphon(const BlockGraphon& w, const OutcomeParams& p,
                                        const CovariateDist& xdist, double fd_step = 1e-3,
                                        const MeanFieldOptions& opt = {});

}  // namespace spinfer
