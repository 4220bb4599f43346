#pragma once

#include <vector>

#include "spinfer/numerics.hpp"

namespace spinfer {

// discrete order-parameter measure on [0,1]: atoms at q_1 < ... < q_J with
// cumulative masses m_1 <= ... <= m_J = 1
struct ParisiMeasure {
    std::vector<double> q;
    std::vector<double> m;

    int levels() const { return static_cast<int>(q.size()); }
    double cdf(double s) const;  // mu([0, s])
    void validate() const;
};

// law of the site field: treatment sign t with offset h, field = tau*t + h
struct FieldAtom {
    double t = 1.0;
    double h = 0.0;
    double prob = 1.0;
};

struct FieldDistribution {
    double tau = 0.0;
    std::vector<FieldAtom> atoms;

    double max_field() const;
    void validate() const;
};

struct PdeOptions {
    double x_max = 0.0;  // 0: pick 12 + max field + 4 beta
    double dx = 0.01;
    int gh_order = 41;
};

// backward recursion between atoms: on an interval of cumulative mass m and
// width dq, Phi(lo, x) = (1/m) log E exp(m Phi(hi, x + beta Z sqrt(dq)))
// (plain Gaussian smoothing when m = 0), derivative grids propagated under the
// tilted weights; the terminal slice is log 2cosh x
struct ParisiGrids {
    std::vector<double> q;  // breakpoints ascending: 0, atoms, 1
    std::vector<GridFunction> phi;
    std::vector<GridFunction> dphi;
    std::vector<GridFunction> ddphi;
    double max_excursion = 0.0;  // worst pre-clamp bound violation

    int index_of(double qval) const;
};

ParisiGrids solve_parisi_pde(const ParisiMeasure& mu, double beta, const PdeOptions& opt = {});

// (beta^2/2) sum_j m_j (q_{j+1}^2 - q_j^2) / 2 with q_{J+1} = 1
double parisi_compensator(const ParisiMeasure& mu, double beta);

// E_field Phi(0, tau T + H) minus the compensator
double parisi_functional(const ParisiMeasure& mu, double beta, const FieldDistribution& f,
                         const PdeOptions& opt = {});

struct MinimizeOptions {
    int max_levels = 2;
    double dx = 0.01;
    int gh_order = 41;
    int nm_evals = 400;
};

struct ParisiMinimum {
    ParisiMeasure measure;
    double value = 0.0;
    std::vector<double> param_grad;  // FD gradient in the unconstrained chart
    int evals = 0;
    std::vector<double> value_by_levels;  // best value found for J = 1, 2, ...
};

// nested minimization over J-atom measures: q's through stick-breaking
// sigmoids, masses through a softmax with the last logit pinned, warm starts
// from the previous level
ParisiMinimum minimize_parisi(double beta, const FieldDistribution& f,
                              const MinimizeOptions& opt = {});

struct LimitingEffects {
    double de = 0.0;
    double ie = 0.0;
    double value = 0.0;        // minimized functional, uniform-treatment fields
    double value_minus = 0.0;  // minimized functional, all-(-1) fields
    ParisiMeasure measure;
    ParisiMeasure measure_minus;
};

// de = 2 E[T dPhi(0, tau T + H)]; ie compares the mean response against the
// all-(-1) branch minimized separately
LimitingEffects limiting_effects(double beta, const FieldDistribution& f,
                                 const MinimizeOptions& opt = {});

}  // namespace spinfer
