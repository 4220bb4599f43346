#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"
#include "spinfer/parisi.hpp"

namespace spinfer {

// denoiser slices of the solved measure: g = dPhi(q, .) and ddPhi(q, .) at
// q = inf supp(mu*), clamped to 0 when the optimizer parks the first atom
// below 1e-4 (replica-symmetric regime)
struct AmpKernel {
    GridFunction g;
    GridFunction dg;
    double q = 0.0;
    double x_hi = 0.0;  // solved grid is [-x_hi, x_hi]
};

AmpKernel make_amp_kernel(const ParisiMeasure& mu, double beta, double x_max,
                          double dx = 0.01, int gh_order = 41);

struct AmpOptions {
    int iterations = 30;
    double dx = 0.01;
    int gh_order = 41;
    bool keep_history = false;

    void validate() const;
};

struct AmpState {
    std::vector<double> m;             // final iterate m^M
    std::vector<double> onsager;       // d_k per round (first entry 0)
    std::vector<double> self_overlap;  // (1/n)||m^k||^2, k = 1..M
    std::vector<std::vector<double>> history;  // m^1..m^M when requested
    double q = 0.0;
    int iterations = 0;
    bool grid_extended = false;
};

// iteration on a = beta G, G(i,j) ~ N(0, 1/n):
//   w^{k+1} = a m^k - beta^2 d_k m^{k-1},  d_k = (1/n) sum_i ddPhi(q, x_i^k)
//   x^{k+1} = w^{k+1} + h1 + h2,  m^{k+1} = g(x^{k+1})
// from m^0 = m^{-1} = 0; if an iterate leaves the solved grid the PDE is
// re-solved once on a wider range and the run restarts
AmpState amp_run(const InteractionMatrix& a, double beta, const std::vector<double>& h1,
                 const std::vector<double>& h2, const ParisiMeasure& mu_star,
                 const AmpOptions& opt = {});

// (2/n) sum_i t_i m_i; the literal variant drops the factor 2
double amp_de(const AmpState& state, const std::vector<int>& t_bar,
              bool paper_literal = false);
// mean(m) - mean(m_minus) - de/2; the literal variant subtracts de
double amp_ie(const AmpState& state, const AmpState& state_minus, double de,
              bool paper_literal = false);

struct StateEvolution {
    std::vector<double> a;     // a_0..a_M, a_{k+1} = phi(a_k)
    double q = 0.0;            // predicted (1/n)||m^M||^2
    double var_w = 0.0;        // beta^2 q
};

// phi(t) = beta^2 E_F,G1[ (E_Z g(F + G1 sqrt(t) + Z sqrt(beta^2 q - t)))^2 ],
// nested one-dimensional quadratures after conditioning on the shared Gaussian
StateEvolution state_evolution(double beta, const FieldDistribution& f,
                               const ParisiMeasure& mu_star, int iterations,
                               int gh_order = 41);

// law of tau*T + theta.x + gamma under T uniform and x from a finite law
FieldDistribution field_law(const OutcomeParams& p, const CovariateDist& xdist);

struct AmpEstimatorOptions {
    int iterations = 30;
    int replicates = 50;
    int max_levels = 2;
    double dx = 0.01;
    int gh_order = 41;
    std::uint64_t seed = 1;
    bool paper_literal_estimators = false;

    void validate() const;
};

struct AmpEstimate {
    double de = 0.0;
    double de_se = 0.0;
    double ie = 0.0;
    double ie_se = 0.0;
    double q = 0.0;
    double a_last = 0.0;  // state-evolution endpoint at M
    int levels = 0;       // atoms in the minimizing measure
    int replicates = 0;
    int iterations = 0;
};

// replicate machinery over (T, X) draws with shared minimizing measures: the
// uniform-treatment measure drives the DE runs, the all-(-1) measure the
// comparison runs for IE
AmpEstimate amp_estimate_effects(const InteractionMatrix& a, double beta,
                                 const OutcomeParams& p, const CovariateDist& xdist,
                                 const AmpEstimatorOptions& opt = {});

struct StabilityProbe {
    std::vector<double> delta;  // (1/n)||m^k - m~^k||^2, k = 1..M
    double max_delta = 0.0;
};

// paired runs on one matrix: fields sampled from the law, then perturbed by
// eps rademacher signs, with the measure re-minimized for the perturbed law
StabilityProbe amp_stability_probe(const InteractionMatrix& a, double beta,
                                   const FieldDistribution& f, double eps, int iterations,
                                   const MinimizeOptions& mopt, std::uint64_t seed);

}  // namespace spinfer
