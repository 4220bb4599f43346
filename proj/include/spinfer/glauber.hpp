#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"
#include "spinfer/rng.hpp"

namespace spinfer {

enum class ChainStart { all_plus, all_minus, random };

struct ChainConfig {
    int sweeps = 1000;
    int burn_in = 200;
    int thin = 1;
    bool systematic_scan = false;  // default: random site order
    ChainStart start = ChainStart::random;

    void validate() const;
};

// one heat-bath sweep: n single-site resamples of the measure
// proportional to exp((1/2) y^T A y + y^T h); the spin cache `fields` holds
// (A y)_i and is kept current
void glauber_sweep(const SymMatrix& a, const std::vector<double>& h, std::vector<int>& y,
                   Rng& rng, bool systematic = false);

struct ChainResult {
    std::vector<double> mean_spin;            // time-averaged tanh of the local field
    double mean_magnetization = 0.0;          // time average of (1/n) sum_i y_i
    std::vector<double> magnetization_trace;  // one entry per recorded sweep
    int recorded = 0;
};

ChainResult run_chain(const SymMatrix& a, const std::vector<double>& h,
                      const ChainConfig& cfg, std::uint64_t seed);

ChainResult run_outcome_chain(const InteractionMatrix& a, const OutcomeParams& p,
                              const std::vector<int>& t, const Covariates& x,
                              const ChainConfig& cfg, std::uint64_t seed);

// |mean magnetization from all_plus - mean magnetization from all_minus|;
// large gap flags a mixing failure of the sampling route
double metastability_gap(const InteractionMatrix& a, const OutcomeParams& p,
                         const std::vector<int>& t, const Covariates& x,
                         const ChainConfig& cfg, std::uint64_t seed);

// sampling-baseline effect estimates: k replicates of (T, X), one chain per
// measure, time-averaged y^T t and sum_i y_i
struct GlauberEstimate {
    double de = 0.0;
    double ie = 0.0;
    double de_se = 0.0;
    double ie_se = 0.0;
    int replicates = 0;
};

GlauberEstimate glauber_estimate_effects(const InteractionMatrix& a, const OutcomeParams& p,
                                         const CovariateDist& xdist, int replicates,
                                         const ChainConfig& cfg, std::uint64_t seed);

}  // namespace spinfer
