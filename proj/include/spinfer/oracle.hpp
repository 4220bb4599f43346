#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"

namespace spinfer {

// enumeration budgets; hard caps keep memory and runtime sane on one core
struct OracleLimit {
    int max_n = 20;                          // spin enumeration cap (hard cap 24)
    int max_treatment_n = 14;                // full treatment enumeration cap (hard cap 20)
    std::int64_t max_covariate_states = 1000000;  // full covariate enumeration cap
    int mc_draws = 400;                      // monte_carlo mode replicate count
    int covariate_mc_draws = 200;            // covariate fallback draws inside full mode

    void check_spin(int n) const;
    void check_treatment(int n) const;
};

// log sum_y exp((1/2) y^T A y + y^T h), streaming log-sum-exp over a Gray-code
// enumeration with O(n) incremental field updates per flip
double exact_log_partition(const InteractionMatrix& a, const std::vector<double>& fields,
                           const OracleLimit& lim = {});

// <Y_i> under the same measure, two-pass enumeration
std::vector<double> exact_marginals(const InteractionMatrix& a,
                                    const std::vector<double>& fields,
                                    const OracleLimit& lim = {});

enum class OracleMode { full, monte_carlo };

struct OracleEstimate {
    double value = 0.0;
    double se = 0.0;        // 0 for pure full mode
    OracleMode mode = OracleMode::full;
    int draws = 0;          // MC draws actually used
    bool covariate_mc = false;  // full mode fell back to MC over covariates
};

OracleEstimate exact_direct_effect(const InteractionMatrix& a, const OutcomeParams& p,
                                   const CovariateDist& xdist, OracleMode mode,
                                   std::uint64_t seed, const OracleLimit& lim = {});

OracleEstimate exact_indirect_effect(const InteractionMatrix& a, const OutcomeParams& p,
                                     const CovariateDist& xdist, OracleMode mode,
                                     std::uint64_t seed, const OracleLimit& lim = {});

// site-level effects at a fixed rest-treatment: DE_i flips T_i, IE_i compares
// the T_i = -1 arm against the all-(-1) assignment
struct UnitEffects {
    double de = 0.0;
    double ie = 0.0;
};
UnitEffects unit_effects(const InteractionMatrix& a, const OutcomeParams& p, int site,
                         std::vector<int> t, const Covariates& x, const OracleLimit& lim = {});

// Per-treatment aggregates for ALL 2^n treatment vectors at once. The coupling
// exp(tau y^T t) factors over sites into 2x2 matrices, so one spin sweep plus
// n butterfly passes (normalized by 1/(2 cosh tau), which keeps every
// intermediate bounded) produces, for each treatment index (bit i set means
// t_i = +1):
//   z[t]   = Z(t) / ((2 cosh tau)^n e^shift)
//   ty[t]  = z[t] * <y^T t>
//   ysum[t]= z[t] * <sum_i y_i>
struct TreatmentAggregates {
    std::vector<double> z;
    std::vector<double> ty;
    std::vector<double> ysum;
};
TreatmentAggregates treatment_aggregates(const InteractionMatrix& a, double tau,
                                         const std::vector<double>& base_fields,
                                         const OracleLimit& lim = {});

}  // namespace spinfer
