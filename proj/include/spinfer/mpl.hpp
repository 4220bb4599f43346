#pragma once

#include <vector>

#include "spinfer/amp.hpp"
#include "spinfer/block_estimator.hpp"
#include "spinfer/matrix.hpp"
#include "spinfer/model.hpp"

namespace spinfer {

struct ObservedData {
    std::vector<int> y;
    std::vector<int> t;
    Covariates x;
    InteractionMatrix a;
    SymMatrix propensity_coupling;  // size 0 means no coupling

    int n() const { return a.n(); }
    void validate() const;
};

struct PllValue {
    double value = 0.0;
    std::vector<double> gradient;  // d/dtau first, then d/dtheta
};

// sum_i [y_i m_i - log 2cosh m_i] with m_i = (A y)_i + tau t_i + theta.x_i + gamma;
// concave in (tau, theta), gamma held fixed
PllValue pseudo_log_likelihood(const OutcomeParams& p, const ObservedData& data);

struct NewtonOptions {
    int max_iterations = 100;
    double grad_tol = 1e-8;
};

struct FitDiagnostics {
    double objective = 0.0;
    double grad_norm = 0.0;  // projected-gradient max norm at the solution
    int iterations = 0;
    bool converged = false;
    bool boundary = false;  // a coordinate sits on the parameter box
};

struct MplFit {
    OutcomeParams params;
    FitDiagnostics diag;
};

// damped Newton with backtracking, projected onto the parameter box
MplFit fit_mpl(const ObservedData& data, const OutcomeParams& init,
               const NewtonOptions& opt = {});

struct PropensityFit {
    PropensityParams params;
    FitDiagnostics diag;
};

PropensityFit fit_propensity(const ObservedData& data, const PropensityParams& init,
                             const NewtonOptions& opt = {});

enum class PlugInMethod { block, amp };

struct PlugInOptions {
    PlugInMethod method = PlugInMethod::block;
    BlockEstimatorOptions block;
    AmpEstimatorOptions amp;
    double beta = 0.0;   // interaction scale, amp path only
    OutcomeParams init;  // starting point; its gamma stays fixed
    NewtonOptions newton;
};

struct PlugInResult {
    double de = 0.0;
    double de_se = 0.0;
    double ie = 0.0;
    double ie_se = 0.0;
    MplFit fit;
};

// refit (tau, theta) from the observed outcomes, then run the chosen effect
// estimator at the fitted parameters
PlugInResult plug_in(const ObservedData& data, const CovariateDist& xdist,
                     const PlugInOptions& opt);

}  // namespace spinfer
