#include "spinfer/mpl.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "spinfer/errors.hpp"
#include "spinfer/numerics.hpp"

namespace spinfer {

namespace {

// generic logistic-family pseudo-likelihood: response r_i in {-1,+1}, field
// base_i + z . u_i, parameters boxed coordinatewise
struct Design {
    const std::vector<int>* resp = nullptr;
    std::vector<double> base;
    std::vector<std::vector<double>> u;
    std::vector<double> bound;
};

PllValue eval_design(const Design& dz, const std::vector<double>& z) {
    const int n = static_cast<int>(dz.base.size());
    const int p = static_cast<int>(z.size());
    CompensatedSum val;
    std::vector<CompensatedSum> grad(p);
    for (int i = 0; i < n; ++i) {
        double m = dz.base[i];
        for (int k = 0; k < p; ++k) m += z[k] * dz.u[i][k];
        double r = (*dz.resp)[i];
        val.add(r * m - log_2cosh(m));
        double res = r - std::tanh(m);
        for (int k = 0; k < p; ++k) grad[k].add(res * dz.u[i][k]);
    }
    PllValue out;
    out.value = val.value();
    out.gradient.resize(p);
    for (int k = 0; k < p; ++k) out.gradient[k] = grad[k].value();
    return out;
}

// solve S x = b for symmetric positive definite S (row-major), in place
std::vector<double> cholesky_solve(std::vector<double> s, std::vector<double> b) {
    const int p = static_cast<int>(b.size());
    for (int k = 0; k < p; ++k) {
        double d = s[k * p + k];
        for (int j = 0; j < k; ++j) d -= s[k * p + j] * s[k * p + j];
        if (d <= 0.0) throw NumericalError("fit: pseudo-likelihood Hessian not definite");
        d = std::sqrt(d);
        s[k * p + k] = d;
        for (int i = k + 1; i < p; ++i) {
            double v = s[i * p + k];
            for (int j = 0; j < k; ++j) v -= s[i * p + j] * s[k * p + j];
            s[i * p + k] = v / d;
        }
    }
    for (int i = 0; i < p; ++i) {
        double v = b[i];
        for (int j = 0; j < i; ++j) v -= s[i * p + j] * b[j];
        b[i] = v / s[i * p + i];
    }
    for (int i = p - 1; i >= 0; --i) {
        double v = b[i];
        for (int j = i + 1; j < p; ++j) v -= s[j * p + i] * b[j];
        b[i] = v / s[i * p + i];
    }
    return b;
}

double projected_grad_norm(const std::vector<double>& z, const std::vector<double>& g,
                           const std::vector<double>& bound) {
    double w = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        bool pinned_hi = z[k] >= bound[k] && g[k] > 0.0;
        bool pinned_lo = z[k] <= -bound[k] && g[k] < 0.0;
        if (!pinned_hi && !pinned_lo) w = std::max(w, std::fabs(g[k]));
    }
    return w;
}

FitDiagnostics newton_ascend(const Design& dz, std::vector<double>& z,
                             const NewtonOptions& opt) {
    const int n = static_cast<int>(dz.base.size());
    const int p = static_cast<int>(z.size());
    for (int k = 0; k < p; ++k) z[k] = std::clamp(z[k], -dz.bound[k], dz.bound[k]);

    FitDiagnostics diag;
    PllValue cur = eval_design(dz, z);
    for (int it = 0; it < opt.max_iterations; ++it) {
        diag.grad_norm = projected_grad_norm(z, cur.gradient, dz.bound);
        if (diag.grad_norm <= opt.grad_tol) {
            diag.converged = true;
            break;
        }
        diag.iterations = it + 1;
        // S = sum_i sech2(m_i) u_i u_i^T, damped
        std::vector<double> s(static_cast<std::size_t>(p) * p, 0.0);
        for (int i = 0; i < n; ++i) {
            double m = dz.base[i];
            for (int k = 0; k < p; ++k) m += z[k] * dz.u[i][k];
            double w = sech2(m);
            for (int k = 0; k < p; ++k)
                for (int l = 0; l <= k; ++l) s[k * p + l] += w * dz.u[i][k] * dz.u[i][l];
        }
        for (int k = 0; k < p; ++k) {
            s[k * p + k] += 1e-8;
            for (int l = 0; l < k; ++l) s[l * p + k] = s[k * p + l];
        }
        std::vector<double> step = cholesky_solve(std::move(s), cur.gradient);
        double dirdot = 0.0;
        for (int k = 0; k < p; ++k) dirdot += step[k] * cur.gradient[k];

        double eta = 1.0;
        bool moved = false;
        while (eta >= 1e-12) {
            std::vector<double> zt(p);
            for (int k = 0; k < p; ++k)
                zt[k] = std::clamp(z[k] + eta * step[k], -dz.bound[k], dz.bound[k]);
            PllValue trial = eval_design(dz, zt);
            if (trial.value >= cur.value + 1e-4 * eta * dirdot ||
                (trial.value > cur.value && eta < 1.0)) {
                z = std::move(zt);
                cur = std::move(trial);
                moved = true;
                break;
            }
            eta /= 2.0;
        }
        if (!moved) break;  // projected stationary point or numerical floor
    }
    diag.objective = cur.value;
    diag.grad_norm = projected_grad_norm(z, cur.gradient, dz.bound);
    if (diag.grad_norm <= opt.grad_tol) diag.converged = true;
    for (int k = 0; k < p; ++k)
        if (std::fabs(z[k]) >= dz.bound[k]) diag.boundary = true;
    return diag;
}

}  // namespace

void ObservedData::validate() const {
    const int m = n();
    if (static_cast<int>(y.size()) != m || static_cast<int>(t.size()) != m)
        throw SpecError("ObservedData: outcome/treatment length != n");
    if (x.n != m) throw SpecError("ObservedData: covariate rows != n");
    for (int v : y)
        if (v != 1 && v != -1) throw SpecError("ObservedData: outcomes must be +-1");
    for (int v : t)
        if (v != 1 && v != -1) throw SpecError("ObservedData: treatments must be +-1");
    if (propensity_coupling.n() != 0 && propensity_coupling.n() != m)
        throw SpecError("ObservedData: propensity coupling size != n");
}

PllValue pseudo_log_likelihood(const OutcomeParams& p, const ObservedData& data) {
    data.validate();
    p.validate();
    if (p.d() != data.x.d) throw SpecError("pseudo_log_likelihood: theta dim != covariate dim");
    Design dz;
    dz.resp = &data.y;
    dz.base = data.a.matrix().matvec_spins(data.y);
    for (auto& b : dz.base) b += p.gamma;
    const int n = data.n();
    dz.u.resize(n);
    for (int i = 0; i < n; ++i) {
        dz.u[i].push_back(data.t[i]);
        for (int j = 0; j < data.x.d; ++j) dz.u[i].push_back(data.x.at(i, j));
    }
    std::vector<double> z;
    z.push_back(p.tau);
    for (double v : p.theta) z.push_back(v);
    return eval_design(dz, z);
}

MplFit fit_mpl(const ObservedData& data, const OutcomeParams& init, const NewtonOptions& opt) {
    data.validate();
    if (init.d() != data.x.d) throw SpecError("fit_mpl: theta dim != covariate dim");
    Design dz;
    dz.resp = &data.y;
    dz.base = data.a.matrix().matvec_spins(data.y);
    for (auto& b : dz.base) b += init.gamma;
    const int n = data.n();
    dz.u.resize(n);
    for (int i = 0; i < n; ++i) {
        dz.u[i].push_back(data.t[i]);
        for (int j = 0; j < data.x.d; ++j) dz.u[i].push_back(data.x.at(i, j));
    }
    dz.bound.push_back(kTauBound);
    for (int j = 0; j < data.x.d; ++j) dz.bound.push_back(kThetaBound);

    std::vector<double> z;
    z.push_back(init.tau);
    for (double v : init.theta) z.push_back(v);

    MplFit fit;
    fit.diag = newton_ascend(dz, z, opt);
    fit.params.tau = z[0];
    fit.params.theta.assign(z.begin() + 1, z.end());
    fit.params.gamma = init.gamma;
    return fit;
}

PropensityFit fit_propensity(const ObservedData& data, const PropensityParams& init,
                             const NewtonOptions& opt) {
    data.validate();
    if (init.d() != data.x.d) throw SpecError("fit_propensity: coef dim != covariate dim");
    Design dz;
    dz.resp = &data.t;
    if (data.propensity_coupling.n() != 0)
        dz.base = data.propensity_coupling.matvec_spins(data.t);
    else
        dz.base.assign(data.n(), 0.0);
    const int n = data.n();
    dz.u.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < data.x.d; ++j) dz.u[i].push_back(data.x.at(i, j));
    dz.bound.assign(data.x.d, kThetaBound);

    std::vector<double> z = init.coef;
    PropensityFit fit;
    fit.diag = newton_ascend(dz, z, opt);
    fit.params.coef = z;
    return fit;
}

PlugInResult plug_in(const ObservedData& data, const CovariateDist& xdist,
                     const PlugInOptions& opt) {
    PlugInResult out;
    out.fit = fit_mpl(data, opt.init, opt.newton);
    if (opt.method == PlugInMethod::block) {
        auto est = block_estimate_effects(data.a, out.fit.params, xdist, opt.block);
        out.de = est.de;
        out.de_se = est.de_se;
        out.ie = est.ie;
        out.ie_se = est.ie_se;
    } else {
        auto est = amp_estimate_effects(data.a, opt.beta, out.fit.params, xdist, opt.amp);
        out.de = est.de;
        out.de_se = est.de_se;
        out.ie = est.ie;
        out.ie_se = est.ie_se;
    }
    return out;
}

}  // namespace spinfer
