#include "spinfer/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spinfer/errors.hpp"

namespace spinfer {

double log_2cosh(double x) {
    double a = std::fabs(x);
    return a + std::log1p(std::exp(-2.0 * a));
}

double sech2(double x) {
    double t = std::tanh(x);
    return 1.0 - t * t;
}

void LogSumExp::add(double log_term) {
    if (empty_) {
        max_ = log_term;
        sum_.add(1.0);
        empty_ = false;
        return;
    }
    if (log_term <= max_) {
        sum_.add(std::exp(log_term - max_));
    } else {
        sum_.scale(std::exp(max_ - log_term));
        sum_.add(1.0);
        max_ = log_term;
    }
}

double LogSumExp::value() const {
    if (empty_) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_.value());
}

double log_sum_exp(const std::vector<double>& log_terms) {
    LogSumExp acc;
    for (double t : log_terms) acc.add(t);
    return acc.value();
}

void CompensatedSum::add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
        comp_ += (sum_ - t) + x;
    else
        comp_ += (x - t) + sum_;
    sum_ = t;
}

GaussHermite gauss_hermite(int order) {
    if (order < 1 || order > 200) throw SpecError("gauss_hermite: order out of range");
    const int n = order;
    GaussHermite rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    const double pim4 = 0.7511255444649425;  // pi^{-1/4}
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        // initial guesses, then Newton on the orthonormal recurrence
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-15) break;
        }
        rule.nodes[i] = z;
        rule.nodes[n - 1 - i] = -z;
        rule.weights[i] = 2.0 / (pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    // ascending order
    std::reverse(rule.nodes.begin(), rule.nodes.end());
    std::reverse(rule.weights.begin(), rule.weights.end());
    return rule;
}

GridFunction::GridFunction(double x0, double step, std::vector<double> values, Extend mode)
    : x0_(x0), step_(step), values_(std::move(values)), mode_(mode) {
    if (values_.size() < 4) throw SpecError("GridFunction: need at least 4 points");
    if (!(step_ > 0.0)) throw SpecError("GridFunction: step must be positive");
}

double GridFunction::operator()(double x) const {
    const std::size_t n = values_.size();
    const double xmax = x0_ + step_ * static_cast<double>(n - 1);
    if (x <= x0_) {
        if (mode_ == Extend::constant) return values_.front();
        double slope = (values_[1] - values_[0]) / step_;
        return values_.front() + slope * (x - x0_);
    }
    if (x >= xmax) {
        if (mode_ == Extend::constant) return values_.back();
        double slope = (values_[n - 1] - values_[n - 2]) / step_;
        return values_.back() + slope * (x - xmax);
    }
    double u = (x - x0_) / step_;
    auto k = static_cast<std::ptrdiff_t>(u);
    if (k > static_cast<std::ptrdiff_t>(n - 2)) k = static_cast<std::ptrdiff_t>(n - 2);
    double t = u - static_cast<double>(k);
    auto at = [&](std::ptrdiff_t i) {
        if (i < 0) i = 0;
        if (i > static_cast<std::ptrdiff_t>(n - 1)) i = static_cast<std::ptrdiff_t>(n - 1);
        return values_[static_cast<std::size_t>(i)];
    };
    double p0 = at(k - 1), p1 = at(k), p2 = at(k + 1), p3 = at(k + 2);
    double a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    double b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    double c = -0.5 * p0 + 0.5 * p2;
    return ((a * t + b) * t + c) * t + p1;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw SpecError("trapezoid: grid/value size mismatch");
    if (x.size() < 2) throw SpecError("trapezoid: need at least 2 points");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    return acc;
}

std::vector<double> log_factorial_table(int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    return t;
}

MeanSe mean_and_se(const std::vector<double>& values) {
    MeanSe out;
    const auto k = values.size();
    if (k == 0) throw SpecError("mean_and_se: empty sample");
    CompensatedSum s;
    for (double v : values) s.add(v);
    out.mean = s.value() / static_cast<double>(k);
    if (k == 1) return out;
    CompensatedSum q;
    for (double v : values) q.add((v - out.mean) * (v - out.mean));
    out.se = std::sqrt(q.value() / static_cast<double>(k - 1) / static_cast<double>(k));
    return out;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t d = x0.size();
    NelderMeadResult res;
    std::vector<std::vector<double>> simplex(d + 1, x0);
    for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += opts.initial_step;
    std::vector<double> fv(d + 1);
    int evals = 0;
    for (std::size_t i = 0; i <= d; ++i) {
        fv[i] = f(simplex[i]);
        ++evals;
    }
    std::vector<std::size_t> idx(d + 1);
    while (evals < opts.max_evals) {
        for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        double fbest = fv[idx[0]], fworst = fv[idx[d]];
        double xspread = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            xspread = std::max(xspread, std::fabs(simplex[idx[d]][i] - simplex[idx[0]][i]));
        if (std::fabs(fworst - fbest) < opts.f_tol && xspread < opts.x_tol) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) centroid[j] += simplex[idx[i]][j];
        }
        for (std::size_t j = 0; j < d; ++j) centroid[j] /= static_cast<double>(d);
        auto blend = [&](double coef) {
            std::vector<double> p(d);
            for (std::size_t j = 0; j < d; ++j)
                p[j] = centroid[j] + coef * (simplex[idx[d]][j] - centroid[j]);
            return p;
        };
        auto xr = blend(-1.0);
        double fr = f(xr);
        ++evals;
        if (fr < fv[idx[0]]) {
            auto xe = blend(-2.0);
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                simplex[idx[d]] = xe;
                fv[idx[d]] = fe;
            } else {
                simplex[idx[d]] = xr;
                fv[idx[d]] = fr;
            }
        } else if (fr < fv[idx[d - 1]]) {
            simplex[idx[d]] = xr;
            fv[idx[d]] = fr;
        } else {
            auto xc = blend(fr < fv[idx[d]] ? -0.5 : 0.5);
            double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fv[idx[d]])) {
                simplex[idx[d]] = xc;
                fv[idx[d]] = fc;
            } else {
                // shrink toward best
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t j = 0; j < d; ++j)
                        simplex[idx[i]][j] = simplex[idx[0]][j] +
                                             0.5 * (simplex[idx[i]][j] - simplex[idx[0]][j]);
                    fv[idx[i]] = f(simplex[idx[i]]);
                    ++evals;
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= d; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = simplex[best];
    res.value = fv[best];
    res.evals = evals;
    return res;
}

}  // namespace spinfer
