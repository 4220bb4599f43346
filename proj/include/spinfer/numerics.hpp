#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace spinfer {

// log(2 cosh x) without overflow
double log_2cosh(double x);
// 1 - tanh^2, stable for large |x|
double sech2(double x);

// Neumaier compensated accumulator
class CompensatedSum {
  public:
    void add(double x);
    void scale(double c) {
        sum_ *= c;
        comp_ *= c;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// streaming log-sum-exp accumulator (compensated inner sum)
class LogSumExp {
  public:
    void add(double log_term);
    double value() const;
    bool empty() const { return empty_; }

  private:
    double max_ = 0.0;
    CompensatedSum sum_;
    bool empty_ = true;
};

double log_sum_exp(const std::vector<double>& log_terms);

// Gauss-Hermite rule for weight exp(-x^2) (physicists' convention).
// E[f(mu + sigma Z)] = sum_i weights[i]/sqrt(pi) * f(mu + sigma*sqrt(2)*nodes[i])
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    // expectation of f under N(mu, sigma^2)
    template <typename F>
    double expect(double mu, double sigma, F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(mu + sigma * 1.4142135623730951 * nodes[i]);
        return acc * 0.5641895835477563;  // 1/sqrt(pi)
    }
};

GaussHermite gauss_hermite(int order);

// cubic (Catmull-Rom) interpolation on a uniform grid; beyond the grid the
// function is extended linearly (slope from the boundary) or by the boundary value
enum class Extend { linear, constant };

class GridFunction {
  public:
    GridFunction() = default;
    GridFunction(double x0, double step, std::vector<double> values,
                 Extend mode = Extend::linear);

    double operator()(double x) const;
    double x_min() const { return x0_; }
    double x_max() const { return x0_ + step_ * static_cast<double>(values_.size() - 1); }
    const std::vector<double>& values() const { return values_; }
    double step() const { return step_; }

  private:
    double x0_ = 0.0;
    double step_ = 1.0;
    std::vector<double> values_;
    Extend mode_ = Extend::linear;
};

// trapezoid rule on an explicit grid
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

// lgamma-based table of log k!, k = 0..n
std::vector<double> log_factorial_table(int n);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_and_se(const std::vector<double>& values);

// Nelder-Mead minimization, standard coefficients
struct NelderMeadOptions {
    int max_evals = 4000;
    double f_tol = 1e-10;
    double x_tol = 1e-9;
    double initial_step = 0.5;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const NelderMeadOptions& opts = {});

}  // namespace spinfer
