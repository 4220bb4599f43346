#pragma once

#include <cstdint>
#include <vector>

#include "spinfer/matrix.hpp"
#include "spinfer/rng.hpp"

namespace spinfer {

// parameter box (outcome coefficient bounds)
inline constexpr double kTauBound = 5.0;
inline constexpr double kThetaBound = 5.0;

// outcome model: density on y in {+-1}^n proportional to
//   exp( (1/2) y^T A y + sum_i y_i (tau t_i + theta.x_i + gamma) )
struct OutcomeParams {
    double tau = 0.0;
    std::vector<double> theta;
    double gamma = 0.0;  // partition tilt, not a model coefficient

    int d() const { return static_cast<int>(theta.size()); }
    void validate() const;
};

// treatment model: density on t proportional to
//   exp( (1/2) t^T M t + sum_i t_i coef.x_i )
struct PropensityParams {
    std::vector<double> coef;

    int d() const { return static_cast<int>(coef.size()); }
};

// n rows of d covariates, row-major
struct Covariates {
    int n = 0;
    int d = 0;
    std::vector<double> x;

    Covariates() = default;
    Covariates(int n_, int d_) : n(n_), d(d_), x(static_cast<std::size_t>(n_) * d_, 0.0) {}

    static Covariates empty(int n) { return Covariates(n, 0); }
    double at(int i, int j) const { return x[static_cast<std::size_t>(i) * d + j]; }
    double& at(int i, int j) { return x[static_cast<std::size_t>(i) * d + j]; }
    const double* row(int i) const { return x.data() + static_cast<std::size_t>(i) * d; }
};

// covariate law: none (d = 0), finite support (levels x probs), or iid uniform
// on [-1,1]^d
class CovariateDist {
  public:
    enum class Kind { none, finite, uniform_box };

    static CovariateDist none();
    static CovariateDist finite(std::vector<std::vector<double>> levels,
                                std::vector<double> probs);
    static CovariateDist uniform_box(int d);

    Kind kind() const { return kind_; }
    int d() const { return d_; }
    int support_size() const;  // 1 for none, -1 for continuous laws
    const std::vector<std::vector<double>>& levels() const { return levels_; }
    const std::vector<double>& probs() const { return probs_; }

    Covariates sample(int n, Rng& rng) const;

  private:
    Kind kind_ = Kind::none;
    int d_ = 0;
    std::vector<std::vector<double>> levels_;
    std::vector<double> probs_;
};

// site fields h_i = tau t_i + theta.x_i + gamma
std::vector<double> site_fields(const OutcomeParams& p, const std::vector<int>& t,
                                const Covariates& x);
std::vector<double> propensity_fields(const PropensityParams& p, const Covariates& x);

double hamiltonian(const InteractionMatrix& a, const OutcomeParams& p,
                   const std::vector<int>& y, const std::vector<int>& t,
                   const Covariates& x);

// field seen by site i given the rest: (A y)_i + h_i; the conditional mean of
// Y_i is tanh of this
double conditional_field(const InteractionMatrix& a, const OutcomeParams& p, int i,
                         const std::vector<int>& y, const std::vector<int>& t,
                         const Covariates& x);

// interaction generators
InteractionMatrix make_zero(int n);
InteractionMatrix make_curie_weiss(int n, double beta);
// contiguous blocks with given fractions; A(i,j) = strength(b_i, b_j)/n
InteractionMatrix make_blockmodel(int n, const std::vector<double>& fractions,
                                  const SymMatrix& strength);
// A(i,j) = beta/(n p) on iid Bernoulli(p) edges
InteractionMatrix make_erdos_renyi(int n, double p, double beta, std::uint64_t seed);
// A = beta G with G(i,j) ~ N(0, 1/n) iid above the diagonal, symmetrized
InteractionMatrix make_gaussian(int n, double beta, std::uint64_t seed);

std::vector<int> block_assignment(int n, const std::vector<double>& fractions);

// treatments: M = 0 samples exactly (iid, P(T_i = +1) = sigmoid(2 h_i));
// otherwise heat-bath sweeps from the all-(+1) start
std::vector<int> sample_treatments(const SymMatrix& coupling, const PropensityParams& p,
                                   const Covariates& x, int sweeps, Rng& rng);

Covariates sample_covariates(const CovariateDist& dist, int n, Rng& rng);

// one estimator replicate: T uniform on {+-1}^n, X iid from dist
struct ReplicateDraw {
    std::vector<int> t;
    Covariates x;
};
ReplicateDraw draw_replicate(const CovariateDist& dist, int n, Rng& rng);

}  // namespace spinfer
