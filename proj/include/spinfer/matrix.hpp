#pragma once

#include <string>
#include <vector>

namespace spinfer {

// dense symmetric matrix, full row-major storage
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    int n() const { return n_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }
    void set(int i, int j, double v) {
        a_[idx(i, j)] = v;
        a_[idx(j, i)] = v;
    }

    std::vector<double> matvec(const std::vector<double>& v) const;
    std::vector<double> matvec_spins(const std::vector<int>& s) const;
    // (1/2) s^T A s for spin vectors
    double half_quad_spins(const std::vector<int>& s) const;

    double max_abs() const;
    double frobenius() const;
    const std::vector<double>& data() const { return a_; }
    double* raw() { return a_.data(); }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n_ + j;
    }
    int n_ = 0;
    std::vector<double> a_;
};

// interaction matrix of the outcome (or propensity) model:
// symmetric, zero diagonal, finite entries; validated on construction
class InteractionMatrix {
  public:
    InteractionMatrix() = default;
    explicit InteractionMatrix(SymMatrix m);

    int n() const { return m_.n(); }
    double operator()(int i, int j) const { return m_(i, j); }
    const SymMatrix& matrix() const { return m_; }

    // max_ij |n A(i,j)|, the dense-regime scale
    double dense_scale() const { return m_.max_abs() * m_.n(); }
    bool is_zero() const;

  private:
    SymMatrix m_;
};

// text format: first line "n <int>", then n rows of n whitespace-separated
// doubles; symmetry is validated on load
void save_matrix(const std::string& path, const SymMatrix& m);
SymMatrix load_matrix(const std::string& path);

}  // namespace spinfer
