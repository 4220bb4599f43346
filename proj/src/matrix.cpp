#include "spinfer/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinfer/errors.hpp"

namespace spinfer {

std::vector<double> SymMatrix::matvec(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != n_) throw SpecError("matvec: size mismatch");
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const double* row = a_.data() + static_cast<std::size_t>(i) * n_;
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += row[j] * v[j];
        out[i] = acc;
    }
    return out;
}

std::vector<double> SymMatrix::matvec_spins(const std::vector<int>& s) const {
    if (static_cast<int>(s.size()) != n_) throw SpecError("matvec_spins: size mismatch");
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
        const double* row = a_.data() + static_cast<std::size_t>(i) * n_;
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) acc += s[j] > 0 ? row[j] : -row[j];
        out[i] = acc;
    }
    return out;
}

double SymMatrix::half_quad_spins(const std::vector<int>& s) const {
    auto f = matvec_spins(s);
    double acc = 0.0;
    for (int i = 0; i < n_; ++i) acc += s[i] > 0 ? f[i] : -f[i];
    return 0.5 * acc;
}

double SymMatrix::max_abs() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::fabs(v));
    return m;
}

double SymMatrix::frobenius() const {
    double acc = 0.0;
    for (double v : a_) acc += v * v;
    return std::sqrt(acc);
}

InteractionMatrix::InteractionMatrix(SymMatrix m) : m_(std::move(m)) {
    const int n = m_.n();
    if (n <= 0) throw SpecError("InteractionMatrix: empty matrix");
    for (int i = 0; i < n; ++i) {
        if (m_(i, i) != 0.0)
            throw SpecError("InteractionMatrix: nonzero diagonal at index " + std::to_string(i));
        for (int j = i + 1; j < n; ++j) {
            if (!std::isfinite(m_(i, j)))
                throw SpecError("InteractionMatrix: non-finite entry at (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
            if (m_(i, j) != m_(j, i))
                throw SpecError("InteractionMatrix: asymmetric at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
        }
    }
}

bool InteractionMatrix::is_zero() const {
    return m_.max_abs() == 0.0;
}

void save_matrix(const std::string& path, const SymMatrix& m) {
    std::ofstream out(path);
    if (!out) throw SpecError("save_matrix: cannot open " + path);
    out << "n " << m.n() << "\n";
    char buf[32];
    for (int i = 0; i < m.n(); ++i) {
        for (int j = 0; j < m.n(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf << (j + 1 == m.n() ? "" : " ");
        }
        out << "\n";
    }
    if (!out) throw SpecError("save_matrix: write failed for " + path);
}

SymMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("load_matrix: cannot open " + path);
    std::string tag;
    int n = 0;
    in >> tag >> n;
    if (tag != "n" || n <= 0)
        throw SpecError("load_matrix: bad header in " + path + " (want 'n <int>')");
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v;
            if (!(in >> v))
                throw SpecError("load_matrix: short read at row " + std::to_string(i) + " col " +
                                std::to_string(j));
            m.raw()[static_cast<std::size_t>(i) * n + j] = v;
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (m(i, j) != m(j, i))
                throw SpecError("load_matrix: asymmetric entry at (" + std::to_string(i) + "," +
                                std::to_string(j) + ") in " + path);
    return m;
}

}  // namespace spinfer
