#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spinfer/errors.hpp"
#include "spinfer/model.hpp"
#include "spinfer/regularity.hpp"
#include "test_util.hpp"

#ifdef SPINFER_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace spinfer;

namespace {

SymMatrix exact_block_matrix(int n, const std::vector<double>& fractions,
                             const SymMatrix& strength) {
    auto b = block_assignment(n, fractions);
    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) a.set(i, j, strength(b[i], b[j]) / n);
    return a;
}

}  // namespace

TEST_CASE("spectral norm of hand-computable matrices") {
    SymMatrix m(2);
    m.set(0, 1, 3.0);
    CHECK(spectral_norm(m) == doctest::Approx(3.0).epsilon(1e-12));

    // rank one: v v^T has norm |v|^2
    std::vector<double> v = {1.0, -2.0, 0.5, 3.0};
    SymMatrix r1(4);
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) r1.set(i, j, v[i] * v[j]);
    double vv = 1.0 + 4.0 + 0.25 + 9.0;
    CHECK(spectral_norm(r1) == doctest::Approx(vv).epsilon(1e-12));

    CHECK(spectral_norm(SymMatrix(5)) == 0.0);
}

#ifdef SPINFER_HAVE_EIGEN
TEST_CASE("spectral norm matches a dense eigensolver") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        auto m = testutil::random_symmetric(50, 1.0, seed);
        Eigen::MatrixXd em(50, 50);
        for (int i = 0; i < 50; ++i)
            for (int j = 0; j < 50; ++j) em(i, j) = m(i, j);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(em);
        double want = std::max(std::fabs(es.eigenvalues()(0)), std::fabs(es.eigenvalues()(49)));
        CHECK(spectral_norm(m) == doctest::Approx(want).epsilon(1e-6));
    }
}
#endif

TEST_CASE("exactly block-constant matrices are certified to zero residual") {
    SymMatrix strength(3);
    strength.set(0, 0, 2.0);
    strength.set(0, 1, -1.0);
    strength.set(0, 2, 0.5);
    strength.set(1, 1, 1.5);
    strength.set(1, 2, -0.7);
    strength.set(2, 2, 1.0);
    auto a = exact_block_matrix(60, {0.3, 0.3, 0.4}, strength);
    auto dec = block_approximation(a, 1e-9, 8);
    CHECK(dec.target_met);
    CHECK(dec.residual_norm <= 1e-9);
    CHECK(dec.num_blocks() >= 3);
    CHECK(dec.num_blocks() <= 8);
    // the fitted dense matrix reproduces the input entrywise
    auto dense = block_matrix_dense(dec);
    double max_err = 0.0;
    for (int i = 0; i < 60; ++i)
        for (int j = 0; j < 60; ++j)
            max_err = std::max(max_err, std::fabs(dense(i, j) - a(i, j)));
    CHECK(max_err < 1e-12);
}

TEST_CASE("curie-weiss collapses to one block with O(1/n) residual") {
    const int n = 100;
    const double beta = 1.2;
    auto a = make_curie_weiss(n, beta);
    auto dec = block_approximation(a.matrix(), 0.02, 8);
    CHECK(dec.target_met);
    CHECK(dec.num_blocks() == 1);
    CHECK(dec.residual_norm <= 1.5 * beta / n);
    CHECK(dec.coefficients(0, 0) == doctest::Approx(beta * (n - 1) / n).epsilon(1e-12));
}

TEST_CASE("residual history is monotone under refinement") {
    auto m = testutil::random_symmetric(40, 0.3, 77);
    auto dec = block_approximation(m, 0.0, 8);
    REQUIRE(dec.residual_history.size() >= 2);
    for (std::size_t i = 1; i < dec.residual_history.size(); ++i)
        CHECK(dec.residual_history[i] <= dec.residual_history[i - 1] + 1e-9);
    CHECK(dec.residual_norm == dec.residual_history.back());
    CHECK(dec.rounds_used == (int)dec.residual_history.size());
}

TEST_CASE("reported residual is the norm of the dense difference") {
    auto m = testutil::random_symmetric(30, 0.5, 99);
    auto dec = block_approximation(m, 0.0, 4);
    auto dense = block_matrix_dense(dec);
    SymMatrix diff(30);
    for (int i = 0; i < 30; ++i)
        for (int j = i; j < 30; ++j) diff.set(i, j, m(i, j) - dense(i, j));
    CHECK(dec.residual_norm == doctest::Approx(spectral_norm(diff)).epsilon(1e-9));
}

TEST_CASE("apply_block_matrix equals the dense matvec") {
    auto m = testutil::random_symmetric(35, 0.4, 123);
    auto dec = block_approximation(m, 0.0, 4);
    auto dense = block_matrix_dense(dec);
    auto v = testutil::random_fields(35, 1.0, 124);
    auto fast = apply_block_matrix(dec, v);
    auto slow = dense.matvec(v);
    for (int i = 0; i < 35; ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("input validation") {
    SymMatrix m(3);
    CHECK_THROWS_AS(block_approximation(m, -1.0, 4), SpecError);
    CHECK_THROWS_AS(block_approximation(m, 0.1, 0), SpecError);
    BlockApproximation b;
    b.partition = {0, 0};
    b.coefficients = SymMatrix(1);
    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(apply_block_matrix(b, wrong), SpecError);
}
