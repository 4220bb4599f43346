#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <string>

#include "spinfer/errors.hpp"
#include "spinfer/matrix.hpp"
#include "test_util.hpp"

using namespace spinfer;

TEST_CASE("symmetric storage mirrors entries") {
    SymMatrix m(4);
    m.set(1, 3, 2.5);
    CHECK(m(1, 3) == 2.5);
    CHECK(m(3, 1) == 2.5);
    CHECK(m(0, 0) == 0.0);
    CHECK(m.max_abs() == 2.5);
}

TEST_CASE("matvec and quadratic form agree with loops") {
    auto m = testutil::random_symmetric(7, 0.8, 91);
    std::vector<double> v(7);
    for (int i = 0; i < 7; ++i) v[i] = 0.1 * i - 0.3;
    auto out = m.matvec(v);
    for (int i = 0; i < 7; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 7; ++j) acc += m(i, j) * v[j];
        CHECK(out[i] == doctest::Approx(acc).epsilon(1e-14));
    }
    std::vector<int> s = {1, -1, 1, 1, -1, -1, 1};
    double q = 0.0;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) q += 0.5 * m(i, j) * s[i] * s[j];
    CHECK(m.half_quad_spins(s) == doctest::Approx(q).epsilon(1e-13));
    auto fs = m.matvec_spins(s);
    for (int i = 0; i < 7; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 7; ++j) acc += m(i, j) * s[j];
        CHECK(fs[i] == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("interaction matrix rejects bad input") {
    SymMatrix d(3);
    d.set(0, 0, 1.0);
    CHECK_THROWS_AS(InteractionMatrix{d}, SpecError);

    SymMatrix nf(2);
    nf.set(0, 1, std::nan(""));
    CHECK_THROWS_AS(InteractionMatrix{nf}, SpecError);

    SymMatrix ok(3);
    ok.set(0, 1, 0.2);
    ok.set(1, 2, -0.1);
    InteractionMatrix a(ok);
    CHECK(a.n() == 3);
    CHECK(a.dense_scale() == doctest::Approx(0.6));
    CHECK_FALSE(a.is_zero());
    CHECK(InteractionMatrix(SymMatrix(3)).is_zero());
}

TEST_CASE("save and load round-trip the matrix exactly") {
    auto m = testutil::random_symmetric(9, 1.7, 2024);
    std::string path = "roundtrip_matrix.txt";
    save_matrix(path, m);
    auto back = load_matrix(path);
    REQUIRE(back.n() == 9);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 9; ++j) CHECK(back(i, j) == m(i, j));
    std::remove(path.c_str());
}

TEST_CASE("load rejects asymmetric files") {
    std::string path = "bad_matrix.txt";
    FILE* f = std::fopen(path.c_str(), "w");
    std::fprintf(f, "n 2\n0 1\n2 0\n");
    std::fclose(f);
    CHECK_THROWS_AS(load_matrix(path), SpecError);
    std::remove(path.c_str());
}
