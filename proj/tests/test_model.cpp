#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>

#include "spinfer/errors.hpp"
#include "spinfer/model.hpp"
#include "test_util.hpp"

using namespace spinfer;

TEST_CASE("parameter validation enforces the boxes") {
    OutcomeParams p;
    p.tau = 0.4;
    p.theta = {1.0, -2.0};
    p.gamma = 0.1;
    CHECK_NOTHROW(p.validate());
    p.tau = 5.0001;
    CHECK_THROWS_AS(p.validate(), SpecError);
    p.tau = 0.4;
    p.theta[1] = -6.0;
    CHECK_THROWS_AS(p.validate(), SpecError);
    p.theta[1] = std::nan("");
    CHECK_THROWS_AS(p.validate(), SpecError);
}

TEST_CASE("site fields combine treatment, covariates, and offset") {
    OutcomeParams p;
    p.tau = 0.5;
    p.theta = {2.0, -1.0};
    p.gamma = 0.25;
    Covariates x(3, 2);
    x.at(0, 0) = 1.0;
    x.at(0, 1) = 0.5;
    x.at(2, 0) = -1.0;
    std::vector<int> t = {1, -1, 1};
    auto h = site_fields(p, t, x);
    CHECK(h[0] == doctest::Approx(0.5 + 2.0 - 0.5 + 0.25));
    CHECK(h[1] == doctest::Approx(-0.5 + 0.25));
    CHECK(h[2] == doctest::Approx(0.5 - 2.0 + 0.25));

    std::vector<int> bad = {1, 0, 1};
    CHECK_THROWS_AS(site_fields(p, bad, x), SpecError);
}

TEST_CASE("hamiltonian matches the long-double reference") {
    auto a = testutil::random_interaction(6, 0.5, 17);
    OutcomeParams p;
    p.tau = 0.3;
    p.theta = {0.7};
    p.gamma = -0.2;
    Covariates x(6, 1);
    for (int i = 0; i < 6; ++i) x.at(i, 0) = 0.2 * i - 0.5;
    std::vector<int> t = {1, 1, -1, 1, -1, -1};
    std::vector<int> y = {-1, 1, 1, -1, 1, -1};
    auto h = site_fields(p, t, x);
    double expect = (double)testutil::hamiltonian_ld(a.matrix(), h, y);
    CHECK(hamiltonian(a, p, y, t, x) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("conditional field gives the exact single-site mean") {
    auto a = testutil::random_interaction(5, 0.6, 23);
    OutcomeParams p;
    p.tau = 0.2;
    p.gamma = 0.1;
    Covariates x = Covariates::empty(5);
    std::vector<int> t = {1, -1, 1, 1, -1};
    std::vector<int> y = {1, 1, -1, 1, -1};
    auto h = site_fields(p, t, x);
    const int site = 2;
    auto yp = y, ym = y;
    yp[site] = 1;
    ym[site] = -1;
    long double wp = expl(testutil::hamiltonian_ld(a.matrix(), h, yp));
    long double wm = expl(testutil::hamiltonian_ld(a.matrix(), h, ym));
    double cond_mean = (double)((wp - wm) / (wp + wm));
    double f = conditional_field(a, p, site, y, t, x);
    CHECK(std::tanh(f) == doctest::Approx(cond_mean).epsilon(1e-13));
}

TEST_CASE("interaction generators have the advertised structure") {
    auto cw = make_curie_weiss(8, 1.2);
    for (int i = 0; i < 8; ++i) {
        CHECK(cw(i, i) == 0.0);
        for (int j = 0; j < 8; ++j)
            if (i != j) CHECK(cw(i, j) == doctest::Approx(1.2 / 8));
    }
    CHECK(cw.dense_scale() == doctest::Approx(1.2));

    SymMatrix strength(2);
    strength.set(0, 0, 1.0);
    strength.set(0, 1, -0.5);
    strength.set(1, 1, 2.0);
    auto bm = make_blockmodel(10, {0.5, 0.5}, strength);
    CHECK(bm(0, 1) == doctest::Approx(1.0 / 10));
    CHECK(bm(0, 9) == doctest::Approx(-0.5 / 10));
    CHECK(bm(8, 9) == doctest::Approx(2.0 / 10));
    CHECK(bm(3, 3) == 0.0);

    auto g1 = make_gaussian(12, 0.8, 99);
    auto g2 = make_gaussian(12, 0.8, 99);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) CHECK(g1(i, j) == g2(i, j));
    auto g3 = make_gaussian(12, 0.8, 100);
    CHECK(g1(0, 1) != g3(0, 1));

    auto er = make_erdos_renyi(30, 0.4, 0.9, 7);
    double expect = 0.9 / (30 * 0.4);
    int edges = 0;
    for (int i = 0; i < 30; ++i)
        for (int j = i + 1; j < 30; ++j) {
            if (er(i, j) != 0.0) {
                CHECK(er(i, j) == doctest::Approx(expect));
                ++edges;
            }
        }
    // 435 pairs at p=0.4
    CHECK(edges > 100);
    CHECK(edges < 260);

    CHECK(make_zero(5).is_zero());
}

TEST_CASE("block assignment is contiguous and respects fractions") {
    auto blocks = block_assignment(10, {0.3, 0.7});
    REQUIRE(blocks.size() == 10);
    CHECK(blocks[0] == 0);
    CHECK(blocks[2] == 0);
    CHECK(blocks[3] == 1);
    CHECK(blocks[9] == 1);
    CHECK_THROWS_AS(block_assignment(10, {0.5, 0.4}), SpecError);
}

TEST_CASE("independent treatment sampling matches the logistic probabilities") {
    PropensityParams p;
    p.coef = {1.0};
    Covariates x(2000, 1);
    for (int i = 0; i < 2000; ++i) x.at(i, 0) = (i % 2 == 0) ? 0.8 : -0.8;
    SymMatrix m0(2000);
    Rng rng(314);
    int plus_hi = 0, plus_lo = 0;
    const int reps = 40;
    for (int r = 0; r < reps; ++r) {
        auto t = sample_treatments(m0, p, x, 0, rng);
        for (int i = 0; i < 2000; ++i) {
            if (i % 2 == 0)
                plus_hi += t[i] == 1;
            else
                plus_lo += t[i] == 1;
        }
    }
    double p_hi = 1.0 / (1.0 + std::exp(-2.0 * 0.8));
    double p_lo = 1.0 / (1.0 + std::exp(-2.0 * -0.8));
    CHECK((double)plus_hi / (1000 * reps) == doctest::Approx(p_hi).epsilon(0.03));
    CHECK((double)plus_lo / (1000 * reps) == doctest::Approx(p_lo).epsilon(0.06));
}

TEST_CASE("covariate distributions sample what they promise") {
    Rng rng(55);
    auto fin = CovariateDist::finite({{1.0}, {-1.0}}, {0.25, 0.75});
    auto x = fin.sample(8000, rng);
    REQUIRE(x.d == 1);
    int hi = 0;
    for (int i = 0; i < 8000; ++i) {
        CHECK((x.at(i, 0) == 1.0 || x.at(i, 0) == -1.0));
        hi += x.at(i, 0) == 1.0;
    }
    CHECK((double)hi / 8000 == doctest::Approx(0.25).epsilon(0.1));

    auto ub = CovariateDist::uniform_box(2);
    auto xb = ub.sample(500, rng);
    for (int i = 0; i < 500; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(xb.at(i, j) >= -1.0);
            CHECK(xb.at(i, j) <= 1.0);
        }

    auto none = CovariateDist::none();
    auto xn = none.sample(10, rng);
    CHECK(xn.d == 0);
    CHECK(none.support_size() == 1);
    CHECK(fin.support_size() == 2);
    CHECK(ub.support_size() == -1);

    CHECK_THROWS_AS(CovariateDist::finite({{1.0}}, {0.5}), SpecError);
}

TEST_CASE("replicate draws are deterministic given the rng state") {
    OutcomeParams op;
    op.tau = 0.3;
    auto dist = CovariateDist::uniform_box(1);
    Rng a(777), b(777);
    auto r1 = draw_replicate(dist, 6, a);
    auto r2 = draw_replicate(dist, 6, b);
    CHECK(r1.t == r2.t);
    for (int i = 0; i < 6; ++i) CHECK(r1.x.at(i, 0) == r2.x.at(i, 0));
}
