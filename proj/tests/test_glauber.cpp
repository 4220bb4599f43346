#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spinfer/errors.hpp"
#include "spinfer/glauber.hpp"
#include "spinfer/oracle.hpp"
#include "test_util.hpp"

using namespace spinfer;

TEST_CASE("config validation rejects nonsense") {
    ChainConfig c;
    c.sweeps = 0;
    CHECK_THROWS_AS(c.validate(), SpecError);
    c = ChainConfig{};
    c.burn_in = c.sweeps;
    CHECK_THROWS_AS(c.validate(), SpecError);
    c = ChainConfig{};
    c.thin = 0;
    CHECK_THROWS_AS(c.validate(), SpecError);
    CHECK_NOTHROW(ChainConfig{}.validate());
}

TEST_CASE("chain reproduces exact marginals on a small instance") {
    const int n = 5;
    auto a = testutil::random_interaction(n, 0.5, 31);
    auto h = testutil::random_fields(n, 0.4, 32);
    auto exact = exact_marginals(a, h);
    ChainConfig cfg;
    cfg.sweeps = 60000;
    cfg.burn_in = 2000;
    auto res = run_chain(a.matrix(), h, cfg, 2024);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(res.mean_spin[i] - exact[i]) < 0.02);
    CHECK(res.recorded == 58000);
}

TEST_CASE("identical seeds give identical chains") {
    auto a = testutil::random_interaction(8, 0.6, 41);
    auto h = testutil::random_fields(8, 0.3, 42);
    ChainConfig cfg;
    cfg.sweeps = 500;
    cfg.burn_in = 100;
    auto r1 = run_chain(a.matrix(), h, cfg, 9);
    auto r2 = run_chain(a.matrix(), h, cfg, 9);
    for (int i = 0; i < 8; ++i) CHECK(r1.mean_spin[i] == r2.mean_spin[i]);
    CHECK(r1.mean_magnetization == r2.mean_magnetization);
    auto r3 = run_chain(a.matrix(), h, cfg, 10);
    CHECK(r1.mean_magnetization != r3.mean_magnetization);
}

TEST_CASE("trace bookkeeping honors burn-in and thinning") {
    auto a = testutil::random_interaction(4, 0.2, 51);
    std::vector<double> h(4, 0.1);
    ChainConfig cfg;
    cfg.sweeps = 100;
    cfg.burn_in = 50;
    cfg.thin = 10;
    auto res = run_chain(a.matrix(), h, cfg, 3);
    CHECK(res.recorded == 5);
    CHECK(res.magnetization_trace.size() == 5);
}

TEST_CASE("systematic scan also targets the right distribution") {
    const int n = 4;
    auto a = testutil::random_interaction(n, 0.6, 61);
    auto h = testutil::random_fields(n, 0.5, 62);
    auto exact = exact_marginals(a, h);
    ChainConfig cfg;
    cfg.sweeps = 60000;
    cfg.burn_in = 2000;
    cfg.systematic_scan = true;
    auto res = run_chain(a.matrix(), h, cfg, 77);
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(res.mean_spin[i] - exact[i]) < 0.02);
}

TEST_CASE("metastability gap separates fast and slow regimes") {
    const int n = 100;
    OutcomeParams p;  // no treatment effect, no fields
    std::vector<int> t(n, 1);
    p.tau = 0.0;
    Covariates x = Covariates::empty(n);
    ChainConfig cfg;
    cfg.sweeps = 3000;
    cfg.burn_in = 500;

    auto hot = make_curie_weiss(n, 0.4);
    CHECK(metastability_gap(hot, p, t, x, cfg, 11) < 0.1);

    auto cold = make_curie_weiss(n, 2.0);
    CHECK(metastability_gap(cold, p, t, x, cfg, 11) > 1.0);
}

TEST_CASE("sampling estimates agree with the full oracle") {
    const int n = 10;
    auto a = make_curie_weiss(n, 0.6);
    OutcomeParams p;
    p.tau = 0.5;
    auto dist = CovariateDist::none();
    auto de_full = exact_direct_effect(a, p, dist, OracleMode::full, 1);
    auto ie_full = exact_indirect_effect(a, p, dist, OracleMode::full, 1);
    ChainConfig cfg;
    cfg.sweeps = 1500;
    cfg.burn_in = 300;
    auto est = glauber_estimate_effects(a, p, dist, 60, cfg, 404);
    CHECK(est.replicates == 60);
    CHECK(est.de_se > 0.0);
    CHECK(std::abs(est.de - de_full.value) < 3.5 * est.de_se + 0.01);
    CHECK(std::abs(est.ie - ie_full.value) < 3.5 * est.ie_se + 0.01);
}
