#include <doctest.h>

#include <cmath>

#include "lindley/cusum.hpp"
#include "lindley/fet.hpp"

using namespace lindley;
using namespace lindley::cusum;

TEST_CASE("log_mgf") {
    CHECK(std::abs(log_mgf({{0.0, 1.0}, 0.5, 3.0}) - 0.2876821) < 1e-7);
    CHECK(log_mgf({{0.0, 1.0}, 0.5, 3.0}) == doctest::Approx(-std::log(0.75)).epsilon(1e-15));
    CHECK(log_mgf({{1.0, 1.0}, 0.0, 3.0}) == 0.0);
    CHECK(log_mgf({{0.3, 2.0}, 0.4, 3.0}) == doctest::Approx(0.12 - std::log(0.36)).epsilon(1e-15));
    CHECK(log_mgf({{0.3, 2.0}, 0.4, 3.0}) == doctest::Approx(1.1417).epsilon(1e-4));
    CHECK_THROWS_AS(log_mgf({{0.0, 1.0}, 1.0, 3.0}), DomainError);
    CHECK_THROWS_AS(log_mgf({{0.0, 1.0}, -1.5, 3.0}), DomainError);
}

TEST_CASE("llr_params") {
    const CusumSpec spec{{0.0, 1.0}, 0.5, 3.0};
    const auto p = llr_params(spec);
    CHECK(p.mu == doctest::Approx(std::log(0.75)).epsilon(1e-15));
    CHECK(p.sigma == 0.5);
    CHECK(post_change_mean(spec) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK_NOTHROW(llr_params({{0.0, 1.0}, kThetaMin, 3.0}));
    CHECK_THROWS_AS(llr_params({{0.0, 1.0}, 0.5e-6, 3.0}), DomainError);
    CHECK_THROWS_AS(llr_params({{0.0, 1.0}, 1.5, 3.0}), DomainError);
    CHECK_THROWS_AS(llr_params({{0.0, 1.0}, 0.5, 0.0}), DomainError);
    // the stored spec reproduces the mapped law exactly
    CHECK(llr_params(spec).mu == llr_params(spec).mu);
    CHECK(detector_config(spec, 0.0).params.mu == p.mu);
    CHECK(detector_config(spec, 0.0).params.sigma == p.sigma);
    CHECK_THROWS_AS(detector_config(spec, 3.0), DomainError);
}

TEST_CASE("pre-change log-likelihood ratio has negative mean") {
    for (double mu : {-2.0, 0.0, 0.7}) {
        for (double sigma : {0.25, 1.0, 3.0}) {
            for (int k = 1; k < 100; ++k) {
                const double theta = k / (100.0 * sigma);
                CHECK(llr_params({{mu, sigma}, theta, 1.0}).mu < 0.0);
            }
        }
    }
}

TEST_CASE("run length pmf is the mapped exit-time pmf") {
    for (double theta : {0.1, 0.5, 0.9}) {
        const CusumSpec spec{{0.0, 1.0}, theta, 3.0};
        const auto rl = run_length_distribution(spec, 0.0, 80);
        REQUIRE(rl.size() == 80);
        const ProcessConfig cfg{llr_params(spec), 0.0, 3.0};
        for (int n = 1; n <= 80; ++n) CHECK(rl[static_cast<std::size_t>(n - 1)] == fet_pmf(cfg, n)(0.0));
    }
    const auto rl = run_length_distribution({{0.0, 1.0}, 0.5, 3.0}, 1.0, 100);
    double s = 0.0;
    for (double p : rl) {
        CHECK(p >= 0.0);
        s += p;
    }
    CHECK(s <= 1.0 + 1e-12);
    CHECK(average_run_length({{0.0, 1.0}, 0.5, 3.0}, 0.0) ==
          mean_fet({llr_params({{0.0, 1.0}, 0.5, 3.0}), 0.0, 3.0}).mean);
}

TEST_CASE("detector Monte Carlo") {
    const CusumSpec spec{{0.0, 1.0}, 0.5, 3.0};
    oracle::McConfig mc;
    mc.trajectories = 1000000;
    mc.n_max = 0;
    mc.fet_cap = 100000;
    const auto r = simulate_detector(spec, 0.0, mc);
    const auto rl = run_length_distribution(spec, 0.0, 60);
    for (int n = 1; n <= 60; ++n) {
        const double p = rl[static_cast<std::size_t>(n - 1)];
        const double se = std::sqrt(std::max(p, 1.0 / 1e6) / 1e6);
        INFO("n=" << n);
        CHECK(std::abs(r.fet_pmf(n) - p) < 4 * se);
    }
    const double arl = average_run_length(spec, 0.0);
    CHECK(r.fet_censored == 0);
    CHECK(std::abs(r.fet_mean - arl) < 4 * r.fet_mean_se);

    mc.trajectories = 200000;
    const auto ooc = simulate_detector(spec, 0.0, mc, true);
    CHECK(ooc.fet_mean < 0.1 * arl);
}

TEST_CASE("out-of-control increments follow the tilted law") {
    const CusumSpec spec{{0.2, 1.5}, 0.4, 100.0};
    oracle::McConfig mc;
    mc.trajectories = 1000000;
    mc.n_max = 1;
    mc.domain_hi = 200.0;
    mc.fet_cap = 1;
    const auto r = simulate_detector(spec, 50.0, mc, true);
    const double expected = 50.0 + spec.theta * post_change_mean(spec) - log_mgf(spec);
    CHECK(r.atom_freq_by_n[1] == 0.0);
    CHECK(std::abs(r.mean_by_n[1] - expected) < 4 * r.mean_se_by_n[1]);
}
