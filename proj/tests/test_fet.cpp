#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "lindley/density.hpp"
#include "lindley/fet.hpp"
#include "lindley/oracle.hpp"

using namespace lindley;

namespace {

struct Case {
    double mu, sigma, h;
};

const Case kCases[] = {{0.3, 1.0, 3.0}, {2.0, 1.0, 1.0}, {-0.3, 1.0, 3.0}, {-2.0, 1.0, 1.0}, {0.0, 1.0, 3.0},
                       {0.3, 0.1, 3.0}, {1.0, 0.5, 3.0}, {3.0, 2.0, 3.0}, {-3.0, 0.5, 3.0}, {0.75, 2.0, 3.0},
                       {-0.6, 0.5, 1.2}, {0.0, 0.3, 2.0}};

}  // namespace

TEST_CASE("base values") {
    CHECK(fet_pmf({{0.3, 1.0}, 1.0, 3.0}, 1)(1.0) == doctest::Approx(std::exp(-1.7) / 2).epsilon(1e-15));
    CHECK(fet_pmf({{0.3, 1.0}, 1.0, 3.0}, 1)(1.0) == doctest::Approx(0.0913418).epsilon(1e-6));
    CHECK(fet_pmf({{0.0, 1.0}, 0.0, 3.0}, 1)(0.0) == doctest::Approx(0.0248935).epsilon(1e-6));
    CHECK(fet_pmf({{-0.3, 1.0}, 1.0, 3.0}, 1)(1.0) == doctest::Approx(0.0501294).epsilon(1e-6));
    CHECK(fet_pmf({{0.0, 1.0}, 1.0, 3.0}, 1)(1.0) == doctest::Approx(0.0676676).epsilon(1e-6));
    CHECK_THROWS_AS(fet_pmf({{0.3, 1.0}, 1.0, 3.0}, 1)(3.0), DomainError);
    CHECK_THROWS_AS(fet_pmf({{0.3, 1.0}, 1.0, 3.0}, 0), DomainError);
}

TEST_CASE("piece counts") {
    const double tol = 1e-12 * 3;
    for (int n = 1; n <= 15; ++n) {
        CHECK(ell_n(0.3, 3.0, n, tol) == std::min(n + 1, 10));
        CHECK(h_n(-0.3, 3.0, n, tol) == std::min(n, 11));
        CHECK(fet_pmf({{0.3, 1.0}, 0.0, 3.0}, n).pieces.size() == static_cast<std::size_t>(std::min(n + 1, 10)));
        CHECK(fet_pmf({{-0.3, 1.0}, 0.0, 3.0}, n).pieces.size() == static_cast<std::size_t>(std::min(n, 10)));
        CHECK(fet_pmf({{-0.4, 1.0}, 0.0, 3.0}, n).pieces.size() == static_cast<std::size_t>(std::min(n, 8)));
    }
}

TEST_CASE("seeds of the 0 < mu < h recursion") {
    const auto p = fet_base({{0.3, 1.0}, 0.0, 3.0});
    REQUIRE(p.pieces.size() == 2);
    CHECK(evaluate_segment(p.pieces[0], 0.0, 1.0) == doctest::Approx(std::exp(-2.7) / 2).epsilon(1e-15));
    CHECK(evaluate_segment(p.pieces[1], 2.7, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.pieces[1].const_term * std::exp(p.pieces[1].log_scale) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("constant part is carried along the shift") {
    const ProcessConfig cfg{{0.3, 1.0}, 0.0, 3.0};
    const auto d = fet_distribution(cfg, 6);
    for (int n = 1; n < 6; ++n) {
        const auto& next = d.at(n + 1);
        const auto& prev = d.at(n);
        for (const auto& piece : next.pieces) {
            const double mid = 0.5 * (piece.lo + piece.hi) + 0.3;
            const double eta_next = piece.const_term * std::exp(piece.log_scale);
            double eta_prev = 0.0;
            if (mid < 3.0) {
                const auto& src = prev.pieces[prev.locate(mid)];
                eta_prev = src.const_term * std::exp(src.log_scale);
            }
            CHECK(eta_next == doctest::Approx(eta_prev).epsilon(1e-14));
        }
    }
}

TEST_CASE("high boundary-crossing drift") {
    const ProcessConfig cfg{{2.0, 1.0}, 0.0, 1.0};
    const auto [e1, b1] = fet_mu_pos_high(cfg, 1);
    CHECK(e1 + b1 == doctest::Approx(0.8160603).epsilon(1e-7));
    const auto [e2, b2] = fet_mu_pos_high(cfg, 2);
    CHECK(e2 + b2 == doctest::Approx(std::exp(-1.0) / 2 - std::exp(-3.0) / 2).epsilon(1e-14));
    CHECK(e2 + b2 == doctest::Approx(0.1590462).epsilon(1e-7));
    double s = 0.0;
    for (int n = 1; n <= 40; ++n) s += fet_pmf(cfg, n)(0.0);
    CHECK(std::abs(s - 1.0) < 1e-10);
    CHECK_THROWS_AS(fet_mu_pos_high({{0.3, 1.0}, 0.0, 3.0}, 1), RegimeError);
}

TEST_CASE("high boundary-crossing negative drift") {
    const ProcessConfig cfg{{-2.0, 1.0}, 0.0, 1.0};
    const auto [e1, a1] = fet_mu_neg_high(cfg, 1);
    CHECK(e1 == 0.0);
    CHECK(a1 == doctest::Approx(0.0248935).epsilon(1e-6));
    const auto [e2, a2] = fet_mu_neg_high(cfg, 2);
    CHECK(a2 == 0.0);
    CHECK(e2 == doctest::Approx(a1).epsilon(1e-15));
    // geometric decay of the tail
    double prev = fet_pmf(cfg, 100)(0.5);
    for (int n = 101; n <= 300; n += 50) {
        const double p = fet_pmf(cfg, n)(0.5);
        CHECK(p < prev);
        prev = p;
    }
    const double r1 = fet_pmf(cfg, 201)(0.5) / fet_pmf(cfg, 200)(0.5);
    const double r2 = fet_pmf(cfg, 301)(0.5) / fet_pmf(cfg, 300)(0.5);
    CHECK(r1 < 1.0);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-6));
    CHECK_THROWS_AS(fet_mu_neg_high({{-0.3, 1.0}, 0.0, 3.0}, 1), RegimeError);
}

TEST_CASE("zero drift recursion") {
    const ProcessConfig cfg{{0.0, 1.0}, 1.0, 3.0};
    auto s = fet_initial_state(cfg);
    for (int n = 1; n <= 10; ++n) {
        REQUIRE(s.pmf.pieces.size() == 1);
        CHECK(s.pmf.pieces[0].a.size() == static_cast<std::size_t>(n));
        CHECK(s.pmf.pieces[0].b.size() == static_cast<std::size_t>(n - 1));
        s = step_fet_mu_zero(s);
    }
    CHECK_THROWS_AS(step_fet_mu_zero(fet_initial_state({{0.3, 1.0}, 1.0, 3.0})), RegimeError);
    CHECK_THROWS_AS(step_fet_mu_pos(fet_initial_state({{0.0, 1.0}, 1.0, 3.0})), RegimeError);
    CHECK_THROWS_AS(step_fet_mu_neg(fet_initial_state({{0.0, 1.0}, 1.0, 3.0})), RegimeError);
}

TEST_CASE("specialised and generic steps agree") {
    for (const auto& c : kCases) {
        const ProcessConfig cfg{{c.mu, c.sigma}, 0.0, c.h};
        auto a = fet_initial_state(cfg);
        auto g = a;
        for (int n = 2; n <= 60; ++n) {
            a = step_fet(a);
            g = step_fet_generic(g);
            for (int i = 0; i < 40; ++i) {
                const double x = c.h * i / 40.0;
                CHECK(std::abs(a.pmf(x) - g.pmf(x)) <= 1e-9 * std::abs(g.pmf(x)) + 1e-15);
            }
        }
    }
}

TEST_CASE("P(1|x) = 1 - F_1(h|x)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double h = 0.2 + 4 * u(rng);
        const double mu = (u(rng) - 0.5) * 3 * h;
        const ProcessConfig cfg{{mu, 0.1 + 2 * u(rng)}, h * u(rng), h};
        const double f = cdf(one_step_law(cfg), h);
        CHECK(std::abs(fet_pmf(cfg, 1)(cfg.x) - (1.0 - f)) < 1e-14);
    }
}

TEST_CASE("agreement with the exit-recursion quadrature") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> node(0, 2000);
    for (const auto& c : kCases) {
        const ProcessConfig cfg{{c.mu, c.sigma}, 0.0, c.h};
        auto e = oracle::exit_base(cfg, 2001);
        const auto d = fet_distribution(cfg, 15);
        for (int n = 1; n <= 15; ++n) {
            if (n > 1) e = oracle::exit_recursion_step(e, cfg);
            for (int k = 0; k < 50; ++k) {
                const int i = node(rng);
                if (i == 2000) continue;
                const double x = e.delta() * i;
                const double p = d.at(n)(x);
                INFO("mu=" << c.mu << " sigma=" << c.sigma << " n=" << n << " x=" << x);
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                CHECK(std::abs(p - e.values[static_cast<std::size_t>(i)]) < 1e-6);
            }
        }
    }
}

TEST_CASE("continuity at interior knots") {
    for (const auto& c : kCases) {
        const ProcessConfig cfg{{c.mu, c.sigma}, 0.0, c.h};
        const auto d = fet_distribution(cfg, 30);
        for (int n = 2; n <= 30; ++n) {
            const auto& p = d.at(n);
            for (std::size_t k = 0; k + 1 < p.pieces.size(); ++k) {
                const double knot = p.pieces[k].hi;
                const double l = evaluate_segment(p.pieces[k], knot, c.sigma);
                const double r = evaluate_segment(p.pieces[k + 1], knot, c.sigma);
                CHECK(std::abs(l - r) <= 1e-8 * std::max(std::abs(r), 1e-300));
            }
        }
    }
}

TEST_CASE("partial sums") {
    for (const auto& c : kCases) {
        const ProcessConfig cfg{{c.mu, c.sigma}, c.h / 3, c.h};
        const auto cum = fet_cdf(cfg, 300);
        for (std::size_t i = 1; i < cum.size(); ++i) CHECK(cum[i] - cum[i - 1] >= -1e-12);
        CHECK(cum.back() <= 1.0 + 1e-10);
    }
    const auto cum = fet_cdf({{0.3, 1.0}, 1.0, 3.0}, 200);
    CHECK(cum.back() >= 0.999);
    CHECK(cum.front() == doctest::Approx(1.0 - cdf(one_step_law({{0.3, 1.0}, 1.0, 3.0}), 3.0)).epsilon(1e-14));
}

TEST_CASE("exit regimes meet without a gap") {
    const double h = 1.0;
    for (double mu : {h - 1e-9, h, h + 1e-9, -h + 1e-9, -h, -h - 1e-9}) {
        const ProcessConfig cfg{{mu, 1.0}, 0.3, h};
        const double p = fet_pmf(cfg, 5)(0.3);
        const ProcessConfig ref{{mu > 0 ? h : -h, 1.0}, 0.3, h};
        CHECK(p == doctest::Approx(fet_pmf(ref, 5)(0.3)).epsilon(1e-6));
    }
}

TEST_CASE("mean exit time against Monte Carlo") {
    for (const auto& c : {Case{2.0, 1.0, 1.0}, Case{0.3, 1.0, 3.0}, Case{-0.3, 1.0, 3.0}}) {
        const double x = c.mu == 2.0 ? 0.0 : 1.0;
        const ProcessConfig cfg{{c.mu, c.sigma}, x, c.h};
        const auto m = mean_fet(cfg);
        CHECK(m.tail_ratio < 1.0);
        oracle::McConfig mc;
        mc.trajectories = 1000000;
        mc.n_max = 0;
        mc.fet_cap = 10000;
        const auto r = oracle::simulate(cfg, mc);
        CHECK(r.fet_censored == 0);
        INFO("mu=" << c.mu << " closed=" << m.mean << " mc=" << r.fet_mean << " se=" << r.fet_mean_se);
        CHECK(std::abs(m.mean - r.fet_mean) < 4 * r.fet_mean_se);
    }
    CHECK_THROWS_AS(mean_fet({{-0.3, 1.0}, 1.0, 3.0}, 1e-10, 50), InvariantError);
    CHECK_THROWS_AS(mean_fet({{-0.3, 1.0}, 1.0, 3.0}, 0.0), DomainError);
}

TEST_CASE("memoised distributions are shared safely") {
    const ProcessConfig cfg{{0.45, 0.8}, 0.0, 2.0};
    std::vector<double> out(4, 0.0);
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&, t] { out[t] = fet_pmf(cfg, 20 + 10 * t)(0.5); });
    }
    for (auto& th : pool) th.join();
    for (int t = 0; t < 4; ++t) CHECK(out[t] == fet_pmf(cfg, 20 + 10 * t)(0.5));
}
