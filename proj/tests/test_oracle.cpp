#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lindley/density.hpp"
#include "lindley/fet.hpp"
#include "lindley/oracle.hpp"

using namespace lindley;
using namespace lindley::oracle;

namespace {

double trapezoid_mass(const GridFunction& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        const double w = (i == 0 || i + 1 == g.values.size()) ? 0.5 : 1.0;
        s += w * g.values[i];
    }
    return g.atom + s * g.delta;
}

double sup_error(const GridFunction& g, const MixedDensity& d, double upto) {
    double sup = 0.0;
    for (std::size_t i = 1; i < g.values.size(); ++i) {
        const double u = g.delta * static_cast<double>(i);
        if (u > upto) break;
        sup = std::max(sup, std::abs(g.values[i] - evaluate_mixed_density(d, u)));
    }
    return sup;
}

}  // namespace

TEST_CASE("sample_laplace") {
    CHECK(sample_laplace({0.7, 2.0}, 0.5) == 0.7);
    CHECK(sample_laplace({0.0, 1.0}, 0.75) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(sample_laplace({0.0, 1.0}, 0.25) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(sample_laplace({0.0, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(sample_laplace({0.0, 1.0}, 1.0), DomainError);
    SplitMix64 rng(7, 0);
    const int n = 1000000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sample_laplace({0.4, 1.5}, rng.uniform());
    CHECK(std::abs(s / n - 0.4) < 4 * std::sqrt(2.0) * 1.5 / 1000.0);
}

TEST_CASE("generator streams") {
    SplitMix64 a(1, 5), b(1, 5), c(1, 6), d(2, 5);
    const auto va = a.next();
    CHECK(va == b.next());
    CHECK(va != c.next());
    CHECK(va != d.next());
    for (int i = 0; i < 100000; ++i) {
        const double u = a.uniform();
        CHECK((u > 0.0 && u < 1.0));
    }
}

TEST_CASE("simulate is deterministic across thread counts") {
    const ProcessConfig cfg{{-0.3, 1.0}, 1.0, 3.0};
    McConfig mc;
    mc.trajectories = 50000;
    mc.n_max = 5;
    const auto r1 = simulate(cfg, mc, 1);
    const auto r4 = simulate(cfg, mc, 4);
    const auto r4b = simulate(cfg, mc, 4);
    CHECK(r1.atom_freq_by_n == r4.atom_freq_by_n);
    CHECK(r1.histogram_by_n == r4.histogram_by_n);
    CHECK(r1.mean_by_n == r4.mean_by_n);
    CHECK(r1.fet_counts == r4.fet_counts);
    CHECK(r1.fet_mean == r4.fet_mean);
    CHECK(r4.fet_counts == r4b.fet_counts);
    mc.seed = 43;
    CHECK(simulate(cfg, mc, 4).fet_counts != r1.fet_counts);
}

TEST_CASE("histograms and exit counts are consistent") {
    const ProcessConfig cfg{{0.3, 1.0}, 1.0, 3.0};
    McConfig mc;
    mc.trajectories = 20000;
    mc.n_max = 4;
    const auto r = simulate(cfg, mc);
    for (int n = 0; n <= 4; ++n) {
        const auto& h = r.histogram_by_n[static_cast<std::size_t>(n)];
        CHECK(h.size() == static_cast<std::size_t>(mc.bins + 1));
        CHECK(std::accumulate(h.begin(), h.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.cdf_at_edges(n).back() <= 1.0 + 1e-12);
    }
    CHECK(r.atom_freq_by_n[0] == 0.0);
    const auto total = std::accumulate(r.fet_counts.begin(), r.fet_counts.end(), std::int64_t{0});
    CHECK(total + r.fet_censored == r.trajectories);
}

TEST_CASE("simulate agrees with the closed forms") {
    SUBCASE("atom and cdf at n = 9") {
        const ProcessConfig cfg{{-0.3, 1.0}, 1.0, {}};
        McConfig mc;
        mc.trajectories = 1000000;
        mc.n_max = 9;
        mc.domain_hi = 15.0;
        mc.bins = 1500;
        const auto r = simulate(cfg, mc);
        const auto f9 = density_at(cfg, 9);
        CHECK(std::abs(r.atom_freq_by_n[9] - f9.atom) < 4 * r.atom_se_by_n[9]);
        const auto edges = r.cdf_at_edges(9);
        double sup = 0.0;
        for (std::size_t b = 0; b < edges.size(); ++b) {
            sup = std::max(sup, std::abs(edges[b] - cdf(f9, r.bin_width * static_cast<double>(b))));
        }
        CHECK(sup < 0.005);
    }
    SUBCASE("exit time pmf") {
        const ProcessConfig cfg{{0.3, 1.0}, 1.0, 3.0};
        McConfig mc;
        mc.trajectories = 1000000;
        mc.n_max = 0;
        const auto r = simulate(cfg, mc);
        const auto d = fet_distribution(cfg, 40);
        double sup = 0.0, max_se = 0.0;
        for (int n = 1; n <= 40; ++n) {
            sup = std::max(sup, std::abs(r.fet_pmf(n) - d.at(n)(1.0)));
            max_se = std::max(max_se, r.fet_pmf_se(n));
        }
        CHECK(sup < 5 * max_se);
    }
}

TEST_CASE("ck_convolve") {
    const LaplaceParams p{0.3, 1.0};
    SUBCASE("one step from a point mass") {
        const ProcessConfig cfg{p, 1.0, {}};
        const auto g = ck_convolve(point_mass(1.0, 1e-3, 40.0), p);
        const auto f1 = one_step_law(cfg);
        CHECK(g.atom == doctest::Approx(f1.atom).epsilon(1e-14));
        CHECK(sup_error(g, f1, 40.0) < 1e-12);
    }
    SUBCASE("mass conservation is second order") {
        auto defect = [&](double delta) {
            auto g = point_mass(1.0, delta, 40.0);
            double worst = 0.0;
            for (int n = 1; n <= 5; ++n) {
                const double before = trapezoid_mass(g);
                g = ck_convolve(g, p);
                worst = std::max(worst, std::abs(trapezoid_mass(g) - before));
                CHECK(g.atom >= 0.0);
                CHECK(g.atom <= 1.0);
                for (double v : g.values) CHECK(v >= 0.0);
            }
            return worst;
        };
        const double d1 = defect(1e-3);
        CHECK(d1 <= 1e-6 / 12);
        CHECK(defect(2e-3) / d1 == doctest::Approx(4.0).epsilon(0.05));
    }
    SUBCASE("five steps against the closed form, second order") {
        const ProcessConfig cfg{p, 1.0, {}};
        const auto f5 = density_at(cfg, 5);
        const double e1 = sup_error(ck_chain(cfg, 5, 2e-3, 40.0), f5, 25.0);
        const double e2 = sup_error(ck_chain(cfg, 5, 1e-3, 40.0), f5, 25.0);
        CHECK(e2 < 1e-4);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
    }
    SUBCASE("second order from the exact one-step law") {
        const ProcessConfig cfg{p, 1.0, {}};
        const auto f2 = density_at(cfg, 2);
        auto sampled = [&](double delta) {
            auto g = point_mass(1.0, delta, 40.0);
            const auto f1 = one_step_law(cfg);
            g.atom = f1.atom;
            g.atom_location = 0.0;
            for (std::size_t i = 1; i < g.values.size(); ++i) {
                g.values[i] = evaluate_mixed_density(f1, delta * static_cast<double>(i));
            }
            g.values[0] = evaluate_segment(f1.segments.front(), 0.0, 1.0);
            return sup_error(ck_convolve(g, p), f2, 25.0);
        };
        CHECK(sampled(2e-3) / sampled(1e-3) == doctest::Approx(4.0).epsilon(0.1));
    }
    SUBCASE("mass leaving the grid") {
        CHECK_THROWS_AS(ck_chain({{1.0, 1.0}, 1.0, {}}, 3, 1e-2, 5.0), InvariantError);
    }
}

TEST_CASE("MC and grid quadrature agree on the third law") {
    const ProcessConfig cfg{{0.3, 1.0}, 1.0, {}};
    McConfig mc;
    mc.trajectories = 400000;
    mc.n_max = 3;
    mc.domain_hi = 10.0;
    mc.bins = 100;
    const auto r = simulate(cfg, mc);
    const auto g = ck_chain(cfg, 3, 1e-3, 40.0);
    CHECK(std::abs(r.atom_freq_by_n[3] - g.atom) < 4 * r.atom_se_by_n[3] + 1e-5);
    const auto edges = r.cdf_at_edges(3);
    double acc = g.atom;
    double sup = 0.0;
    const int per_bin = static_cast<int>(std::lround(r.bin_width / g.delta));
    for (std::size_t b = 1; b < edges.size(); ++b) {
        for (int k = 0; k < per_bin; ++k) {
            const std::size_t i = (b - 1) * static_cast<std::size_t>(per_bin) + static_cast<std::size_t>(k);
            acc += 0.5 * (g.values[i] + g.values[i + 1]) * g.delta;
        }
        const double se = std::sqrt(acc * (1.0 - acc) / static_cast<double>(mc.trajectories));
        sup = std::max(sup, std::abs(edges[b] - acc) / std::max(se, 1e-6));
    }
    CHECK(sup < 5.0);
}

TEST_CASE("exit recursion step") {
    const ProcessConfig cfg{{0.0, 1.0}, 0.0, 3.0};
    const auto e1 = exit_base(cfg);
    CHECK(e1.values.size() == 4001);
    const auto e2 = exit_recursion_step(e1, cfg);
    const auto p2 = fet_pmf(cfg, 2);
    double sup = 0.0;
    for (std::size_t i = 0; i + 1 < e2.values.size(); ++i) {
        sup = std::max(sup, std::abs(e2.values[i] - p2(e2.delta() * static_cast<double>(i))));
    }
    CHECK(sup < 1e-8);

    ExitGrid twice = e1;
    for (double& v : twice.values) v *= 2.0;
    const auto e2x = exit_recursion_step(twice, cfg);
    for (std::size_t i = 0; i < e2.values.size(); ++i) {
        CHECK(e2x.values[i] == doctest::Approx(2.0 * e2.values[i]).epsilon(1e-14));
    }
    const double sup_prev = *std::max_element(e1.values.begin(), e1.values.end());
    for (double v : e2.values) CHECK(v <= sup_prev);
    CHECK(sup_prev <= 1.0);
    CHECK(e2.at(1.2345) == doctest::Approx(p2(1.2345)).epsilon(1e-8));
}
