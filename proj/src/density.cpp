#include "lindley/density.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lindley/exppoly.hpp"

namespace lindley {

namespace {

ExpPolySegment make_segment(double lo, double hi, std::vector<double> a, std::vector<double> b,
                            double const_term = 0.0) {
    ExpPolySegment s;
    s.lo = lo;
    s.hi = hi;
    s.shift = lo;
    s.a = std::move(a);
    s.b = std::move(b);
    s.const_term = const_term;
    renormalize(s);
    return s;
}

// P(y + Z <= 0) integrated against the law f: the atom of the next step.
double next_atom(const MixedDensity& f, double tol) {
    const double mu = f.params.mu;
    const double sigma = f.params.sigma;
    const double split = -mu;  // M(y) changes form at y = -mu
    auto reflect = [&](double y) {
        return y > split ? 0.5 * std::exp(-(y + mu) / sigma) : 1.0 - 0.5 * std::exp((y + mu) / sigma);
    };
    double atom = f.atom * reflect(f.atom_location);
    for (const auto& seg : f.segments) {
        const double l = seg.lo;
        const double r = seg.hi;
        const double w = seg.width();
        if (split > l + tol) {
            // y in [l, min(r, split)]: 1 - e^{(y + mu)/sigma} / 2
            const double t1 = std::min(r, split) - l;
            atom += exppoly::local_integral(seg, sigma, 0.0, t1);
            atom -= 0.5 * std::exp((l + mu) / sigma) * exppoly::local_integral(seg, sigma, 0.0, t1, 1.0 / sigma);
        }
        if (r > split + tol) {
            // y in [max(l, split), r): e^{-(y + mu)/sigma} / 2
            const double t0 = std::max(0.0, split - l);
            atom += 0.5 * std::exp(-(l + t0 + mu) / sigma) *
                    std::exp(t0 / sigma) * exppoly::local_integral(seg, sigma, t0, w, -1.0 / sigma);
        }
    }
    return atom;
}

// Law of W_{n+1} from the law of W_n, n >= 1.
MixedDensity convolve_density(const MixedDensity& f, double tol) {
    const double mu = f.params.mu;
    const double sigma = f.params.sigma;
    const auto sm = exppoly::laplace_smooth(f.segments, sigma, f.atom, f.atom);

    MixedDensity next;
    next.n = f.n + 1;
    next.params = f.params;
    next.regime = f.regime;
    next.atom_location = 0.0;

    if (mu > tol) {
        // images of y + Z with y left of u - mu for every y: only the e^{(u - mu)/sigma} side
        next.segments.push_back(make_segment(0.0, mu, {sm.left_tail * std::exp(-mu / sigma)}, {}));
    }
    for (const auto& p : sm.pieces) {
        auto s = exppoly::translated(p, mu);
        if (s.hi <= tol) continue;
        if (s.lo < tol) s = exppoly::clipped(std::move(s), 0.0, s.hi, sigma);
        if (s.hi - s.lo <= tol) continue;
        if (!next.segments.empty()) s.lo = next.segments.back().hi;
        reanchor(s, s.lo, sigma);
        trim_negligible(s, sigma);
        renormalize(s);
        next.segments.push_back(std::move(s));
    }
    if (next.segments.empty() || !next.segments.back().unbounded()) {
        throw InvariantError("position recursion lost its unbounded piece");
    }
    next.atom = next_atom(f, tol);
    return next;
}

void expect_knots(const MixedDensity& d, const std::vector<double>& knots, double tol,
                  std::string_view where) {
    // knots: the finite right ends of the segments, in order
    if (d.segments.size() != knots.size() + 1) {
        throw InvariantError(std::string(where) + ": unexpected number of segments (" +
                             std::to_string(d.segments.size()) + " vs " +
                             std::to_string(knots.size() + 1) + ")");
    }
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (std::abs(d.segments[i].hi - knots[i]) > 1e3 * tol) {
            throw InvariantError(std::string(where) + ": knot mismatch");
        }
    }
}

void require_regime(const PositionRecursionState& s, PositionRegime r, std::string_view what) {
    if (s.regime != r) {
        throw RegimeError(std::string(what) + " called in regime " + std::string(to_string(s.regime)));
    }
    if (s.n < 1) throw DomainError(std::string(what) + ": state must have n >= 1");
}

}  // namespace

MixedDensity initial_law(const ProcessConfig& cfg) {
    MixedDensity d;
    d.n = 0;
    d.atom = 1.0;
    d.atom_location = cfg.x;
    d.params = cfg.params;
    d.regime = dispatch_position_regime(cfg);
    return d;
}

MixedDensity one_step_law(const ProcessConfig& cfg) {
    const auto regime = dispatch_position_regime(cfg);
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    const double k = cfg.x + mu;
    MixedDensity d;
    d.n = 1;
    d.params = cfg.params;
    d.regime = regime;
    if (k > snap_tolerance(cfg)) {
        d.atom = 0.5 * std::exp(-k / sigma);
        d.segments.push_back(make_segment(0.0, k, {std::exp(-k / sigma) / (2.0 * sigma)}, {}));
        d.segments.push_back(make_segment(k, kInf, {}, {1.0 / (2.0 * sigma)}));
    } else {
        d.atom = 1.0 - 0.5 * std::exp(k / sigma);
        d.segments.push_back(make_segment(0.0, kInf, {}, {std::exp(k / sigma) / (2.0 * sigma)}));
    }
    return d;
}

PositionRecursionState initial_state(const ProcessConfig& cfg) {
    PositionRecursionState s;
    s.n = 1;
    s.cfg = cfg;
    s.density = one_step_law(cfg);
    s.regime = s.density.regime;
    if (s.regime == PositionRegime::PosMuNegSmall) {
        s.subcase = cfg.x + cfg.params.mu > snap_tolerance(cfg) ? PieceOneState::PieceOneAlive
                                                                 : PieceOneState::PieceOneDead;
    }
    return s;
}

PositionRecursionState step_mu_nonneg(const PositionRecursionState& state) {
    require_regime(state, PositionRegime::PosMuNonNeg, "step_mu_nonneg");
    const double tol = snap_tolerance(state.cfg);
    const double mu = state.cfg.params.mu;
    const double x = state.cfg.x;
    PositionRecursionState next = state;
    next.n = state.n + 1;
    next.density = convolve_density(state.density, tol);

    const int n = next.n;
    std::vector<double> knots;
    if (mu > tol) {
        for (int i = 1; i <= n - 1; ++i) knots.push_back(i * mu);
        knots.push_back(n * mu + x);
    } else if (x > tol) {
        knots.push_back(x);
    }
    expect_knots(next.density, knots, tol, "step_mu_nonneg");
    for (const auto& v : next.density.segments.back().a) {
        if (v != 0.0) throw InvariantError("step_mu_nonneg: growing term on the unbounded piece");
    }
    return next;
}

PositionRecursionState step_mu_neg_small(const PositionRecursionState& state) {
    require_regime(state, PositionRegime::PosMuNegSmall, "step_mu_neg_small");
    const double tol = snap_tolerance(state.cfg);
    const double mu = state.cfg.params.mu;
    const double x = state.cfg.x;
    // the source step decides which bullet applies; a piece that empties is discarded
    const bool source_alive = x + state.n * mu > tol;
    if (source_alive != (state.subcase == PieceOneState::PieceOneAlive)) {
        throw InvariantError("step_mu_neg_small: sub-case flag out of sync with x + n mu");
    }
    PositionRecursionState next = state;
    next.n = state.n + 1;
    next.density = convolve_density(state.density, tol);
    const double knot = x + next.n * mu;
    const bool alive = knot > tol;
    next.subcase = alive ? PieceOneState::PieceOneAlive : PieceOneState::PieceOneDead;
    expect_knots(next.density, alive ? std::vector<double>{knot} : std::vector<double>{}, tol,
                 "step_mu_neg_small");
    return next;
}

PositionRecursionState step_mu_neg_large(const PositionRecursionState& state) {
    require_regime(state, PositionRegime::PosMuNegLarge, "step_mu_neg_large");
    const double tol = snap_tolerance(state.cfg);
    PositionRecursionState next = state;
    next.n = state.n + 1;
    next.density = convolve_density(state.density, tol);
    expect_knots(next.density, {}, tol, "step_mu_neg_large");
    return next;
}

PositionRecursionState step(const PositionRecursionState& state) {
    switch (state.regime) {
        case PositionRegime::PosMuNonNeg: return step_mu_nonneg(state);
        case PositionRegime::PosMuNegSmall: return step_mu_neg_small(state);
        case PositionRegime::PosMuNegLarge: return step_mu_neg_large(state);
    }
    throw RegimeError("unknown position regime");
}

std::vector<MixedDensity> density_chain(const ProcessConfig& cfg, int n_max, int max_n) {
    if (n_max < 0) throw DomainError("density_chain: n must be >= 0");
    if (n_max > max_n) {
        throw DomainError("density_chain: n = " + std::to_string(n_max) + " exceeds the recursion cap " +
                          std::to_string(max_n));
    }
    std::vector<MixedDensity> out;
    out.push_back(initial_law(cfg));
    if (n_max == 0) return out;
    auto s = initial_state(cfg);
    out.push_back(s.density);
    for (int n = 2; n <= n_max; ++n) {
        s = step(s);
        out.push_back(s.density);
    }
    return out;
}

MixedDensity density_at(const ProcessConfig& cfg, int n, int max_n) {
    if (n == 0) return initial_law(cfg);
    auto chain = density_chain(cfg, n, max_n);
    return std::move(chain.back());
}

double cdf(const MixedDensity& d, double u) {
    if (u < 0.0) return 0.0;
    if (d.n == 0) return u >= d.atom_location ? 1.0 : 0.0;
    double v = d.atom;
    const double sigma = d.params.sigma;
    for (const auto& seg : d.segments) {
        if (seg.lo >= u) break;
        const double top = std::min(u, seg.hi);
        v += exppoly::integrate(seg, sigma, seg.lo, top);
    }
    return v;
}

double continuous_mass(const MixedDensity& d) {
    double v = 0.0;
    for (const auto& seg : d.segments) v += exppoly::integrate(seg, d.params.sigma, seg.lo, seg.hi);
    return v;
}

double total_mass(const MixedDensity& d) { return d.atom + continuous_mass(d); }

double moments(const MixedDensity& d, int order) {
    if (order != 1 && order != 2) throw DomainError("moments: order must be 1 or 2");
    if (d.n == 0) return std::pow(d.atom_location, order);
    const double sigma = d.params.sigma;
    double v = 0.0;
    for (const auto& seg : d.segments) {
        if (seg.unbounded() && std::any_of(seg.a.begin(), seg.a.end(), [](double c) { return c != 0.0; })) {
            throw InvariantError("moments: unbounded segment carries growing terms");
        }
        const double t1 = seg.hi - seg.shift;
        const double t0 = seg.lo - seg.shift;
        const double l = seg.shift;
        const double i0 = exppoly::local_integral(seg, sigma, t0, t1, 0.0, 0);
        const double i1 = exppoly::local_integral(seg, sigma, t0, t1, 0.0, 1);
        if (order == 1) {
            v += l * i0 + i1;
        } else {
            const double i2 = exppoly::local_integral(seg, sigma, t0, t1, 0.0, 2);
            v += l * l * i0 + 2.0 * l * i1 + i2;
        }
    }
    return v;
}

double variance(const MixedDensity& d) {
    const double m1 = moments(d, 1);
    return moments(d, 2) - m1 * m1;
}

double atom_boundary_gap(const MixedDensity& d_next) {
    if (d_next.regime != PositionRegime::PosMuNonNeg) {
        throw RegimeError("atom_boundary_gap holds for mu >= 0 only");
    }
    if (d_next.n < 1 || d_next.segments.empty()) throw DomainError("atom_boundary_gap: need n >= 1");
    const auto& first = d_next.segments.front();
    return std::abs(d_next.atom - d_next.params.sigma * evaluate_segment(first, first.lo, d_next.params.sigma));
}

double default_grid_end(const ProcessConfig& cfg, int n) {
    const int steps = std::max(n, 1);
    return cfg.x + steps * (std::abs(cfg.params.mu) + 8.0 * cfg.params.sigma);
}

}  // namespace lindley
