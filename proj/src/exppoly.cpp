#include "lindley/exppoly.hpp"

#include <algorithm>
#include <cmath>

#include "lindley/gammainc.hpp"

namespace lindley::exppoly {

using gammainc::exp_moment;

double local_integral(const ExpPolySegment& seg, double sigma, double t0, double t1, double kappa,
                      int extra_power) {
    if (t0 < 0.0 || t1 < t0) throw DomainError("local_integral: need 0 <= t0 <= t1");
    if (t0 == t1) return 0.0;
    const double inv = 1.0 / sigma;
    double sum = 0.0;
    for (std::size_t j = 0; j < seg.a.size(); ++j) {
        if (seg.a[j] == 0.0) continue;
        sum += seg.a[j] * exp_moment(static_cast<int>(j) + extra_power, kappa + inv, t0, t1);
    }
    for (std::size_t j = 0; j < seg.b.size(); ++j) {
        if (seg.b[j] == 0.0) continue;
        sum += seg.b[j] * exp_moment(static_cast<int>(j) + extra_power, kappa - inv, t0, t1);
    }
    if (seg.const_term != 0.0) {
        sum += seg.const_term * exp_moment(extra_power, kappa, t0, t1);
    }
    return std::exp(seg.log_scale) * sum;
}

double integrate(const ExpPolySegment& seg, double sigma, double u0, double u1) {
    return local_integral(seg, sigma, u0 - seg.shift, u1 - seg.shift);
}

ExpPolySegment translated(ExpPolySegment seg, double delta) {
    seg.lo += delta;
    seg.hi += delta;
    seg.shift += delta;
    return seg;
}

ExpPolySegment clipped(ExpPolySegment seg, double lo, double hi, double sigma) {
    seg.lo = std::max(seg.lo, lo);
    seg.hi = std::min(seg.hi, hi);
    reanchor(seg, seg.lo, sigma);
    return seg;
}

namespace {

struct Materialized {
    std::vector<double> a, b;
    double eta = 0.0;
    double w = 0.0;
};

Materialized materialize(const ExpPolySegment& seg) {
    const double s = std::exp(seg.log_scale);
    Materialized m;
    m.a.reserve(seg.a.size());
    m.b.reserve(seg.b.size());
    for (double v : seg.a) m.a.push_back(v * s);
    for (double v : seg.b) m.b.push_back(v * s);
    m.eta = seg.const_term * s;
    m.w = seg.width();
    return m;
}

// integral_0^w e^{-(w-t)/sigma} g(t) dt for a bounded piece
double left_weighted(const Materialized& g, double sigma) {
    const double w = g.w;
    const double ew = std::exp(-w / sigma);
    double sum = 0.0;
    for (std::size_t j = 0; j < g.a.size(); ++j) {
        if (g.a[j] == 0.0) continue;
        sum += g.a[j] * exp_moment(static_cast<int>(j), 2.0 / sigma, w) * ew;
    }
    for (std::size_t j = 0; j < g.b.size(); ++j) {
        if (g.b[j] == 0.0) continue;
        sum += g.b[j] * std::pow(w, static_cast<double>(j + 1)) / static_cast<double>(j + 1) * ew;
    }
    sum += g.eta * sigma * (-std::expm1(-w / sigma));
    return sum;
}

// integral_0^w e^{-t/sigma} g(t) dt, w possibly infinite
double right_weighted(const Materialized& g, double sigma) {
    const double w = g.w;
    double sum = 0.0;
    for (std::size_t j = 0; j < g.a.size(); ++j) {
        if (g.a[j] == 0.0) continue;
        sum += g.a[j] * std::pow(w, static_cast<double>(j + 1)) / static_cast<double>(j + 1);
    }
    for (std::size_t j = 0; j < g.b.size(); ++j) {
        if (g.b[j] == 0.0) continue;
        sum += g.b[j] * exp_moment(static_cast<int>(j), -2.0 / sigma, w);
    }
    if (g.eta != 0.0) sum += g.eta * sigma * (-std::expm1(-w / sigma));
    return sum;
}

}  // namespace

Smoothed laplace_smooth(std::span<const ExpPolySegment> pieces, double sigma, double left_mass,
                        double right_mass) {
    if (pieces.empty()) throw DomainError("laplace_smooth: empty partition");
    const std::size_t m_count = pieces.size();
    std::vector<Materialized> g;
    g.reserve(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const auto& p = pieces[m];
        if (p.shift != p.lo) throw InvariantError("laplace_smooth: piece not anchored at its lower end");
        if (m > 0 && p.lo != pieces[m - 1].hi) throw InvariantError("laplace_smooth: partition not contiguous");
        if (p.unbounded()) {
            if (m + 1 != m_count) throw InvariantError("laplace_smooth: unbounded piece must be last");
            if (std::any_of(p.a.begin(), p.a.end(), [](double v) { return v != 0.0; }) ||
                p.const_term != 0.0) {
                throw InvariantError("laplace_smooth: unbounded piece has growing or constant terms");
            }
        }
        g.push_back(materialize(p));
    }
    if (pieces.front().lo != 0.0) throw InvariantError("laplace_smooth: partition must start at 0");

    // decay[m] = e^{-w_m / sigma}
    std::vector<double> decay(m_count);
    for (std::size_t m = 0; m < m_count; ++m) decay[m] = std::exp(-g[m].w / sigma);

    // lacc[m]: integral over pieces left of m (and the left mass) of e^{-(l_m - y)/sigma} g(y)
    std::vector<double> lacc(m_count + 1, 0.0);
    lacc[0] = left_mass;
    for (std::size_t m = 0; m < m_count; ++m) {
        if (pieces[m].unbounded()) {
            lacc[m + 1] = 0.0;
        } else {
            lacc[m + 1] = decay[m] * lacc[m] + left_weighted(g[m], sigma);
        }
    }
    // racc[m]: integral over pieces right of m of e^{-(y - r_m)/sigma} g(y)
    std::vector<double> racc(m_count, 0.0);
    std::vector<double> rint(m_count, 0.0);
    for (std::size_t m = m_count; m-- > 0;) {
        rint[m] = right_weighted(g[m], sigma);
        if (m > 0) racc[m - 1] = decay[m] * racc[m] + rint[m];
    }
    const double right_total = decay[0] * racc[0] + rint[0];

    Smoothed out;
    out.domain_hi = pieces.back().hi;
    out.left_tail = (right_total + right_mass) / (2.0 * sigma);
    out.right_tail = pieces.back().unbounded() ? 0.0 : lacc[m_count] / (2.0 * sigma);
    out.pieces.reserve(m_count);

    const double half = 0.5 * sigma;
    for (std::size_t m = 0; m < m_count; ++m) {
        const auto& gm = g[m];
        const bool unbounded = pieces[m].unbounded();
        const std::size_t na = gm.a.size();
        const std::size_t nb = gm.b.size();
        std::vector<double> out_a(unbounded ? 0 : na + 1, 0.0);
        std::vector<double> out_b(nb + 1, 0.0);

        if (!unbounded) {
            // e^{tau/sigma} * [ integral_0^tau e^{t/sigma} a-part e^{-...} ] and the right-side terms
            for (std::size_t j = 0; j < na; ++j) {
                if (gm.a[j] == 0.0) continue;
                double c = gm.a[j] * half;
                out_a[j] += c;
                for (std::size_t r = j; r-- > 0;) {
                    c *= -static_cast<double>(r + 1) * half;
                    out_a[r] += c;
                }
                out_a[j + 1] -= gm.a[j] / static_cast<double>(j + 1);
            }
            double a0 = decay[m] * racc[m] - gm.eta * sigma * decay[m];
            for (std::size_t j = 0; j < na; ++j) {
                a0 += gm.a[j] * std::pow(gm.w, static_cast<double>(j + 1)) / static_cast<double>(j + 1);
            }
            for (std::size_t j = 0; j < nb; ++j) {
                if (gm.b[j] == 0.0) continue;
                a0 -= gm.b[j] * exp_moment(static_cast<int>(j), -2.0 / sigma, gm.w, kInf);
            }
            out_a[0] += a0;
        }

        for (std::size_t j = 0; j < nb; ++j) {
            if (gm.b[j] == 0.0) continue;
            double c = gm.b[j] * half;
            out_b[j] += c;
            for (std::size_t r = j; r-- > 0;) {
                c *= static_cast<double>(r + 1) * half;
                out_b[r] += c;
            }
            out_b[j + 1] += gm.b[j] / static_cast<double>(j + 1);
        }
        double b0 = lacc[m] - gm.eta * sigma;
        {
            // sum_j a_j (-1)^j j! (sigma/2)^{j+1}
            double c = half;
            for (std::size_t j = 0; j < na; ++j) {
                if (j > 0) c *= -static_cast<double>(j) * half;
                b0 -= gm.a[j] * c;
            }
        }
        out_b[0] += b0;

        ExpPolySegment seg;
        seg.lo = pieces[m].lo;
        seg.hi = pieces[m].hi;
        seg.shift = pieces[m].lo;
        const double scale = 1.0 / (2.0 * sigma);
        for (double& v : out_a) v *= scale;
        for (double& v : out_b) v *= scale;
        seg.a = std::move(out_a);
        seg.b = std::move(out_b);
        seg.const_term = gm.eta;
        out.pieces.push_back(std::move(seg));
    }
    return out;
}

}  // namespace lindley::exppoly
