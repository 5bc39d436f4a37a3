#include "lindley/core.hpp"

#include <algorithm>
#include <cmath>

namespace lindley {

void LaplaceParams::validate() const {
    if (!std::isfinite(mu)) throw DomainError("mu must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be finite and > 0");
}

void ProcessConfig::validate() const {
    params.validate();
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("start position x must be finite and >= 0");
    if (h) {
        if (!(*h > 0.0) || !std::isfinite(*h)) throw DomainError("boundary h must be finite and > 0");
        if (!(x < *h)) throw DomainError("start position must satisfy 0 <= x < h");
    }
}

void ProcessConfig::validate_fet() const {
    if (!h) throw DomainError("first exit time needs a boundary h");
    validate();
}

std::string_view to_string(PositionRegime r) {
    switch (r) {
        case PositionRegime::PosMuNonNeg: return "PosMuNonNeg";
        case PositionRegime::PosMuNegSmall: return "PosMuNegSmall";
        case PositionRegime::PosMuNegLarge: return "PosMuNegLarge";
    }
    return "?";
}

std::string_view to_string(FetRegime r) {
    switch (r) {
        case FetRegime::FetMuPosLtH: return "FetMuPosLtH";
        case FetRegime::FetMuPosGeH: return "FetMuPosGeH";
        case FetRegime::FetMuNeg: return "FetMuNeg";
        case FetRegime::FetMuNegGeH: return "FetMuNegGeH";
        case FetRegime::FetMuZero: return "FetMuZero";
    }
    return "?";
}

double snap_tolerance(const ProcessConfig& cfg) {
    double scale = std::max(1.0, std::abs(cfg.x));
    if (cfg.h) scale = std::max(scale, std::abs(*cfg.h));
    return 1e-12 * scale;
}

PositionRegime dispatch_position_regime(const ProcessConfig& cfg) {
    cfg.validate();
    const double mu = cfg.params.mu;
    if (mu >= 0.0) return PositionRegime::PosMuNonNeg;
    if (mu <= -cfg.x + snap_tolerance(cfg)) return PositionRegime::PosMuNegLarge;
    return PositionRegime::PosMuNegSmall;
}

FetRegime dispatch_fet_regime(const ProcessConfig& cfg) {
    cfg.validate_fet();
    const double mu = cfg.params.mu;
    const double h = *cfg.h;
    const double tol = snap_tolerance(cfg);
    if (mu == 0.0) return FetRegime::FetMuZero;
    if (mu > 0.0) return mu >= h - tol ? FetRegime::FetMuPosGeH : FetRegime::FetMuPosLtH;
    return -mu >= h - tol ? FetRegime::FetMuNegGeH : FetRegime::FetMuNeg;
}

namespace {

double horner(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

bool all_zero(const std::vector<double>& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; });
}

// Coefficients of p(t + d) given those of p(t).
std::vector<double> taylor_shift(std::vector<double> c, double d) {
    const std::size_t n = c.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        for (std::size_t i = n - 1; i > k; --i) {
            c[i - 1] += d * c[i];
        }
    }
    return c;
}

}  // namespace

double evaluate_segment(const ExpPolySegment& seg, double u, double sigma) {
    const double t = u - seg.shift;
    double v = seg.const_term;
    if (!seg.a.empty() && !all_zero(seg.a)) v += horner(seg.a, t) * std::exp(t / sigma);
    if (!seg.b.empty()) v += horner(seg.b, t) * std::exp(-t / sigma);
    return std::exp(seg.log_scale) * v;
}

void renormalize(ExpPolySegment& seg) {
    double m = std::abs(seg.const_term);
    for (double v : seg.a) m = std::max(m, std::abs(v));
    for (double v : seg.b) m = std::max(m, std::abs(v));
    if (m == 0.0 || !std::isfinite(m)) return;
    const double inv = 1.0 / m;
    for (double& v : seg.a) v *= inv;
    for (double& v : seg.b) v *= inv;
    seg.const_term *= inv;
    seg.log_scale += std::log(m);
}

void reanchor(ExpPolySegment& seg, double new_shift, double sigma) {
    const double d = new_shift - seg.shift;
    if (d == 0.0) return;
    if (!seg.a.empty()) {
        seg.a = taylor_shift(std::move(seg.a), d);
        const double f = std::exp(d / sigma);
        for (double& v : seg.a) v *= f;
    }
    if (!seg.b.empty()) {
        seg.b = taylor_shift(std::move(seg.b), d);
        const double f = std::exp(-d / sigma);
        for (double& v : seg.b) v *= f;
    }
    seg.shift = new_shift;
}

void trim_negligible(ExpPolySegment& seg, double sigma, double rel_tol) {
    const double t_lo = seg.lo - seg.shift;
    const double t_hi = seg.hi - seg.shift;
    // log of max_t |t|^j e^{s t / sigma} over the segment, s = +1 or -1
    auto log_peak = [&](std::size_t j, double s) {
        if (std::isinf(t_hi)) {
            // only s = -1 can occur here
            const double t_star = std::max(t_lo, static_cast<double>(j) * sigma);
            if (t_star <= 0.0) return j == 0 ? -t_lo / sigma : -std::numeric_limits<double>::infinity();
            return static_cast<double>(j) * std::log(t_star) - t_star / sigma;
        }
        const double tm = std::max(std::abs(t_lo), std::abs(t_hi));
        const double e = std::max(s * t_lo, s * t_hi) / sigma;
        if (tm == 0.0) return j == 0 ? e : -std::numeric_limits<double>::infinity();
        return static_cast<double>(j) * std::log(tm) + e;
    };
    auto contribution = [&](const std::vector<double>& c, std::size_t j, double s) {
        if (c[j] == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(c[j])) + log_peak(j, s);
    };
    double peak = seg.const_term != 0.0 ? std::log(std::abs(seg.const_term))
                                        : -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < seg.a.size(); ++j) peak = std::max(peak, contribution(seg.a, j, 1.0));
    for (std::size_t j = 0; j < seg.b.size(); ++j) peak = std::max(peak, contribution(seg.b, j, -1.0));
    if (!std::isfinite(peak)) return;
    const double cut = peak + std::log(rel_tol);
    while (!seg.a.empty() && contribution(seg.a, seg.a.size() - 1, 1.0) < cut) seg.a.pop_back();
    while (!seg.b.empty() && contribution(seg.b, seg.b.size() - 1, -1.0) < cut) seg.b.pop_back();
}

std::size_t locate_density_segment(const MixedDensity& d, double u) {
    if (d.segments.empty()) throw DomainError("density has no continuous part");
    auto it = std::lower_bound(d.segments.begin(), d.segments.end(), u,
                               [](const ExpPolySegment& s, double v) { return s.hi < v; });
    if (it == d.segments.end()) --it;
    return static_cast<std::size_t>(it - d.segments.begin());
}

double evaluate_mixed_density(const MixedDensity& d, double u) {
    if (u < 0.0 || std::isnan(u)) throw DomainError("density evaluated at u < 0");
    if (d.segments.empty() || u == 0.0) return 0.0;
    const auto& seg = d.segments[locate_density_segment(d, u)];
    return evaluate_segment(seg, u, d.params.sigma);
}

std::size_t FetPmf::locate(double x) const {
    if (!(x >= 0.0) || !(x < h)) throw DomainError("first exit time pmf evaluated outside [0, h)");
    auto it = std::upper_bound(pieces.begin(), pieces.end(), x,
                               [](double v, const ExpPolySegment& s) { return v < s.lo; });
    if (it == pieces.begin()) return 0;
    return static_cast<std::size_t>(it - pieces.begin()) - 1;
}

double FetPmf::operator()(double x) const {
    return evaluate_segment(pieces[locate(x)], x, sigma);
}

}  // namespace lindley
