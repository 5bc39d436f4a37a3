#include "lindley/fet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "lindley/exppoly.hpp"
#include "lindley/gammainc.hpp"

namespace lindley {

namespace {

ExpPolySegment make_piece(double lo, double hi, std::vector<double> a, std::vector<double> b,
                          double const_term) {
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

void require_fet_regime(const FetRecursionState& s, FetRegime r, std::string_view what) {
    if (s.regime != r) {
        throw RegimeError(std::string(what) + " called in regime " + std::string(to_string(s.regime)));
    }
}

void expect_pieces(const FetPmf& p, std::size_t count, std::string_view what) {
    if (p.pieces.size() != count) {
        throw InvariantError(std::string(what) + ": expected " + std::to_string(count) + " pieces, got " +
                             std::to_string(p.pieces.size()));
    }
}

}  // namespace

int ell_n(double mu, double h, int n, double tol) {
    if (!(mu > 0.0)) throw DomainError("ell_n needs mu > 0");
    int r = 1;
    while (r * mu < h - tol) ++r;
    return std::min(n + 1, r);
}

int h_n(double mu, double h, int n, double tol) {
    if (!(mu < 0.0)) throw DomainError("h_n needs mu < 0");
    int r = 1;
    while (!(-r * mu > h + tol)) ++r;
    return std::min(n, r);
}

FetPmf fet_base(const ProcessConfig& cfg) {
    const auto regime = dispatch_fet_regime(cfg);
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    const double h = *cfg.h;
    FetPmf p;
    p.n = 1;
    p.h = h;
    p.sigma = sigma;
    p.regime = regime;
    if (regime == FetRegime::FetMuPosGeH) {
        p.pieces.push_back(make_piece(0.0, h, {}, {-0.5 * std::exp((h - mu) / sigma)}, 1.0));
    } else if (mu <= 0.0) {
        p.pieces.push_back(make_piece(0.0, h, {0.5 * std::exp((mu - h) / sigma)}, {}, 0.0));
    } else {
        p.pieces.push_back(make_piece(0.0, h - mu, {0.5 * std::exp((mu - h) / sigma)}, {}, 0.0));
        p.pieces.push_back(make_piece(h - mu, h, {}, {-0.5}, 1.0));
    }
    return p;
}

FetRecursionState fet_initial_state(const ProcessConfig& cfg) {
    FetRecursionState s;
    s.n = 1;
    s.cfg = cfg;
    s.pmf = fet_base(cfg);
    s.regime = s.pmf.regime;
    return s;
}

FetRecursionState step_fet_generic(const FetRecursionState& state) {
    const double mu = state.cfg.params.mu;
    const double sigma = state.cfg.params.sigma;
    const double h = *state.cfg.h;
    const double tol = snap_tolerance(state.cfg);
    const double p0 = state.pmf(0.0);
    const auto sm = exppoly::laplace_smooth(state.pmf.pieces, sigma, sigma * p0, 0.0);

    std::vector<ExpPolySegment> out;
    auto push = [&](ExpPolySegment s) {
        if (s.lo < tol) s.lo = 0.0;
        if (std::abs(s.hi - h) < tol || s.hi > h) s.hi = h;
        if (!out.empty()) s.lo = out.back().hi;
        if (s.hi - s.lo <= tol) return;
        reanchor(s, s.lo, sigma);
        trim_negligible(s, sigma);
        renormalize(s);
        out.push_back(std::move(s));
    };

    if (mu < 0.0) {
        // x + mu < 0: reflection at 0 with probability 1 - e^{(x + mu)/sigma} / 2
        const double top = std::min(-mu, h);
        push(make_piece(0.0, top, {std::exp(mu / sigma) * (sm.left_tail - 0.5 * p0)}, {}, p0));
    }
    for (const auto& p : sm.pieces) {
        auto s = exppoly::translated(p, -mu);
        if (s.hi <= tol || s.lo >= h - tol) continue;
        if (s.lo < 0.0) s = exppoly::clipped(std::move(s), 0.0, s.hi, sigma);
        push(std::move(s));
    }
    if (mu > 0.0) {
        // x + mu >= h: only mass already above the boundary side contributes
        const double lo = std::max(0.0, h - mu);
        push(make_piece(lo, h, {}, {sm.right_tail * std::exp(-(lo + mu - h) / sigma)}, 0.0));
    }
    if (out.empty() || out.front().lo != 0.0 || out.back().hi != h) {
        throw InvariantError("exit recursion lost the cover of [0, h)");
    }

    FetRecursionState next = state;
    next.n = state.n + 1;
    next.pmf.n = next.n;
    next.pmf.pieces = std::move(out);
    return next;
}

FetRecursionState step_fet_mu_pos(const FetRecursionState& state) {
    require_fet_regime(state, FetRegime::FetMuPosLtH, "step_fet_mu_pos");
    auto next = step_fet_generic(state);
    const double tol = snap_tolerance(state.cfg);
    const double mu = state.cfg.params.mu;
    const double h = *state.cfg.h;
    const int l = ell_n(mu, h, next.n, tol);
    expect_pieces(next.pmf, static_cast<std::size_t>(l), "step_fet_mu_pos");
    for (int i = 1; i < l; ++i) {
        const auto& p = next.pmf.pieces[static_cast<std::size_t>(l - i)];
        if (std::abs(p.lo - (h - i * mu)) > 1e3 * tol) throw InvariantError("step_fet_mu_pos: knot mismatch");
    }
    return next;
}

FetRecursionState step_fet_mu_neg(const FetRecursionState& state) {
    require_fet_regime(state, FetRegime::FetMuNeg, "step_fet_mu_neg");
    auto next = step_fet_generic(state);
    const double tol = snap_tolerance(state.cfg);
    const double mu = state.cfg.params.mu;
    const double h = *state.cfg.h;
    int count = h_n(mu, h, next.n, tol);
    // a knot falling exactly on h leaves an empty last piece
    if (count > 1 && -(count - 1) * mu >= h - tol) --count;
    expect_pieces(next.pmf, static_cast<std::size_t>(count), "step_fet_mu_neg");
    for (int i = 1; i < count; ++i) {
        const auto& p = next.pmf.pieces[static_cast<std::size_t>(i)];
        if (std::abs(p.lo - (-i * mu)) > 1e3 * tol) throw InvariantError("step_fet_mu_neg: knot mismatch");
    }
    return next;
}

FetRecursionState step_fet_mu_zero(const FetRecursionState& state) {
    require_fet_regime(state, FetRegime::FetMuZero, "step_fet_mu_zero");
    const double sigma = state.cfg.params.sigma;
    const double h = *state.cfg.h;
    const auto& seg = state.pmf.pieces.front();
    const std::size_t na = seg.a.size();
    const std::size_t nb = seg.b.size();
    const double half = 0.5 * sigma;

    std::vector<double> alpha(na + 1, 0.0);
    std::vector<double> beta(nb + 1, 0.0);

    for (std::size_t j = 1; j <= na; ++j) {
        // -sum_{k >= j-1} alpha_k (-sigma/2)^{k-j+1} k!/j!
        double c = -1.0 / static_cast<double>(j);
        double v = 0.0;
        for (std::size_t k = j - 1; k < na; ++k) {
            if (k > j - 1) c *= -half * static_cast<double>(k);
            v += seg.a[k] * c;
        }
        alpha[j] = v;
    }
    for (std::size_t j = 1; j <= nb; ++j) {
        double c = 1.0 / static_cast<double>(j);
        double v = 0.0;
        for (std::size_t k = j - 1; k < nb; ++k) {
            if (k > j - 1) c *= half * static_cast<double>(k);
            v += seg.b[k] * c;
        }
        beta[j] = v;
    }
    {
        double a0 = 0.0;
        double b0 = 0.0;
        double hp = 1.0;
        double c = 1.0;  // (sigma/2)^{k+1} k! (-1)^k, built up as k grows
        for (std::size_t k = 0; k < na; ++k) {
            hp *= h;
            c = k == 0 ? half : c * -half * static_cast<double>(k);
            a0 += seg.a[k] * (hp / static_cast<double>(k + 1) + c);
            b0 -= seg.a[k] * c;
        }
        c = 1.0;
        for (std::size_t k = 0; k < nb; ++k) {
            c = k == 0 ? half : c * half * static_cast<double>(k);
            a0 -= seg.b[k] * gammainc::exp_moment(static_cast<int>(k), -2.0 / sigma, h, kInf);
            b0 += seg.b[k] * c;
        }
        const double at0 = (na ? seg.a[0] : 0.0) + (nb ? seg.b[0] : 0.0);
        b0 += sigma * at0;
        alpha[0] = a0;
        beta[0] = b0;
    }

    ExpPolySegment s;
    s.lo = 0.0;
    s.hi = h;
    s.shift = 0.0;
    s.a = std::move(alpha);
    s.b = std::move(beta);
    s.log_scale = seg.log_scale - std::log(2.0 * sigma);
    trim_negligible(s, sigma);
    renormalize(s);

    FetRecursionState next = state;
    next.n = state.n + 1;
    next.pmf.n = next.n;
    next.pmf.pieces = {std::move(s)};
    return next;
}

std::pair<double, double> fet_mu_pos_high(const ProcessConfig& cfg, int n) {
    if (dispatch_fet_regime(cfg) != FetRegime::FetMuPosGeH) throw RegimeError("fet_mu_pos_high needs 0 < h <= mu");
    if (n < 1) throw DomainError("fet_mu_pos_high: n must be >= 1");
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    const double h = *cfg.h;
    if (n == 1) return {1.0, -0.5 * std::exp((h - mu) / sigma)};
    const double q = 0.5 + h / (2.0 * sigma);
    const double beta = 0.5 * std::exp((h - (n - 1) * mu) / sigma) * std::pow(q, n - 2) -
                        0.5 * std::exp((h - n * mu) / sigma) * std::pow(q, n - 1);
    return {0.0, beta};
}

std::pair<double, double> fet_mu_neg_high(const ProcessConfig& cfg, int n) {
    if (dispatch_fet_regime(cfg) != FetRegime::FetMuNegGeH) throw RegimeError("fet_mu_neg_high needs 0 < h <= -mu");
    if (n < 1) throw DomainError("fet_mu_neg_high: n must be >= 1");
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    const double h = *cfg.h;
    double alpha = 0.5 * std::exp((mu - h) / sigma);
    double eta = 0.0;
    for (int k = 1; k < n; ++k) {
        const double a = 0.5 * std::exp(mu / sigma) * (h / sigma - 1.0) * alpha -
                         0.5 * std::exp((mu - h) / sigma) * eta;
        eta = alpha + eta;
        alpha = a;
    }
    return {eta, alpha};
}

FetRecursionState step_fet(const FetRecursionState& state) {
    switch (state.regime) {
        case FetRegime::FetMuPosLtH: return step_fet_mu_pos(state);
        case FetRegime::FetMuNeg: return step_fet_mu_neg(state);
        case FetRegime::FetMuZero: return step_fet_mu_zero(state);
        case FetRegime::FetMuPosGeH: {
            FetRecursionState next = state;
            next.n = state.n + 1;
            const auto [eta, beta] = fet_mu_pos_high(state.cfg, next.n);
            next.pmf.n = next.n;
            next.pmf.pieces = {make_piece(0.0, *state.cfg.h, {}, {beta}, eta)};
            return next;
        }
        case FetRegime::FetMuNegGeH: {
            FetRecursionState next = state;
            next.n = state.n + 1;
            const auto [eta, alpha] = fet_mu_neg_high(state.cfg, next.n);
            next.pmf.n = next.n;
            next.pmf.pieces = {make_piece(0.0, *state.cfg.h, {alpha}, {}, eta)};
            return next;
        }
    }
    throw RegimeError("unknown first exit time regime");
}

namespace {

struct CacheEntry {
    FetDistribution dist;
    FetRecursionState last;
};

std::mutex& cache_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::tuple<double, double, double>, CacheEntry>& cache() {
    static std::map<std::tuple<double, double, double>, CacheEntry> c;
    return c;
}

}  // namespace

FetDistribution fet_distribution(const ProcessConfig& cfg, int n_max) {
    if (n_max < 1) throw DomainError("fet_distribution: n_max must be >= 1");
    cfg.validate_fet();
    // the pmf as a function of x does not depend on cfg.x
    ProcessConfig key_cfg = cfg;
    key_cfg.x = 0.0;
    const auto key = std::make_tuple(cfg.params.mu, cfg.params.sigma, *cfg.h);
    std::lock_guard lock(cache_mutex());
    auto it = cache().find(key);
    if (it == cache().end()) {
        CacheEntry e;
        e.last = fet_initial_state(key_cfg);
        e.dist.h = *cfg.h;
        e.dist.regime = e.last.regime;
        e.dist.pieces_by_n.push_back(e.last.pmf);
        it = cache().emplace(key, std::move(e)).first;
    }
    auto& e = it->second;
    while (e.dist.n_max() < n_max) {
        e.last = step_fet(e.last);
        e.dist.pieces_by_n.push_back(e.last.pmf);
    }
    FetDistribution out;
    out.h = e.dist.h;
    out.regime = e.dist.regime;
    out.pieces_by_n.assign(e.dist.pieces_by_n.begin(), e.dist.pieces_by_n.begin() + n_max);
    return out;
}

FetPmf fet_pmf(const ProcessConfig& cfg, int n) {
    if (n < 1) throw DomainError("fet_pmf: n must be >= 1");
    return fet_distribution(cfg, n).at(n);
}

std::vector<double> fet_cdf(const ProcessConfig& cfg, int n_max) {
    const auto dist = fet_distribution(cfg, n_max);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_max));
    double acc = 0.0;
    for (const auto& p : dist.pieces_by_n) {
        acc += p(cfg.x);
        out.push_back(acc);
    }
    return out;
}

MeanFet mean_fet(const ProcessConfig& cfg, double rel_tol, int max_terms) {
    if (!(rel_tol > 0.0)) throw DomainError("mean_fet: rel_tol must be > 0");
    cfg.validate_fet();
    constexpr int kWindow = 10;
    auto state = fet_initial_state(cfg);
    std::vector<double> recent;
    MeanFet out;
    double sum = 0.0;
    double mass = 0.0;
    for (int n = 1; n <= max_terms; ++n) {
        if (n > 1) state = step_fet(state);
        const double p = state.pmf(cfg.x);
        sum += n * p;
        mass += p;
        recent.push_back(p);
        if (recent.size() > kWindow + 1) recent.erase(recent.begin());
        if (static_cast<int>(recent.size()) <= kWindow || mass < 0.5) continue;
        double rho = 0.0;
        bool usable = true;
        for (std::size_t i = 1; i < recent.size(); ++i) {
            if (!(recent[i - 1] > 0.0)) {
                usable = recent[i] == 0.0;
                continue;
            }
            rho = std::max(rho, recent[i] / recent[i - 1]);
        }
        if (!usable || rho >= 1.0) continue;
        const double tail = p * (n * rho / (1.0 - rho) + rho / ((1.0 - rho) * (1.0 - rho)));
        if (tail <= rel_tol * sum) {
            out.mean = sum;
            out.tail_bound = tail;
            out.terms = n;
            out.tail_ratio = rho;
            return out;
        }
    }
    throw InvariantError("mean_fet: geometric tail did not settle within " + std::to_string(max_terms) + " terms");
}

}  // namespace lindley
