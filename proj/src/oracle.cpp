#include "lindley/oracle.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>

namespace lindley::oracle {

double sample_laplace(const LaplaceParams& params, double uniform) {
    if (!(uniform > 0.0 && uniform < 1.0)) throw DomainError("sample_laplace: uniform must lie in (0, 1)");
    const double d = uniform - 0.5;
    if (d == 0.0) return params.mu;
    const double s = d > 0.0 ? 1.0 : -1.0;
    return params.mu - params.sigma * s * std::log1p(-2.0 * std::abs(d));
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

SplitMix64::SplitMix64(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ mix64(stream * 0xd1b54a32d192ed03ULL + 1)) {}

std::uint64_t SplitMix64::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
}

double SplitMix64::uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

int default_threads() {
    if (const char* env = std::getenv("LINDLEY_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) return t;
        } catch (const std::exception&) {
        }
        throw DomainError("LINDLEY_THREADS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

constexpr std::int64_t kChunk = 4096;

struct Counts {
    std::vector<std::int64_t> atoms;
    std::vector<std::vector<std::int64_t>> hist;
    std::vector<std::int64_t> fet;
    std::int64_t censored = 0;
    std::int64_t fet_sum = 0;
    double fet_sumsq = 0.0;

    Counts(int n_max, int bins, int fet_cap, bool with_fet)
        : atoms(n_max + 1, 0),
          hist(n_max + 1, std::vector<std::int64_t>(bins + 1, 0)),
          fet(with_fet ? fet_cap : 0, 0) {}
};

struct ChunkSums {
    std::vector<double> sum;
    std::vector<double> sumsq;
};

}  // namespace

McResult simulate(const ProcessConfig& cfg, const McConfig& mc, int threads) {
    const LaplaceParams p = cfg.params;
    return simulate(cfg, mc, [p](double u) { return sample_laplace(p, u); }, threads);
}

McResult simulate(const ProcessConfig& cfg, const McConfig& mc, const IncrementSampler& sampler, int threads) {
    cfg.validate();
    if (mc.trajectories < 1) throw DomainError("simulate: trajectories must be >= 1");
    if (mc.bins < 10) throw DomainError("simulate: bins must be >= 10");
    if (mc.n_max < 0) throw DomainError("simulate: n_max must be >= 0");
    if (!(mc.domain_hi > 0.0)) throw DomainError("simulate: domain_hi must be > 0");
    if (mc.fet_cap < 1) throw DomainError("simulate: fet_cap must be >= 1");
    if (threads <= 0) threads = default_threads();

    const bool with_fet = cfg.h.has_value();
    const double h = with_fet ? *cfg.h : kInf;
    const double bw = mc.domain_hi / mc.bins;
    const std::int64_t n_chunks = (mc.trajectories + kChunk - 1) / kChunk;
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, n_chunks));

    std::vector<Counts> counts(workers, Counts(mc.n_max, mc.bins, mc.fet_cap, with_fet));
    std::vector<ChunkSums> sums(static_cast<std::size_t>(n_chunks));
    std::atomic<std::int64_t> next_chunk{0};

    auto work = [&](int w) {
        Counts& c = counts[w];
        for (;;) {
            const std::int64_t chunk = next_chunk.fetch_add(1);
            if (chunk >= n_chunks) break;
            ChunkSums& s = sums[chunk];
            s.sum.assign(mc.n_max + 1, 0.0);
            s.sumsq.assign(mc.n_max + 1, 0.0);
            const std::int64_t begin = chunk * kChunk;
            const std::int64_t end = std::min(mc.trajectories, begin + kChunk);
            for (std::int64_t t = begin; t < end; ++t) {
                SplitMix64 rng(mc.seed, static_cast<std::uint64_t>(t));
                double wv = cfg.x;
                bool exited = !with_fet;
                auto record = [&](int n) {
                    if (wv == 0.0) ++c.atoms[n];
                    const double b = wv / bw;
                    const int bin = b >= mc.bins ? mc.bins : static_cast<int>(b);
                    ++c.hist[n][bin];
                    s.sum[n] += wv;
                    s.sumsq[n] += wv * wv;
                };
                record(0);
                for (int n = 1;; ++n) {
                    if (n > mc.n_max && (exited || n > mc.fet_cap)) break;
                    wv = std::max(0.0, wv + sampler(rng.uniform()));
                    if (n <= mc.n_max) record(n);
                    if (!exited && wv >= h) {
                        exited = true;
                        if (n <= mc.fet_cap) {
                            ++c.fet[n - 1];
                            c.fet_sum += n;
                            c.fet_sumsq += static_cast<double>(n) * n;
                        }
                    }
                }
                if (!exited) ++c.censored;
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    Counts total(mc.n_max, mc.bins, mc.fet_cap, with_fet);
    for (const auto& c : counts) {
        for (int n = 0; n <= mc.n_max; ++n) {
            total.atoms[n] += c.atoms[n];
            for (int b = 0; b <= mc.bins; ++b) total.hist[n][b] += c.hist[n][b];
        }
        for (std::size_t k = 0; k < total.fet.size(); ++k) total.fet[k] += c.fet[k];
        total.censored += c.censored;
        total.fet_sum += c.fet_sum;
        total.fet_sumsq += c.fet_sumsq;
    }

    const double T = static_cast<double>(mc.trajectories);
    McResult r;
    r.trajectories = mc.trajectories;
    r.bin_width = bw;
    for (int n = 0; n <= mc.n_max; ++n) {
        const double pa = total.atoms[n] / T;
        r.atom_freq_by_n.push_back(pa);
        r.atom_se_by_n.push_back(std::sqrt(pa * (1.0 - pa) / T));
        std::vector<double> hist(mc.bins + 1);
        for (int b = 0; b <= mc.bins; ++b) hist[b] = total.hist[n][b] / T;
        r.histogram_by_n.push_back(std::move(hist));
        double s1 = 0.0;
        double s2 = 0.0;
        for (const auto& s : sums) {
            s1 += s.sum[n];
            s2 += s.sumsq[n];
        }
        const double m = s1 / T;
        r.mean_by_n.push_back(m);
        r.mean_se_by_n.push_back(std::sqrt(std::max(0.0, s2 / T - m * m) / T));
    }
    r.fet_counts = std::move(total.fet);
    r.fet_censored = total.censored;
    if (with_fet) {
        const double exits = T - static_cast<double>(total.censored);
        if (exits > 0) {
            r.fet_mean = static_cast<double>(total.fet_sum) / exits;
            const double var = total.fet_sumsq / exits - r.fet_mean * r.fet_mean;
            r.fet_mean_se = std::sqrt(std::max(0.0, var) / exits);
        }
    }
    return r;
}

std::vector<double> McResult::cdf_at_edges(int n) const {
    const auto& hist = histogram_by_n.at(static_cast<std::size_t>(n));
    std::vector<double> out;
    out.reserve(hist.size());
    // P(W <= 0) is the atom; afterwards accumulate bins [b w, (b+1) w)
    double acc = atom_freq_by_n.at(static_cast<std::size_t>(n));
    double in_bin0 = hist[0] - acc;
    out.push_back(acc);
    acc += in_bin0;
    for (std::size_t b = 1; b < hist.size(); ++b) {
        out.push_back(acc);
        acc += hist[b];
    }
    return out;
}

double McResult::fet_pmf(int n) const {
    if (n < 1 || n > static_cast<int>(fet_counts.size())) return 0.0;
    return static_cast<double>(fet_counts[static_cast<std::size_t>(n - 1)]) / static_cast<double>(trajectories);
}

double McResult::fet_pmf_se(int n) const {
    const double p = fet_pmf(n);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trajectories));
}

double GridFunction::at(double u) const {
    if (u < 0.0 || u > upper()) return 0.0;
    const double s = u / delta;
    const auto i = std::min(static_cast<std::size_t>(s), values.size() - 2);
    const double f = s - static_cast<double>(i);
    return values[i] * (1.0 - f) + values[i + 1] * f;
}

GridFunction point_mass(double x, double delta, double domain_hi) {
    if (!(delta > 0.0) || !(domain_hi > x)) throw DomainError("point_mass: need delta > 0 and domain_hi > x");
    GridFunction g;
    g.delta = delta;
    g.values.assign(static_cast<std::size_t>(std::ceil(domain_hi / delta)) + 1, 0.0);
    g.atom = 1.0;
    g.atom_location = x;
    return g;
}

namespace {

// Probability that y + Z <= 0.
double reflect_mass(double y, const LaplaceParams& p) {
    const double z = (y + p.mu) / p.sigma;
    return z > 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
}

// integral_0^d e^{-(d-s)/sigma} (g0 + (g1-g0) s / D) ds over a partial panel of length d <= D
double left_panel(double g0, double g1, double D, double d, double sigma) {
    if (d <= 0.0) return 0.0;
    const double slope = (g1 - g0) / D;
    const double e = -std::expm1(-d / sigma);  // 1 - e^{-d/sigma}
    // integral e^{-(d-s)/sigma} ds = sigma e; integral s e^{-(d-s)/sigma} ds = sigma d - sigma^2 e
    return g0 * sigma * e + slope * (sigma * d - sigma * sigma * e);
}

// integral_0^d e^{-s/sigma} (g0 + slope s) ds
double right_panel(double g0, double slope, double d, double sigma) {
    if (d <= 0.0) return 0.0;
    const double e = -std::expm1(-d / sigma);
    // integral s e^{-s/sigma} ds = sigma^2 e - sigma d e^{-d/sigma}
    return g0 * sigma * e + slope * (sigma * sigma * e - sigma * d * std::exp(-d / sigma));
}

}  // namespace

GridFunction ck_convolve(const GridFunction& prev, const LaplaceParams& params) {
    const double sigma = params.sigma;
    const double mu = params.mu;
    const double D = prev.delta;
    const std::size_t N = prev.values.size();
    const auto& g = prev.values;
    const double U = prev.upper();
    const double decay = std::exp(-D / sigma);

    // L[i] = integral_0^{y_i} e^{-(y_i - y)/sigma} g(y) dy, R[i] = integral_{y_i}^U e^{-(y - y_i)/sigma} g(y) dy
    std::vector<double> L(N, 0.0), R(N, 0.0);
    for (std::size_t i = 1; i < N; ++i) L[i] = decay * L[i - 1] + left_panel(g[i - 1], g[i], D, D, sigma);
    for (std::size_t i = N - 1; i-- > 0;) {
        R[i] = decay * R[i + 1] + right_panel(g[i], (g[i + 1] - g[i]) / D, D, sigma);
    }

    // G(v) = integral_0^U e^{-|v - y|/sigma} g(y) dy / (2 sigma)
    auto G = [&](double v) {
        if (v <= 0.0) return std::exp(v / sigma) * R[0] / (2.0 * sigma);
        if (v >= U) return std::exp(-(v - U) / sigma) * L[N - 1] / (2.0 * sigma);
        const auto k = std::min(static_cast<std::size_t>(v / D), N - 2);
        const double d = v - static_cast<double>(k) * D;
        const double slope = (g[k + 1] - g[k]) / D;
        const double gv = g[k] + slope * d;
        const double left = std::exp(-d / sigma) * L[k] + left_panel(g[k], gv, d, d, sigma);
        const double right = std::exp(-(D - d) / sigma) * R[k + 1] + right_panel(gv, slope, D - d, sigma);
        return (left + right) / (2.0 * sigma);
    };

    GridFunction next;
    next.delta = D;
    next.values.resize(N);
    next.atom_location = 0.0;
    const double a = prev.atom;
    const double xa = prev.atom_location;
    for (std::size_t i = 0; i < N; ++i) {
        const double u = static_cast<double>(i) * D;
        const double v = u - mu;
        next.values[i] = G(v) + a * std::exp(-std::abs(v - xa) / sigma) / (2.0 * sigma);
    }

    // trapezoid for the mass pushed below 0
    double atom = a * reflect_mass(xa, params);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double w = (i == 0 || i + 1 == N) ? 0.5 : 1.0;
        acc += w * reflect_mass(static_cast<double>(i) * D, params) * g[i];
    }
    next.atom = atom + acc * D;

    // beyond U the density decays at least like e^{-(u-U)/sigma}
    const double escaped = sigma * next.values.back();
    if (escaped > 1e-12) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "ck_convolve: about %.3g of mass escapes the grid; enlarge domain_hi", escaped);
        throw InvariantError(buf);
    }
    return next;
}

GridFunction ck_chain(const ProcessConfig& cfg, int n, double delta, double domain_hi) {
    cfg.validate();
    if (n < 0) throw DomainError("ck_chain: n must be >= 0");
    auto g = point_mass(cfg.x, delta, domain_hi);
    for (int k = 0; k < n; ++k) g = ck_convolve(g, cfg.params);
    return g;
}

namespace {

double cubic_at(const std::vector<double>& v, double D, double x) {
    const std::size_t N = v.size();
    const double s = x / D;
    auto i = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
    i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(N) - 4);
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        double w = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            w *= (s - static_cast<double>(i + b)) / static_cast<double>(a - b);
        }
        out += w * v[static_cast<std::size_t>(i + a)];
    }
    return out;
}

}  // namespace

double ExitGrid::at(double x) const {
    if (x < 0.0 || x > h) throw DomainError("ExitGrid::at outside [0, h]");
    return cubic_at(values, delta(), x);
}

ExitGrid exit_base(const ProcessConfig& cfg, int points) {
    cfg.validate_fet();
    if (points < 5) throw DomainError("exit_base: need at least 5 points");
    const double h = *cfg.h;
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    ExitGrid g;
    g.h = h;
    g.values.resize(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double x = h * i / (points - 1);
        const double z = (x + mu - h) / sigma;
        g.values[static_cast<std::size_t>(i)] = z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
    return g;
}

ExitGrid exit_recursion_step(const ExitGrid& prev, const ProcessConfig& cfg) {
    cfg.validate_fet();
    const double mu = cfg.params.mu;
    const double sigma = cfg.params.sigma;
    const double h = prev.h;
    const auto& v = prev.values;
    const std::size_t N = v.size();
    const double D = prev.delta();
    const auto last = static_cast<std::ptrdiff_t>(N) - 1;

    // kernel at offset (j - i) D - mu, tabulated
    std::vector<double> ktab(2 * N - 1);
    for (std::ptrdiff_t d = -last; d <= last; ++d) {
        ktab[static_cast<std::size_t>(d + last)] = std::exp(-std::abs(d * D - mu) / sigma) / (2.0 * sigma);
    }

    // three-point Gauss-Legendre on [a, b] with cubic interpolation of prev
    static constexpr std::array<double, 3> gx{-0.7745966692414834, 0.0, 0.7745966692414834};
    static constexpr std::array<double, 3> gw{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    auto gauss = [&](double a, double b, double x) {
        if (b <= a) return 0.0;
        const double c = 0.5 * (a + b);
        const double r = 0.5 * (b - a);
        double s = 0.0;
        for (int q = 0; q < 3; ++q) {
            const double y = c + r * gx[q];
            s += gw[q] * std::exp(-std::abs(y - x - mu) / sigma) / (2.0 * sigma) * cubic_at(v, D, y);
        }
        return s * r;
    };
    // composite Simpson over nodes lo..hi (3/8 rule on the last three panels when the count is odd)
    auto simpson = [&](std::ptrdiff_t lo, std::ptrdiff_t hi, std::ptrdiff_t i) {
        const std::ptrdiff_t m = hi - lo;
        if (m <= 0) return 0.0;
        auto f = [&](std::ptrdiff_t j) { return ktab[static_cast<std::size_t>(j - i + last)] * v[static_cast<std::size_t>(j)]; };
        if (m == 1) return 0.0;  // handled by the caller
        std::ptrdiff_t even_end = hi;
        double s = 0.0;
        if (m % 2 == 1) {
            even_end = hi - 3;
            s += 3.0 * D / 8.0 * (f(even_end) + 3.0 * f(even_end + 1) + 3.0 * f(even_end + 2) + f(hi));
        }
        if (even_end > lo) {
            double acc = f(lo) + f(even_end);
            for (std::ptrdiff_t j = lo + 1; j < even_end; ++j) acc += (j - lo) % 2 == 1 ? 4.0 * f(j) : 2.0 * f(j);
            s += D / 3.0 * acc;
        }
        return s;
    };
    auto smooth_part = [&](std::ptrdiff_t lo, std::ptrdiff_t hi, std::ptrdiff_t i, double x) {
        if (hi - lo == 1) return gauss(lo * D, hi * D, x);
        return simpson(lo, hi, i);
    };

    ExitGrid out;
    out.h = h;
    out.values.resize(N);
    const double p0 = v[0];
    for (std::ptrdiff_t i = 0; i <= last; ++i) {
        const double x = i * D;
        const double c = x + mu;
        double s = reflect_mass(x, cfg.params) * p0;
        if (c <= 0.0 || c >= h) {
            s += smooth_part(0, last, i, x);
        } else {
            const double kc = c / D;
            auto k = static_cast<std::ptrdiff_t>(std::floor(kc));
            const double frac = kc - static_cast<double>(k);
            if (frac < 1e-9 || frac > 1.0 - 1e-9) {
                k = static_cast<std::ptrdiff_t>(std::llround(kc));
                s += smooth_part(0, k, i, x) + smooth_part(k, last, i, x);
            } else {
                s += smooth_part(0, k, i, x) + gauss(k * D, c, x) + gauss(c, (k + 1) * D, x) +
                     smooth_part(k + 1, last, i, x);
            }
        }
        out.values[static_cast<std::size_t>(i)] = s;
    }
    return out;
}

}  // namespace lindley::oracle
