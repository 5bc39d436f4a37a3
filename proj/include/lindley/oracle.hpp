#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lindley/core.hpp"

// Independent reference computations: Monte Carlo trajectories of the recursion and
// grid quadrature of the one-step integral identities.
namespace lindley::oracle {

/// Inverse-CDF Laplace draw; uniform must lie in (0, 1).
double sample_laplace(const LaplaceParams& params, double uniform);

/// Counter-based generator: the stream of trajectory i depends only on (seed, i).
class SplitMix64 {
public:
    SplitMix64(std::uint64_t seed, std::uint64_t stream);
    std::uint64_t next();
    /// Uniform in the open interval (0, 1).
    double uniform();

private:
    std::uint64_t state_;
};

struct McConfig {
    std::int64_t trajectories = 100000;
    std::uint64_t seed = 42;
    /// Histograms and atom frequencies are recorded for n = 0..n_max.
    int n_max = 10;
    int bins = 1000;
    double domain_hi = 10.0;
    /// Trajectories still below h after fet_cap steps are counted as censored.
    int fet_cap = 10000;
};

struct McResult {
    std::int64_t trajectories = 0;
    double bin_width = 0.0;
    std::vector<double> atom_freq_by_n;
    std::vector<double> atom_se_by_n;
    /// bins + 1 entries per n; the last one collects W_n >= domain_hi.
    std::vector<std::vector<double>> histogram_by_n;
    std::vector<double> mean_by_n;
    std::vector<double> mean_se_by_n;
    /// fet_counts[k] = number of trajectories with first exit at n = k + 1.
    std::vector<std::int64_t> fet_counts;
    std::int64_t fet_censored = 0;
    double fet_mean = 0.0;
    double fet_mean_se = 0.0;

    /// Empirical P(W_n <= b * bin_width) at the bin edges, b = 0..bins.
    std::vector<double> cdf_at_edges(int n) const;
    double fet_pmf(int n) const;
    double fet_pmf_se(int n) const;
};

/// Maps a uniform in (0, 1) to one increment.
using IncrementSampler = std::function<double(double)>;

/// Threads used by simulate: LINDLEY_THREADS if set, otherwise the hardware concurrency.
int default_threads();

/// Simulates W_n = max(0, W_{n-1} + Z_n) from cfg.x. When cfg.h is set, trajectories
/// run until the first n with W_n >= h (or fet_cap). Trajectories are reduced in fixed
/// chunks, so the result does not depend on the thread count.
McResult simulate(const ProcessConfig& cfg, const McConfig& mc, int threads = 0);

/// Same with an arbitrary increment law.
McResult simulate(const ProcessConfig& cfg, const McConfig& mc, const IncrementSampler& sampler,
                  int threads = 0);

/// Function on a uniform grid plus an atom.
struct GridFunction {
    double delta = 1e-3;
    std::vector<double> values;
    double atom = 0.0;
    double atom_location = 0.0;

    double upper() const { return delta * static_cast<double>(values.size() - 1); }
    /// Linear interpolation; 0 beyond the grid.
    double at(double u) const;
};

/// Point mass at x on a grid over [0, domain_hi].
GridFunction point_mass(double x, double delta, double domain_hi);

/// One Chapman-Kolmogorov step on the grid. The continuous part is integrated exactly
/// against the piecewise-linear interpolant of prev, so the kink of the kernel costs
/// nothing. Throws InvariantError if more than 1e-12 of mass escapes the grid.
GridFunction ck_convolve(const GridFunction& prev, const LaplaceParams& params);

/// Grid law of W_n, n >= 0, starting from the point mass at cfg.x.
GridFunction ck_chain(const ProcessConfig& cfg, int n, double delta, double domain_hi);

/// Values on a uniform grid over [0, h].
struct ExitGrid {
    double h = 1.0;
    std::vector<double> values;

    double delta() const { return h / static_cast<double>(values.size() - 1); }
    /// Cubic interpolation inside [0, h].
    double at(double x) const;
};

/// P(1 | .) sampled on `points` nodes.
ExitGrid exit_base(const ProcessConfig& cfg, int points = 4001);

/// P(n+1 | x) = M(x) P(n | 0) + integral_0^h k(y - x - mu) P(n | y) dy by composite Simpson,
/// split at the kink y = x + mu.
ExitGrid exit_recursion_step(const ExitGrid& prev, const ProcessConfig& cfg);

}  // namespace lindley::oracle
