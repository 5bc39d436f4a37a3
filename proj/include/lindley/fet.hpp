#pragma once

#include <utility>
#include <vector>

#include "lindley/core.hpp"

namespace lindley {

/// P(n | .) together with the configuration it belongs to.
struct FetRecursionState {
    int n = 1;
    FetRegime regime = FetRegime::FetMuZero;
    ProcessConfig cfg;
    FetPmf pmf;
};

/// min{n + 1, min{r > 0 : r mu >= h}} for 0 < mu < h; a tie r mu = h counts.
int ell_n(double mu, double h, int n, double tol);

/// min{n, min{r > 0 : -r mu > h}} for mu < 0 (strict inequality).
int h_n(double mu, double h, int n, double tol);

/// P(1 | .) = P(x + Z >= h).
FetPmf fet_base(const ProcessConfig& cfg);

FetRecursionState fet_initial_state(const ProcessConfig& cfg);

/// One step of the exit recursion through the shared convolution engine, valid in
/// every regime. Does not check the partition.
FetRecursionState step_fet_generic(const FetRecursionState& state);

/// 0 < mu < h; asserts the ell_{n+1}-piece partition.
FetRecursionState step_fet_mu_pos(const FetRecursionState& state);

/// mu < 0, -mu < h; asserts the h_{n+1}-piece partition.
FetRecursionState step_fet_mu_neg(const FetRecursionState& state);

/// mu = 0; single piece, polynomial coefficients in x times e^{+-x/sigma}.
FetRecursionState step_fet_mu_zero(const FetRecursionState& state);

/// (eta_n, beta_n) with P(n|x) = eta_n + beta_n e^{-x/sigma}, for 0 < h <= mu.
std::pair<double, double> fet_mu_pos_high(const ProcessConfig& cfg, int n);

/// (eta_n, alpha_n) with P(n|x) = eta_n + alpha_n e^{x/sigma}, for 0 < h <= -mu.
std::pair<double, double> fet_mu_neg_high(const ProcessConfig& cfg, int n);

/// Dispatching step.
FetRecursionState step_fet(const FetRecursionState& state);

/// P(n | .) in the dispatched regime.
FetPmf fet_pmf(const ProcessConfig& cfg, int n);

/// P(1 | .), ..., P(n_max | .). Results are memoised per (mu, sigma, h) and extended on demand.
FetDistribution fet_distribution(const ProcessConfig& cfg, int n_max);

/// Partial sums sum_{k <= n} P(k | cfg.x) for n = 1..n_max.
std::vector<double> fet_cdf(const ProcessConfig& cfg, int n_max);

struct MeanFet {
    double mean = 0.0;
    /// Bound on the neglected part of sum n P(n|x) from the fitted geometric tail.
    double tail_bound = 0.0;
    int terms = 0;
    double tail_ratio = 0.0;
};

/// E[N_x], truncated once the geometric tail bound is below rel_tol times the partial sum.
/// Throws InvariantError if no ratio < 1 emerges within max_terms.
MeanFet mean_fet(const ProcessConfig& cfg, double rel_tol = 1e-10, int max_terms = 200000);

}  // namespace lindley
