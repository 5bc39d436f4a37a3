#pragma once

#include <optional>
#include <vector>

#include "lindley/core.hpp"

namespace lindley {

/// Default bound on the time index of the position recursion.
inline constexpr int kDefaultMaxPositionSteps = 30;

enum class PieceOneState { PieceOneAlive, PieceOneDead };

/// State of the position recursion after n steps.
struct PositionRecursionState {
    int n = 0;
    PositionRegime regime = PositionRegime::PosMuNonNeg;
    ProcessConfig cfg;
    MixedDensity density;
    /// Only set for PosMuNegSmall: whether the piece (0, x + n mu) is non-empty.
    std::optional<PieceOneState> subcase;
};

/// Law of W_0: the point mass at x.
MixedDensity initial_law(const ProcessConfig& cfg);

/// Law of W_1.
MixedDensity one_step_law(const ProcessConfig& cfg);

/// Recursion state at n = 1 in the regime dispatched from cfg.
PositionRecursionState initial_state(const ProcessConfig& cfg);

/// One step of the recursion for mu >= 0. The partition at n is
/// {0} u (0, mu] u ... u ((n-2) mu, (n-1) mu] u ((n-1) mu, n mu + x] u (n mu + x, inf).
PositionRecursionState step_mu_nonneg(const PositionRecursionState& state);

/// One step for -x < mu < 0. The partition at n is {0} u (0, x + n mu] u (x + n mu, inf),
/// where the first piece vanishes once x + n mu <= 0.
PositionRecursionState step_mu_neg_small(const PositionRecursionState& state);

/// One step for mu <= -x: a single decaying piece on (0, inf).
PositionRecursionState step_mu_neg_large(const PositionRecursionState& state);

/// Dispatches on state.regime.
PositionRecursionState step(const PositionRecursionState& state);

/// Law of W_n (n >= 0).
MixedDensity density_at(const ProcessConfig& cfg, int n, int max_n = kDefaultMaxPositionSteps);

/// Laws of W_0, ..., W_{n_max}.
std::vector<MixedDensity> density_chain(const ProcessConfig& cfg, int n_max,
                                        int max_n = kDefaultMaxPositionSteps);

/// P(W_n <= u); 0 for u < 0 and the atom at u = 0.
double cdf(const MixedDensity& d, double u);

/// Mass of the continuous part, by closed-form integration.
double continuous_mass(const MixedDensity& d);

/// atom + continuous mass.
double total_mass(const MixedDensity& d);

/// E[W_n^order] for order 1 or 2.
double moments(const MixedDensity& d, int order);

/// Var(W_n).
double variance(const MixedDensity& d);

/// |c_{n} - sigma f_{n}(0+)| for a density of the mu >= 0 regime.
double atom_boundary_gap(const MixedDensity& d_next);

/// Upper end of the default evaluation grid, x + n (|mu| + 8 sigma).
double default_grid_end(const ProcessConfig& cfg, int n);

}  // namespace lindley
