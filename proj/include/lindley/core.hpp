#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lindley {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a regime-specific routine receives a configuration of another regime.
class RegimeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when a computed object breaks one of its structural invariants.
class InvariantError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Laplace law of the increments, density exp(-|z - mu| / sigma) / (2 sigma).
struct LaplaceParams {
    double mu = 0.0;
    double sigma = 1.0;

    double mean() const { return mu; }
    double variance() const { return 2.0 * sigma * sigma; }

    void validate() const;
};

/// Start position and optional upper boundary of W_n = max(0, W_{n-1} + Z_n).
struct ProcessConfig {
    LaplaceParams params;
    double x = 0.0;
    std::optional<double> h;

    void validate() const;
    /// Throws unless h is present and 0 <= x < h.
    void validate_fet() const;
};

enum class PositionRegime { PosMuNonNeg, PosMuNegSmall, PosMuNegLarge };

enum class FetRegime { FetMuPosLtH, FetMuPosGeH, FetMuNeg, FetMuNegGeH, FetMuZero };

std::string_view to_string(PositionRegime r);
std::string_view to_string(FetRegime r);

/// Absolute tolerance used when comparing knots and parameter boundaries.
double snap_tolerance(const ProcessConfig& cfg);

PositionRegime dispatch_position_regime(const ProcessConfig& cfg);
FetRegime dispatch_fet_regime(const ProcessConfig& cfg);

/// One piece of a piecewise exponential-polynomial function.
///
/// On [lo, hi) the piece equals
///
///     exp(log_scale) * ( sum_j t^j (a[j] e^{t/sigma} + b[j] e^{-t/sigma}) + const_term ),
///
/// with t = u - shift. The exponentials are anchored at the shift, so moving a piece
/// along the axis only moves lo, hi and shift. hi may be +infinity, in which case every
/// a[j] is zero.
struct ExpPolySegment {
    double lo = 0.0;
    double hi = 0.0;
    double shift = 0.0;
    std::vector<double> a;
    std::vector<double> b;
    double const_term = 0.0;
    double log_scale = 0.0;

    bool unbounded() const { return std::isinf(hi); }
    double width() const { return hi - lo; }
    std::size_t degree_bound() const { return std::max(a.size(), b.size()); }
};

/// Value of a segment at u (no range check).
double evaluate_segment(const ExpPolySegment& seg, double u, double sigma);

/// Folds the largest coefficient magnitude into log_scale so that max|coefficient| = 1.
void renormalize(ExpPolySegment& seg);

/// Moves the anchor of a segment to new_shift without changing the function.
void reanchor(ExpPolySegment& seg, double new_shift, double sigma);

/// Drops trailing polynomial coefficients whose largest contribution on the segment is
/// below rel_tol times the segment's largest term.
void trim_negligible(ExpPolySegment& seg, double sigma, double rel_tol = 1e-22);

/// Law of W_n: atom at atom_location (0 for n >= 1, x for n = 0) plus a continuous part
/// made of contiguous segments covering (0, inf). For n = 0 the segment list is empty.
struct MixedDensity {
    int n = 0;
    double atom = 1.0;
    double atom_location = 0.0;
    std::vector<ExpPolySegment> segments;
    LaplaceParams params;
    PositionRegime regime = PositionRegime::PosMuNonNeg;
};

/// Continuous part of the density at u > 0. Knots belong to the segment on their left.
double evaluate_mixed_density(const MixedDensity& d, double u);

/// Index of the segment that contains u under the left-open/right-closed convention.
std::size_t locate_density_segment(const MixedDensity& d, double u);

/// P(n | .) for one n, as a partition of [0, h).
struct FetPmf {
    int n = 1;
    double h = 0.0;
    double sigma = 1.0;
    std::vector<ExpPolySegment> pieces;
    FetRegime regime = FetRegime::FetMuZero;

    /// Knots belong to the piece on their right.
    double operator()(double x) const;
    std::size_t locate(double x) const;
};

/// First-exit-time distribution: the P(n | .) for n = 1..n_max.
struct FetDistribution {
    double h = 0.0;
    FetRegime regime = FetRegime::FetMuZero;
    std::vector<FetPmf> pieces_by_n;

    const FetPmf& at(int n) const { return pieces_by_n.at(static_cast<std::size_t>(n - 1)); }
    int n_max() const { return static_cast<int>(pieces_by_n.size()); }
};

}  // namespace lindley
