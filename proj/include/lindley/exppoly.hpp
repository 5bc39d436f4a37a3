#pragma once

#include <span>
#include <vector>

#include "lindley/core.hpp"

// Closed-form algebra of piecewise exponential-polynomial functions under the Laplace
// kernel. Both the position recursion and the exit-time recursion are one call to
// laplace_smooth followed by a shift of the abscissa and a clip to the output domain.
namespace lindley::exppoly {

/// integral_{t0}^{t1} t^p e^{kappa t} g(t) dt where g is the segment in its local variable
/// t = u - shift. Requires 0 <= t0 <= t1; t1 may be +inf for an unbounded segment.
double local_integral(const ExpPolySegment& seg, double sigma, double t0, double t1,
                      double kappa = 0.0, int extra_power = 0);

/// integral_{u0}^{u1} g(u) du with seg.shift <= u0 <= u1 <= seg.hi.
double integrate(const ExpPolySegment& seg, double sigma, double u0, double u1);

/// Result of G(v) = integral_0^H e^{-|v-y|/sigma} / (2 sigma) g(y) dy for a piecewise g
/// on [0, H), plus optional point masses at y = 0 seen from each side.
///
/// Inside the domain G is given piece by piece (same knots as g, anchored at each lo).
/// Left of the domain, G(v) = left_tail * e^{v/sigma}; right of a finite domain,
/// G(v) = right_tail * e^{-(v-H)/sigma}.
struct Smoothed {
    std::vector<ExpPolySegment> pieces;
    double left_tail = 0.0;
    double right_tail = 0.0;
    double domain_hi = 0.0;
};

/// pieces must be contiguous from 0 and anchored at their lower ends. left_mass enters
/// G(v) for v >= 0 as left_mass * e^{-v/sigma} / (2 sigma); right_mass enters the
/// left tail as right_mass * e^{v/sigma} / (2 sigma).
Smoothed laplace_smooth(std::span<const ExpPolySegment> pieces, double sigma, double left_mass,
                        double right_mass);

/// Translates a segment by delta along the axis.
ExpPolySegment translated(ExpPolySegment seg, double delta);

/// Restricts a segment to [lo, hi) and re-anchors it at the new lower end.
ExpPolySegment clipped(ExpPolySegment seg, double lo, double hi, double sigma);

}  // namespace lindley::exppoly
