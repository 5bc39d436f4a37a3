#pragma once

#include <vector>

namespace lindley::gammainc {

/// Upper incomplete gamma of integer order, Gamma(order, y) = (order-1)! e^{-y} sum_{r<order} y^r / r!.
/// The finite sum is used for every real y, including negative ones.
double gamma_upper_int(int order, double y);

/// Same value, returned as sign and natural log of the magnitude.
struct LogMagnitude {
    double log_abs = 0.0;
    int sign = 0;
};
LogMagnitude gamma_upper_int_log(int order, double y);

/// Gamma(order, phi_b) - Gamma(order, phi_a); an infinite endpoint contributes 0.
double gamma_upper_int_diff(int order, double phi_b, double phi_a);

/// Lower incomplete gamma gamma(order, y) = integral_0^y t^{order-1} e^{-t} dt for y >= 0,
/// evaluated without cancellation.
double gamma_lower_int(int order, double y);

/// integral_0^w t^j e^{lambda t} dt for w >= 0 (w may be +inf when lambda < 0).
double exp_moment(int j, double lambda, double w);

/// integral_{t0}^{t1} t^j e^{lambda t} dt for 0 <= t0 <= t1 (t1 may be +inf when lambda < 0).
double exp_moment(int j, double lambda, double t0, double t1);

/// n! for n <= max_factorial(), from a precomputed table.
double factorial(int n);
int max_factorial();

}  // namespace lindley::gammainc
