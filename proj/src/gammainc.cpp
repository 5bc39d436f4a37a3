#include "lindley/gammainc.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "lindley/core.hpp"

namespace lindley::gammainc {

namespace {

constexpr int kMaxFactorial = 170;

const std::array<double, kMaxFactorial + 1>& factorial_table() {
    static const auto table = [] {
        std::array<double, kMaxFactorial + 1> t{};
        long double acc = 1.0L;
        t[0] = 1.0;
        for (int i = 1; i <= kMaxFactorial; ++i) {
            acc *= static_cast<long double>(i);
            t[static_cast<std::size_t>(i)] = static_cast<double>(acc);
        }
        return t;
    }();
    return table;
}

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

// sum_{r=0}^{n} y^r / r!, compensated.
double truncated_exp_series(int n, double y) {
    CompensatedSum s;
    double term = 1.0;
    s.add(term);
    for (int r = 1; r <= n; ++r) {
        term *= y / r;
        s.add(term);
    }
    return s.value();
}

void check_order(int order) {
    if (order < 1) {
        throw DomainError("incomplete gamma: order must be >= 1");
    }
}

// Series sum_{m>=0} s_m with s_0 = first, s_m = s_{m-1} * ratio(m), evaluated with a
// running exponent so that intermediate terms never overflow. Returns log of the sum.
template <class Ratio>
double log_positive_series(double first, Ratio ratio, int min_terms) {
    double log_base = std::log(first);
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 100000; ++m) {
        term *= ratio(m);
        sum += term;
        if (sum > 1e250) {
            log_base += std::log(sum);
            term /= sum;
            sum = 1.0;
        }
        if (m >= min_terms && term < sum * 1e-18) {
            break;
        }
    }
    return log_base + std::log(sum);
}

}  // namespace

double factorial(int n) {
    if (n < 0 || n > kMaxFactorial) {
        throw DomainError("factorial: argument out of table range");
    }
    return factorial_table()[static_cast<std::size_t>(n)];
}

int max_factorial() { return kMaxFactorial; }

double gamma_upper_int(int order, double y) {
    check_order(order);
    if (std::isinf(y)) {
        if (y > 0) return 0.0;
        throw DomainError("incomplete gamma: argument must be finite or +inf");
    }
    const int n = order - 1;
    const double s = truncated_exp_series(n, y);
    if (n <= kMaxFactorial) {
        const double e = std::exp(-y);
        if (std::isfinite(e)) {
            return factorial(n) * e * s;
        }
    }
    const auto lm = gamma_upper_int_log(order, y);
    return lm.sign * std::exp(lm.log_abs);
}

LogMagnitude gamma_upper_int_log(int order, double y) {
    check_order(order);
    const int n = order - 1;
    // Rescale the series by its largest term so that no partial sum overflows.
    const double ay = std::abs(y);
    double log_max = 0.0;
    if (ay > 0.0) {
        const int r_star = std::min(n, static_cast<int>(std::floor(ay)));
        log_max = r_star * std::log(ay) - std::lgamma(r_star + 1.0);
    }
    CompensatedSum s;
    for (int r = 0; r <= n; ++r) {
        double lt = (r == 0 ? 0.0 : r * std::log(ay) - std::lgamma(r + 1.0)) - log_max;
        if (ay == 0.0 && r > 0) break;
        const double sign = (y < 0 && (r % 2 == 1)) ? -1.0 : 1.0;
        s.add(sign * std::exp(lt));
    }
    const double v = s.value();
    LogMagnitude out;
    if (v == 0.0) {
        out.sign = 0;
        out.log_abs = -std::numeric_limits<double>::infinity();
        return out;
    }
    out.sign = v > 0 ? 1 : -1;
    out.log_abs = std::lgamma(n + 1.0) - y + log_max + std::log(std::abs(v));
    return out;
}

double gamma_upper_int_diff(int order, double phi_b, double phi_a) {
    check_order(order);
    const double gb = std::isinf(phi_b) && phi_b > 0 ? 0.0 : gamma_upper_int(order, phi_b);
    const double ga = std::isinf(phi_a) && phi_a > 0 ? 0.0 : gamma_upper_int(order, phi_a);
    return gb - ga;
}

double gamma_lower_int(int order, double y) {
    check_order(order);
    if (y < 0.0) {
        throw DomainError("lower incomplete gamma: argument must be >= 0");
    }
    if (y == 0.0) return 0.0;
    if (std::isinf(y)) return std::exp(std::lgamma(static_cast<double>(order)));
    const double a = order;
    if (y < a + 1.0) {
        // y^a e^{-y} sum_m y^m / (a (a+1) ... (a+m))
        const double log_s =
            log_positive_series(1.0 / a, [&](int m) { return y / (a + m); }, 1);
        return std::exp(a * std::log(y) - y + log_s);
    }
    // Complement: (a-1)! (1 - e^{-y} sum_{r<a} y^r / r!); every term of the sum is positive.
    const int n = order - 1;
    double log_q = -std::numeric_limits<double>::infinity();
    {
        const double log_s = std::log(truncated_exp_series(n, y) * 1.0);
        if (std::isfinite(log_s)) {
            log_q = log_s - y;
        } else {
            log_q = gamma_upper_int_log(order, y).log_abs - std::lgamma(a);
        }
    }
    return std::exp(std::lgamma(a)) * (-std::expm1(log_q));
}

double exp_moment(int j, double lambda, double w) {
    if (j < 0) throw DomainError("exp_moment: negative power");
    if (w < 0.0) throw DomainError("exp_moment: negative width");
    if (w == 0.0) return 0.0;
    const double a = j + 1.0;
    if (std::isinf(w)) {
        if (!(lambda < 0.0)) {
            throw DomainError("exp_moment: divergent integral on an unbounded range");
        }
        return std::exp(std::lgamma(a) - a * std::log(-lambda));
    }
    if (lambda == 0.0) {
        return std::pow(w, a) / a;
    }
    const double z = lambda * w;
    const double log_w = std::log(w);
    if (lambda > 0.0) {
        // w^{j+1} sum_m z^m / (m! (j+m+1))
        const double log_s = log_positive_series(
            1.0 / a, [&](int m) { return z / m * (a + m - 1.0) / (a + m); },
            static_cast<int>(z) + 2);
        return std::exp(a * log_w + log_s);
    }
    const double y = -z;
    if (y < a + 1.0 || y < 600.0) {
        // w^{j+1} e^{-y} sum_m y^m / ((j+1) ... (j+1+m)) / ... scaled so the leading term is 1/(j+1)
        const double log_s =
            log_positive_series(1.0 / a, [&](int m) { return y / (a + m); }, 1);
        return std::exp(a * log_w - y + log_s);
    }
    return std::exp(std::log(gamma_lower_int(j + 1, y)) - a * std::log(-lambda));
}

double exp_moment(int j, double lambda, double t0, double t1) {
    if (t0 < 0.0 || t1 < t0) throw DomainError("exp_moment: need 0 <= t0 <= t1");
    if (t0 == t1) return 0.0;
    if (t0 == 0.0) return exp_moment(j, lambda, t1);
    // e^{lambda t0} sum_i C(j,i) t0^{j-i} E_i(lambda, t1 - t0); all terms are nonnegative.
    const double width = t1 - t0;
    double sum = 0.0;
    double binom = 1.0;
    for (int i = j; i >= 0; --i) {
        sum += binom * std::pow(t0, j - i) * exp_moment(i, lambda, width);
        binom = binom * i / (j - i + 1);
    }
    return std::exp(lambda * t0) * sum;
}

}  // namespace lindley::gammainc
