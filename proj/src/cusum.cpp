#include "lindley/cusum.hpp"

#include <cmath>

#include "lindley/fet.hpp"

namespace lindley::cusum {

void CusumSpec::validate() const {
    base.validate();
    if (!std::isfinite(theta) || std::abs(theta * base.sigma) >= 1.0) {
        throw DomainError("theta must satisfy |theta sigma| < 1");
    }
    if (theta < kThetaMin) throw DomainError("theta must be >= 1e-6");
    if (!(threshold > 0.0) || !std::isfinite(threshold)) throw DomainError("threshold must be finite and > 0");
}

double log_mgf(const CusumSpec& spec) {
    const double st = spec.base.sigma * spec.theta;
    if (!(std::abs(st) < 1.0)) throw DomainError("log_mgf: |theta sigma| must be < 1");
    return spec.base.mu * spec.theta - std::log1p(-st * st);
}

LaplaceParams llr_params(const CusumSpec& spec) {
    spec.validate();
    return {spec.theta * spec.base.mu - log_mgf(spec), spec.base.sigma * spec.theta};
}

double post_change_mean(const CusumSpec& spec) {
    spec.validate();
    const double s2 = spec.base.sigma * spec.base.sigma;
    return spec.base.mu + 2.0 * s2 * spec.theta / (1.0 - s2 * spec.theta * spec.theta);
}

ProcessConfig detector_config(const CusumSpec& spec, double x0) {
    ProcessConfig cfg{llr_params(spec), x0, spec.threshold};
    cfg.validate_fet();
    return cfg;
}

std::vector<double> run_length_distribution(const CusumSpec& spec, double x0, int n_max) {
    const auto cfg = detector_config(spec, x0);
    const auto dist = fet_distribution(cfg, n_max);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_max));
    for (const auto& p : dist.pieces_by_n) out.push_back(p(x0));
    return out;
}

double average_run_length(const CusumSpec& spec, double x0, double rel_tol) {
    return mean_fet(detector_config(spec, x0), rel_tol).mean;
}

oracle::McResult simulate_detector(const CusumSpec& spec, double x0, const oracle::McConfig& mc,
                                   bool out_of_control, int threads) {
    const auto cfg = detector_config(spec, x0);
    const double theta = spec.theta;
    const double b = log_mgf(spec);
    const LaplaceParams base = spec.base;
    if (!out_of_control) {
        return oracle::simulate(cfg, mc, [=](double u) { return theta * oracle::sample_laplace(base, u) - b; }, threads);
    }
    // tilted law: rate 1/sigma + theta left of mu, 1/sigma - theta right of mu
    const double rl = 1.0 / base.sigma + theta;
    const double rr = 1.0 / base.sigma - theta;
    const double pl = rr / (rl + rr);
    return oracle::simulate(
        cfg, mc,
        [=](double u) {
            const double x = u < pl ? base.mu + std::log(u / pl) / rl : base.mu - std::log((1.0 - u) / (1.0 - pl)) / rr;
            return theta * x - b;
        },
        threads);
}

}  // namespace lindley::cusum
