#pragma once

#include <vector>

#include "lindley/core.hpp"
#include "lindley/oracle.hpp"

namespace lindley::cusum {

/// Smallest tilt accepted; the log-likelihood-ratio scale sigma * theta vanishes at 0.
inline constexpr double kThetaMin = 1e-6;

/// Pre-change law Laplace(mu, sigma), post-change law with density e^{theta x - b(theta)} f(x).
struct CusumSpec {
    LaplaceParams base;
    double theta = 0.5;
    double threshold = 1.0;

    void validate() const;
};

/// b(theta) = log E[e^{theta X}] = mu theta - log(1 - sigma^2 theta^2).
double log_mgf(const CusumSpec& spec);

/// Law of theta X - b(theta) under the pre-change law: Laplace(theta mu - b, sigma theta).
LaplaceParams llr_params(const CusumSpec& spec);

/// Mean of the post-change law, mu + 2 sigma^2 theta / (1 - sigma^2 theta^2).
double post_change_mean(const CusumSpec& spec);

/// Detector configuration: Lindley process driven by the pre-change log-likelihood ratios.
ProcessConfig detector_config(const CusumSpec& spec, double x0);

/// In-control run-length pmf P(n | x0), n = 1..n_max.
std::vector<double> run_length_distribution(const CusumSpec& spec, double x0, int n_max);

/// Average in-control run length.
double average_run_length(const CusumSpec& spec, double x0, double rel_tol = 1e-10);

/// Monte Carlo of the detector fed with raw observations, pre-change (in control) or
/// post-change (out of control, tilted law).
oracle::McResult simulate_detector(const CusumSpec& spec, double x0, const oracle::McConfig& mc,
                                   bool out_of_control = false, int threads = 0);

}  // namespace lindley::cusum
