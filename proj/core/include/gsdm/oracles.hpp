#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsdm/diffusion.hpp"
#include "gsdm/graph.hpp"
#include "gsdm/linalg.hpp"
#include "gsdm/metrics.hpp"
#include "gsdm/rng.hpp"
#include "gsdm/schedule.hpp"

namespace gsdm::oracles {

// Outcome of one self-verification check.
struct OracleReport {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::size_t samples = 0;
    std::string detail;
};

// Exact marginal score for Gaussian data N(mu0, s0^2) pushed through the
// forward process: -(x - mean_coef*mu0) / (mean_coef^2 s0^2 + std^2).
Vec analytic_gaussian_score(const Vec& x, double t, double mu0, double s0,
                            const NoiseSchedule& schedule);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

// Empirical Cov(M_s[i,j], M_t[k,l]) over joint Brownian draws, with a
// leave-one-out jackknife standard error.
McEstimate mc_covariance(const Mat& u0, const KernelIndex& idx, std::size_t n_samples, Rng& rng);

// Reference O(N^2) biased squared-MMD estimator, arithmetic independent of
// metrics::mmd (explicit three-term expansion, own distance code).
double naive_mmd(const std::vector<Vec>& set_a, const std::vector<Vec>& set_b, MmdKernel kernel,
                 double bandwidth);

// Central finite differences of the closed-form Gaussian log densities.
Vec fd_conditional_score(const Vec& x_t, const Vec& x0, double t, const NoiseSchedule& schedule,
                         double h);
Vec fd_gaussian_marginal_score(const Vec& x, double t, double mu0, double s0,
                               const NoiseSchedule& schedule, double h);

// Per-type graphlet membership counters built from pattern-specific
// enumeration (triangle-based clique counting, middle-edge path scans,
// common-neighbor diamond scans); independent of metrics::orbit_counts.
std::vector<Vec> orbit_counts_reference(const Graph& g);

// Piecewise trapezoid quadrature of beta over [t0, t1], splitting at the
// family's discontinuity points.
double beta_quadrature(const NoiseSchedule& schedule, double t0, double t1, std::size_t panels);

// Deliberately wrong covariance kernel (min(s,t) replaced by s*t); the
// verification suite uses it to prove the Prop-style check can fail.
double covariance_kernel_mutated(const Mat& u0, const KernelIndex& idx);

}  // namespace gsdm::oracles
