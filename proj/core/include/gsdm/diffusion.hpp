#pragma once

#include <cstddef>
#include <utility>

#include "gsdm/linalg.hpp"
#include "gsdm/rng.hpp"
#include "gsdm/schedule.hpp"

namespace gsdm {

// Corrupted graph state at diffusion time t.
struct DiffusionState {
    Mat x_t;      // n x d
    Vec lambda_t; // n
    double t = 0.0;
};

// Index tuple into the covariance kernel of the adjacency noise process.
struct KernelIndex {
    std::size_t i = 0, j = 0, k = 0, l = 0;
    double s = 0.0, t = 0.0;
};

struct PerturbResult {
    Vec x_t;
    Vec eps;  // the standard-normal draw, returned for loss targets
};

// Closed-form forward perturbation: x_t = mean_coef(t) * x0 + std(t) * eps.
PerturbResult perturb(const Vec& x0, double t, const NoiseSchedule& schedule, Rng& rng);

// Score of the conditional density p_{t|0}(x_t | x0):
// -(x_t - mean_coef * x0) / std^2. Undefined at t = 0.
Vec conditional_score(const Vec& x_t, const Vec& x0, double t, const NoiseSchedule& schedule);

// Euler-Maruyama endpoint of the forward SDE at t = 1; cross-check oracle
// for the closed-form marginals. Records intermediate marginal snapshots
// when `snapshot_times` is non-empty (values must be increasing).
Vec simulate_forward_em(const Vec& x0, const NoiseSchedule& schedule, std::size_t n_steps,
                        Rng& rng);
std::vector<Vec> simulate_forward_em_snapshots(const Vec& x0, const NoiseSchedule& schedule,
                                               std::size_t n_steps,
                                               const std::vector<double>& snapshot_times,
                                               Rng& rng);

// Covariance kernel of the adjacency-space noise process
// M_t = U0 diag(B_t) U0^T:
// K(s,t)_{i,j,k,l} = min(s,t) * sum_h U0[i,h] U0[j,h] U0[k,h] U0[l,h].
double covariance_kernel(const Mat& u0, const KernelIndex& idx);

// One draw of M_t = U0 diag(g) U0^T with g ~ N(0, t I); symmetric and
// confined to the n-dimensional subspace {U0 D U0^T : D diagonal}.
Mat sample_m(const Mat& u0, double t, Rng& rng);

}  // namespace gsdm
