#include "gsdm/diffusion.hpp"

#include <cmath>

#include "gsdm/errors.hpp"

namespace gsdm {

PerturbResult perturb(const Vec& x0, double t, const NoiseSchedule& schedule, Rng& rng) {
    if (t < 0.0 || t > 1.0) throw precondition_error("perturb: t outside [0, 1]");
    const MarginalStats m = schedule.marginal(t);
    PerturbResult r;
    r.eps.resize(x0.size());
    r.x_t.resize(x0.size());
    rng.fill_gaussian(r.eps);
    for (std::size_t i = 0; i < x0.size(); ++i)
        r.x_t[i] = m.mean_coef * x0[i] + m.std * r.eps[i];
    return r;
}

Vec conditional_score(const Vec& x_t, const Vec& x0, double t, const NoiseSchedule& schedule) {
    if (x_t.size() != x0.size()) throw precondition_error("conditional_score: shape mismatch");
    if (t <= 0.0 || t > 1.0)
        throw precondition_error("conditional_score: t must lie in (0, 1]");
    const MarginalStats m = schedule.marginal(t);
    if (m.std == 0.0)
        throw precondition_error("conditional_score: degenerate marginal (std = 0)");
    const double inv_var = 1.0 / (m.std * m.std);
    Vec s(x_t.size());
    for (std::size_t i = 0; i < x_t.size(); ++i)
        s[i] = -(x_t[i] - m.mean_coef * x0[i]) * inv_var;
    return s;
}

std::vector<Vec> simulate_forward_em_snapshots(const Vec& x0, const NoiseSchedule& schedule,
                                               std::size_t n_steps,
                                               const std::vector<double>& snapshot_times,
                                               Rng& rng) {
    if (n_steps < 1) throw precondition_error("simulate_forward_em: n_steps < 1");
    const double dt = 1.0 / static_cast<double>(n_steps);
    Vec x = x0;
    // A VE process carries sigma(0) worth of noise the moment t leaves 0;
    // the closed-form marginal includes it, so the pathwise simulation
    // must inject it up front.
    if (schedule.kind() == ScheduleKind::VE) {
        const double s0 = schedule.sigma(0.0);
        for (double& v : x) v += s0 * rng.gaussian();
    }
    std::vector<Vec> shots;
    std::size_t next_shot = 0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double g2 = schedule.diffusion_coef_sq(t);
        const double noise = std::sqrt(std::max(0.0, g2) * dt);
        if (schedule.kind() == ScheduleKind::VP) {
            const double drift = -0.5 * schedule.beta(t) * dt;
            for (double& v : x) v += drift * v + noise * rng.gaussian();
        } else {
            for (double& v : x) v += noise * rng.gaussian();
        }
        const double t_next = static_cast<double>(k + 1) * dt;
        while (next_shot < snapshot_times.size() &&
               snapshot_times[next_shot] <= t_next + 1e-12) {
            shots.push_back(x);
            ++next_shot;
        }
    }
    while (next_shot < snapshot_times.size()) {
        shots.push_back(x);
        ++next_shot;
    }
    return shots;
}

Vec simulate_forward_em(const Vec& x0, const NoiseSchedule& schedule, std::size_t n_steps,
                        Rng& rng) {
    return simulate_forward_em_snapshots(x0, schedule, n_steps, {1.0}, rng).front();
}

double covariance_kernel(const Mat& u0, const KernelIndex& idx) {
    const std::size_t n = u0.rows();
    if (idx.i >= n || idx.j >= n || idx.k >= n || idx.l >= n)
        throw precondition_error("covariance_kernel: index out of range");
    if (idx.s < 0.0 || idx.s > 1.0 || idx.t < 0.0 || idx.t > 1.0)
        throw precondition_error("covariance_kernel: times outside [0, 1]");
    double sum = 0.0;
    for (std::size_t h = 0; h < n; ++h)
        sum += u0(idx.i, h) * u0(idx.j, h) * u0(idx.k, h) * u0(idx.l, h);
    return std::min(idx.s, idx.t) * sum;
}

Mat sample_m(const Mat& u0, double t, Rng& rng) {
    if (t < 0.0) throw precondition_error("sample_m: t < 0");
    const std::size_t n = u0.rows();
    Vec g(n);
    rng.fill_gaussian(g);
    const double s = std::sqrt(t);
    for (double& v : g) v *= s;
    return symmetrize(recombine_diag(u0, g));
}

}  // namespace gsdm
