#pragma once

#include <string>

#include "gsdm/config.hpp"

namespace gsdm {

enum class ScheduleKind { VP, VE };

// Shape of beta(t) (VP) or of the exponent ramp of sigma(t) (VE). All six
// shapes share the same endpoints: the VP families have beta(0)=beta_min
// and identical integral over [0,1]; the VE families run sigma from
// sigma_min to sigma_max. That pins equal initial and final
// signal-to-noise ratios across families of one kind.
enum class ScheduleFamily { Linear, Quadratic, Sqrt, Cosine, Sigmoid, TwoLevel };

ScheduleFamily schedule_family_from_string(const std::string& name);
std::string to_string(ScheduleFamily f);
ScheduleKind schedule_kind_from_string(const std::string& name);
std::string to_string(ScheduleKind k);

// Marginal statistics of the forward process at time t:
// x_t = mean_coef * x_0 + std * eps.
struct MarginalStats {
    double mean_coef = 1.0;
    double std = 0.0;
};

class NoiseSchedule {
  public:
    NoiseSchedule(ScheduleKind kind, ScheduleFamily family, double beta_min = 0.1,
                  double beta_max = 20.0, double sigma_min = 0.1, double sigma_max = 10.0);

    // Reads schedule.kind, schedule.family, schedule.beta_min,
    // schedule.beta_max, schedule.sigma_min, schedule.sigma_max,
    // schedule.sigma_scale.
    static NoiseSchedule from_config(const Config& cfg, const std::string& prefix = "schedule.");

    ScheduleKind kind() const { return kind_; }
    ScheduleFamily family() const { return family_; }
    double terminal_time() const { return 1.0; }

    // VP only: instantaneous beta(t).
    double beta(double t) const;
    // VP only: closed-form integral of beta over [t0, t1].
    double integral_beta(double t0, double t1) const;
    // VE only: sigma(t) = sigma_min * (sigma_max/sigma_min)^w(t).
    double sigma(double t) const;

    MarginalStats marginal(double t) const;
    double snr(double t) const;  // mean_coef^2 / std^2; +inf at t=0 for VE

    // Squared diffusion coefficient of the SDE at time t
    // (beta(t) for VP, d sigma^2/dt for VE).
    double diffusion_coef_sq(double t) const;

    // Forward transition over [t0, t1]: x_{t1} = mean_coef * x_{t0} + std * z.
    MarginalStats transition(double t0, double t1) const;

    double beta_min() const { return beta_min_; }
    double beta_max() const { return beta_max_; }
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }

  private:
    double shape(double t) const;           // u(t)
    double shape_integral(double t) const;  // closed-form of int_0^t u
    double shape_derivative(double t) const;

    ScheduleKind kind_;
    ScheduleFamily family_;
    double beta_min_, beta_max_;
    double sigma_min_, sigma_max_;
    double affine_a_ = 0.0, affine_b_ = 0.0;  // beta(t) = a + b*u(t)
};

}  // namespace gsdm
