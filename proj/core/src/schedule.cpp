#include "gsdm/schedule.hpp"

#include <cmath>
#include <limits>

#include "gsdm/errors.hpp"

namespace gsdm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSigmoidSlope = 10.0;  // logistic steepness, centered at t = 1/2

double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

void check_time(double t) {
    if (t < 0.0 || t > 1.0) throw precondition_error("time outside [0, 1]");
}

}  // namespace

ScheduleFamily schedule_family_from_string(const std::string& name) {
    if (name == "linear") return ScheduleFamily::Linear;
    if (name == "quadratic") return ScheduleFamily::Quadratic;
    if (name == "sqrt") return ScheduleFamily::Sqrt;
    if (name == "cosine") return ScheduleFamily::Cosine;
    if (name == "sigmoid") return ScheduleFamily::Sigmoid;
    if (name == "twolevel") return ScheduleFamily::TwoLevel;
    throw format_error("unknown schedule family: " + name);
}

std::string to_string(ScheduleFamily f) {
    switch (f) {
        case ScheduleFamily::Linear: return "linear";
        case ScheduleFamily::Quadratic: return "quadratic";
        case ScheduleFamily::Sqrt: return "sqrt";
        case ScheduleFamily::Cosine: return "cosine";
        case ScheduleFamily::Sigmoid: return "sigmoid";
        case ScheduleFamily::TwoLevel: return "twolevel";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "vp" || name == "VP") return ScheduleKind::VP;
    if (name == "ve" || name == "VE") return ScheduleKind::VE;
    throw format_error("unknown schedule kind: " + name);
}

std::string to_string(ScheduleKind k) { return k == ScheduleKind::VP ? "vp" : "ve"; }

NoiseSchedule::NoiseSchedule(ScheduleKind kind, ScheduleFamily family, double beta_min,
                             double beta_max, double sigma_min, double sigma_max)
    : kind_(kind),
      family_(family),
      beta_min_(beta_min),
      beta_max_(beta_max),
      sigma_min_(sigma_min),
      sigma_max_(sigma_max) {
    if (beta_min < 0.0 || beta_max < beta_min)
        throw precondition_error("schedule: need 0 <= beta_min <= beta_max");
    if (sigma_min <= 0.0 || sigma_max < sigma_min)
        throw precondition_error("schedule: need 0 < sigma_min <= sigma_max");
    // Every family is rescaled so beta(0) = beta_min and the integral over
    // [0,1] equals the linear family's value; all six then share initial
    // and terminal SNR.
    const double total = beta_min_ + 0.5 * (beta_max_ - beta_min_);
    const double u0 = shape(0.0);
    const double area = shape_integral(1.0) - u0;  // int_0^1 (u - u(0))
    affine_b_ = area > 0.0 ? (total - beta_min_) / area : 0.0;
    affine_a_ = beta_min_ - affine_b_ * u0;
}

NoiseSchedule NoiseSchedule::from_config(const Config& cfg, const std::string& prefix) {
    const auto kind = schedule_kind_from_string(cfg.get_string(prefix + "kind", "vp"));
    const auto family = schedule_family_from_string(cfg.get_string(prefix + "family", "linear"));
    const double scale = cfg.get_double(prefix + "sigma_scale", 1.0);
    return NoiseSchedule(kind, family, cfg.get_double(prefix + "beta_min", 0.1),
                         cfg.get_double(prefix + "beta_max", 20.0),
                         cfg.get_double(prefix + "sigma_min", 0.1) / scale,
                         cfg.get_double(prefix + "sigma_max", 10.0) / scale);
}

double NoiseSchedule::shape(double t) const {
    switch (family_) {
        case ScheduleFamily::Linear: return t;
        case ScheduleFamily::Quadratic: return t * t;
        case ScheduleFamily::Sqrt: return std::sqrt(t);
        case ScheduleFamily::Cosine: return 0.5 * (1.0 - std::cos(kPi * t));
        case ScheduleFamily::Sigmoid:
            return 1.0 / (1.0 + std::exp(-kSigmoidSlope * (t - 0.5)));
        case ScheduleFamily::TwoLevel: return t < 0.5 ? 0.0 : 1.0;
    }
    return 0.0;
}

double NoiseSchedule::shape_integral(double t) const {
    switch (family_) {
        case ScheduleFamily::Linear: return 0.5 * t * t;
        case ScheduleFamily::Quadratic: return t * t * t / 3.0;
        case ScheduleFamily::Sqrt: return (2.0 / 3.0) * t * std::sqrt(t);
        case ScheduleFamily::Cosine: return 0.5 * (t - std::sin(kPi * t) / kPi);
        case ScheduleFamily::Sigmoid: {
            const double k = kSigmoidSlope;
            return (softplus(k * (t - 0.5)) - softplus(-0.5 * k)) / k;
        }
        case ScheduleFamily::TwoLevel: return t < 0.5 ? 0.0 : t - 0.5;
    }
    return 0.0;
}

double NoiseSchedule::shape_derivative(double t) const {
    switch (family_) {
        case ScheduleFamily::Linear: return 1.0;
        case ScheduleFamily::Quadratic: return 2.0 * t;
        case ScheduleFamily::Sqrt: return t > 0.0 ? 0.5 / std::sqrt(t) : 0.0;
        case ScheduleFamily::Cosine: return 0.5 * kPi * std::sin(kPi * t);
        case ScheduleFamily::Sigmoid: {
            const double s = shape(t);
            return kSigmoidSlope * s * (1.0 - s);
        }
        case ScheduleFamily::TwoLevel:
            throw precondition_error("twolevel VE schedule has no pointwise derivative");
    }
    return 0.0;
}

double NoiseSchedule::beta(double t) const {
    if (kind_ != ScheduleKind::VP) throw precondition_error("beta: VP schedules only");
    check_time(t);
    return affine_a_ + affine_b_ * shape(t);
}

double NoiseSchedule::integral_beta(double t0, double t1) const {
    if (kind_ != ScheduleKind::VP) throw precondition_error("integral_beta: VP schedules only");
    if (t0 > t1) throw precondition_error("integral_beta: t0 > t1");
    check_time(t0);
    check_time(t1);
    return affine_a_ * (t1 - t0) + affine_b_ * (shape_integral(t1) - shape_integral(t0));
}

double NoiseSchedule::sigma(double t) const {
    if (kind_ != ScheduleKind::VE) throw precondition_error("sigma: VE schedules only");
    check_time(t);
    const double u0 = shape(0.0);
    const double w = (shape(t) - u0) / (shape(1.0) - u0);
    return sigma_min_ * std::pow(sigma_max_ / sigma_min_, w);
}

MarginalStats NoiseSchedule::marginal(double t) const {
    check_time(t);
    MarginalStats m;
    if (kind_ == ScheduleKind::VP) {
        const double ib = integral_beta(0.0, t);
        m.mean_coef = std::exp(-0.5 * ib);
        m.std = std::sqrt(std::max(0.0, 1.0 - std::exp(-ib)));
    } else {
        m.mean_coef = 1.0;
        m.std = t == 0.0 ? 0.0 : sigma(t);
    }
    return m;
}

double NoiseSchedule::snr(double t) const {
    check_time(t);
    const MarginalStats m = marginal(t);
    if (m.std == 0.0) return std::numeric_limits<double>::infinity();
    return m.mean_coef * m.mean_coef / (m.std * m.std);
}

double NoiseSchedule::diffusion_coef_sq(double t) const {
    if (kind_ == ScheduleKind::VP) return beta(t);
    check_time(t);
    const double u0 = shape(0.0);
    const double wprime = shape_derivative(t) / (shape(1.0) - u0);
    const double s = sigma(t);
    return s * s * 2.0 * std::log(sigma_max_ / sigma_min_) * wprime;
}

MarginalStats NoiseSchedule::transition(double t0, double t1) const {
    if (t0 > t1) throw precondition_error("transition: t0 > t1");
    check_time(t0);
    check_time(t1);
    MarginalStats m;
    if (kind_ == ScheduleKind::VP) {
        const double ib = integral_beta(t0, t1);
        m.mean_coef = std::exp(-0.5 * ib);
        m.std = std::sqrt(std::max(0.0, 1.0 - std::exp(-ib)));
    } else {
        // the variance ramp starts at sigma_min as t leaves 0
        const double v0 = t0 == 0.0 ? 0.0 : sigma(t0) * sigma(t0);
        const double v1 = t1 == 0.0 ? 0.0 : sigma(t1) * sigma(t1);
        m.mean_coef = 1.0;
        m.std = std::sqrt(std::max(0.0, v1 - v0));
    }
    return m;
}

}  // namespace gsdm
