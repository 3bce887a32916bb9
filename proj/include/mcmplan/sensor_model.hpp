#pragma once

#include <cmath>
#include <stdexcept>

#include "mcmplan/angles.hpp"
#include "mcmplan/vehicle_dynamics.hpp"

namespace mcmplan {

/// Floor applied to target range before log/arctan evaluation, m.
inline constexpr double kRangeFloor = 0.1;

/// Transmission-loss form. `standard` is spherical spreading plus
/// absorption, 20*log10(r) + a*r/1000 with a in dB/km. `paper_literal`
/// folds the attenuation into the log argument, 20*log10(r*(1+a)).
enum class TlForm { standard, paper_literal };

/// Vehicle-to-target range metric. `l1` sums the absolute coordinate
/// differences instead of the Euclidean norm.
enum class RangeMetric { euclidean, l1 };

struct Target {
  double omega_x = 0.0;  // m
  double omega_y = 0.0;  // m
};

/// Forward-looking sensor constants.
struct SensorParams {
  double scan_rate_lambda = 20.0;  // Poisson scan rate, 1/s
  double fom = 72.0;               // figure of merit, dB
  double sigma = 9.0;              // spread, dB
  double atten_a = 5.2;            // attenuation, dB/km
  double alpha_fov = deg_to_rad(120.0);  // horizontal FOV, rad
  double p_alpha = 25.0;           // horizontal gate slope, 1/rad
  double eps_fov = deg_to_rad(5.0);      // vertical FOV, rad
  double eps_de = deg_to_rad(-6.0);      // downward elevation angle, rad
  double p_eps = 400.0;            // vertical gate slope, 1/rad
  double height_h = 20.0;          // sensor altitude above seabed, m

  TlForm tl_form = TlForm::standard;
  RangeMetric range_metric = RangeMetric::euclidean;

  void validate() const {
    if (!(scan_rate_lambda > 0.0)) throw std::invalid_argument("sensor: scan_rate must be > 0");
    if (!(sigma > 0.0)) throw std::invalid_argument("sensor: sigma must be > 0");
    if (!(alpha_fov > 0.0)) throw std::invalid_argument("sensor: alpha_fov must be > 0");
    if (!(eps_fov > 0.0)) throw std::invalid_argument("sensor: eps_fov must be > 0");
    if (!(height_h > 0.0)) throw std::invalid_argument("sensor: height must be > 0");
    if (!(p_alpha > 0.0)) throw std::invalid_argument("sensor: p_alpha must be > 0");
    if (!(p_eps > 0.0)) throw std::invalid_argument("sensor: p_eps must be > 0");
    if (atten_a < 0.0) throw std::invalid_argument("sensor: attenuation must be >= 0");
  }
};

/// One-way transmission loss in dB at the given range.
inline double transmission_loss(double range_m, const SensorParams& p) {
  if (!(range_m > 0.0)) throw std::domain_error("transmission_loss: range must be > 0");
  if (p.tl_form == TlForm::paper_literal)
    return 20.0 * std::log10(range_m * (1.0 + p.atten_a));
  return 20.0 * std::log10(range_m) + p.atten_a * range_m / 1000.0;
}

/// Vehicle-to-target range under the configured metric, floored at kRangeFloor.
inline double target_range(const VehicleState& s, const Target& w, const SensorParams& p) {
  const double dx = w.omega_x - s.x;
  const double dy = w.omega_y - s.y;
  const double r = p.range_metric == RangeMetric::l1
                       ? std::abs(dx) + std::abs(dy)
                       : std::hypot(dx, dy);
  return std::max(r, kRangeFloor);
}

/// Single-scan detection probability Phi((FOM - TL)/sigma).
inline double detect_prob_p(const VehicleState& s, const Target& w, const SensorParams& p) {
  const double tl = transmission_loss(target_range(s, w, p), p);
  return normal_cdf((p.fom - tl) / p.sigma);
}

/// Target bearing in the body frame, rad in (-pi, pi]. Zero dead ahead,
/// positive to port. A coincident target returns 0.
inline double bearing_alpha_b(const VehicleState& s, const Target& w) {
  const double ex = w.omega_x - s.x;
  const double ey = w.omega_y - s.y;
  const double c = std::cos(s.psi);
  const double sn = std::sin(s.psi);
  const double forward = ex * c + ey * sn;
  const double port = -ex * sn + ey * c;
  if (forward == 0.0 && port == 0.0) return 0.0;
  return std::atan2(port, forward);
}

/// Two-sided logistic gate: ~1 for |u - center| << half_width, ~0 outside.
inline double sigmoid_gate(double u, double center, double half_width, double slope) {
  return logistic(slope * (u - (center - half_width))) +
         logistic(slope * ((center + half_width) - u)) - 1.0;
}

/// Horizontal field-of-view gate on the body bearing.
inline double f_alpha(const VehicleState& s, const Target& w, const SensorParams& p) {
  return sigmoid_gate(bearing_alpha_b(s, w), 0.0, 0.5 * p.alpha_fov, p.p_alpha);
}

/// Depression angle to the target, rad in (-pi/2, 0).
inline double elevation_eps_b(const VehicleState& s, const Target& w, const SensorParams& p) {
  return std::atan(-p.height_h / target_range(s, w, p));
}

/// Vertical gate centered on eps_de with half-width eps_fov/2.
inline double f_eps(const VehicleState& s, const Target& w, const SensorParams& p) {
  return sigmoid_gate(elevation_eps_b(s, w, p), p.eps_de, 0.5 * p.eps_fov, p.p_eps);
}

/// Instantaneous detection rate, 1/s. Clamped to [0, lambda].
inline double gamma_rate(const VehicleState& s, const Target& w, const SensorParams& p) {
  const double g = p.scan_rate_lambda * detect_prob_p(s, w, p) * f_alpha(s, w, p) *
                   f_eps(s, w, p);
  return std::max(0.0, g);
}

}  // namespace mcmplan
