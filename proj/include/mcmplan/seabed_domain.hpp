#pragma once

#include <cmath>
#include <stdexcept>

#include "mcmplan/angles.hpp"
#include "mcmplan/sensor_model.hpp"

namespace mcmplan {

/// Which triangle of the rectangle carries the ripples. The split runs
/// along the line y = x, which is the main diagonal for the square
/// domains used here.
enum class RippleSplit { upper_left, lower_right };

/// Dom(x, y, theta) construction. `blend` combines the ripple gain and
/// the clean-triangle weight as a partition of unity, which keeps the
/// weight at 1 in the ripple-free triangle. `paper_literal` is the raw
/// two-bracket sum whose second bracket comes out negative in the
/// rippled triangle; it is kept only for side-by-side comparison.
enum class DomForm { blend, paper_literal };

/// Rippled-seabed region: a soft rectangle split along its diagonal,
/// with detection inside the rippled half gated on heading.
struct RippleField {
  double domain_lo_x = 5.0;   // m
  double domain_lo_y = 5.0;   // m
  double domain_hi_x = 25.0;  // m
  double domain_hi_y = 25.0;  // m
  double ripple_angle = 3.0 * kPi / 4.0;  // crest orientation, rad
  double edge_sharpness = 30.0;           // rectangle falloff, 1/m
  double ripple_width_sigma = 0.1;        // heading lobe width, rad
  RippleSplit split = RippleSplit::upper_left;
  DomForm dom_form = DomForm::blend;

  void validate() const {
    if (!(domain_lo_x < domain_hi_x) || !(domain_lo_y < domain_hi_y))
      throw std::invalid_argument("ripples: domain_lo must be < domain_hi");
    if (!(edge_sharpness > 0.0))
      throw std::invalid_argument("ripples: edge_sharpness must be > 0");
    if (!(ripple_width_sigma > 0.0))
      throw std::invalid_argument("ripples: ripple_width_sigma must be > 0");
  }
};

/// Smooth indicator of the rectangle: ~1 inside, ~0 outside, 0.5 on an
/// edge, transition width ~1/edge_sharpness.
inline double soft_rect(double x, double y, const RippleField& f) {
  const double s = f.edge_sharpness;
  const double gx = 0.5 * (std::tanh(s * (x - f.domain_lo_x)) -
                           std::tanh(s * (x - f.domain_hi_x)));
  const double gy = 0.5 * (std::tanh(s * (y - f.domain_lo_y)) -
                           std::tanh(s * (y - f.domain_hi_y)));
  return gx * gy;
}

/// The original printed form: two brackets that are exact negatives of
/// each other, so the sum cancels to zero everywhere.
inline double soft_rect_paper_literal(double x, double y, const RippleField& f) {
  const double s = f.edge_sharpness;
  const double gx = 0.5 * (std::tanh(s * (x - f.domain_lo_x)) -
                           std::tanh(s * (x - f.domain_hi_x)));
  const double split = 0.5 * (std::tanh(s * (y - x)) -
                              std::tanh(s * (y - f.domain_hi_y)));
  const double anti = 0.5 * (std::tanh(s * (y - f.domain_hi_y)) -
                             std::tanh(s * (y - x)));
  return gx * split + gx * anti;
}

/// Soft membership of the rippled triangle: 1 deep inside it, 0 in the
/// clean one, exactly 0.5 on the diagonal.
inline double triangle_blend(double x, double y, const RippleField& f) {
  const double d = (f.split == RippleSplit::upper_left) ? (y - x) : (x - y);
  return 0.5 * (std::tanh(f.edge_sharpness * d) + 1.0);
}

/// Heading selectivity of the ripples: four Gaussian lobes centered
/// where the heading crosses the crests at a right angle, so both
/// traversal directions count and any heading in (-pi, pi] is covered.
/// Crest angles other than 135 degrees rotate the lobe centers.
inline double ripple_gain(double heading, const RippleField& f) {
  const double theta = heading - (f.ripple_angle - 3.0 * kPi / 4.0);
  double sum = 0.0;
  for (int k = -1; k <= 2; ++k) {
    const double z = (theta - kPi / 4.0 + kPi * k) / f.ripple_width_sigma;
    sum += std::exp(-0.5 * z * z);
  }
  return sum;
}

/// Detection weight at target (x, y) for a vehicle heading. In the
/// blend form this is rect * [gain * S + (1 - S)] with S the triangle
/// membership: ~1 anywhere in the clean triangle, ~gain(heading) in the
/// rippled one.
inline double dom_weight(double omega_x, double omega_y, double heading,
                         const RippleField& f) {
  if (f.dom_form == DomForm::paper_literal) {
    const double s = f.edge_sharpness;
    const double gx = 0.5 * (std::tanh(s * (omega_x - f.domain_lo_x)) -
                             std::tanh(s * (omega_x - f.domain_hi_x)));
    const double split = 0.5 * (std::tanh(s * (omega_y - omega_x)) -
                                std::tanh(s * (omega_y - f.domain_hi_y)));
    const double anti = 0.5 * (std::tanh(s * (omega_y - f.domain_hi_y)) -
                               std::tanh(s * (omega_y - omega_x)));
    return ripple_gain(heading, f) * gx * split + gx * anti;
  }
  const double rect = soft_rect(omega_x, omega_y, f);
  const double blend = triangle_blend(omega_x, omega_y, f);
  return rect * (ripple_gain(heading, f) * blend + (1.0 - blend));
}

/// Detection rate with the ripple gate applied at the target position
/// and the vehicle heading. Without a field this is the plain rate.
/// Clamped below at zero so the literal Dom form cannot produce a
/// negative rate.
inline double effective_gamma(const VehicleState& s, const Target& w,
                              const SensorParams& sensor,
                              const RippleField* field) {
  const double g = gamma_rate(s, w, sensor);
  if (field == nullptr) return g;
  return std::max(0.0, g * dom_weight(w.omega_x, w.omega_y, s.psi, *field));
}

}  // namespace mcmplan
