#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mcmplan/angles.hpp"
#include "mcmplan/risk_integrator.hpp"
#include "mcmplan/seabed_domain.hpp"
#include "mcmplan/sensor_model.hpp"
#include "mcmplan/vehicle_dynamics.hpp"

namespace mcmplan {

/// Settings for the bilevel search: an inner fixed-time risk minimizer
/// under an outer bisection on mission time.
struct OptimizationConfig {
  double risk_threshold_rho = 0.1;
  int knots_n = 48;          // rudder knots per vehicle
  int max_inner_iters = 200;
  double gradient_step = 1e-3;  // finite-difference step, rad
  double time_bracket_lo = 100.0;  // s
  double time_bracket_hi = 4000.0;  // s
  double time_tolerance = 5.0;  // s
  int restarts = 2;          // random perturbations of the seed schedule
  std::uint64_t seed = 1;
  // Inner stop: projected-gradient norm below this factor times the
  // largest scan rate times the mission time.
  double grad_tol_factor = 1e-4;

  void validate() const {
    if (!(risk_threshold_rho > 0.0) || !(risk_threshold_rho < 1.0))
      throw std::invalid_argument("opt: risk_threshold out of range (0, 1)");
    if (!(time_bracket_lo > 0.0) || !(time_bracket_lo < time_bracket_hi))
      throw std::invalid_argument("opt: need 0 < time_bracket_lo < time_bracket_hi");
    if (knots_n < 2) throw std::invalid_argument("opt: knots must be >= 2");
    if (max_inner_iters < 1)
      throw std::invalid_argument("opt: max_inner_iters must be >= 1");
    if (!(gradient_step > 0.0))
      throw std::invalid_argument("opt: gradient_step must be > 0");
    if (!(time_tolerance > 0.0))
      throw std::invalid_argument("opt: time_tolerance must be > 0");
    if (restarts < 0) throw std::invalid_argument("opt: restarts must be >= 0");
    if (!(grad_tol_factor >= 0.0))
      throw std::invalid_argument("opt: grad_tol_factor must be >= 0");
  }
};

/// One vehicle block, stored exactly as the scenario file gives it:
/// angles in degrees, positions in file units. Converting only inside
/// the accessors keeps a parse/serialize round trip bit-lossless.
struct ScenarioVehicle {
  double start_x = 14.5;  // file units (scaled by length_scale)
  double start_y = 15.0;
  double heading_deg = 0.0;
  double speed = 2.5;      // m/s
  double nomoto_t = 0.5;   // s
  double nomoto_k = 5.0;   // 1/s
  double rudder_limit_deg = 30.0;
  double sensor_lambda = 20.0;  // scans per second
  double sensor_fom = 72.0;     // dB
  double sensor_sigma = 9.0;    // dB
  double sensor_atten = 5.2;    // dB/km
  double sensor_alpha_fov_deg = 120.0;
  double sensor_p_alpha = 25.0;  // 1/rad
  double sensor_eps_fov_deg = 5.0;
  double sensor_eps_de_deg = -6.0;
  double sensor_p_eps = 400.0;   // 1/rad
  double sensor_height = 20.0;   // m above seabed
  TlForm sensor_tl_form = TlForm::standard;
  RangeMetric sensor_range_metric = RangeMetric::euclidean;

  VehicleParams vehicle_params() const {
    VehicleParams p;
    p.speed_v = speed;
    p.nomoto_k = nomoto_k;
    p.nomoto_t = nomoto_t;
    p.rudder_limit = deg_to_rad(rudder_limit_deg);
    return p;
  }

  SensorParams sensor_params() const {
    SensorParams s;
    s.scan_rate_lambda = sensor_lambda;
    s.fom = sensor_fom;
    s.sigma = sensor_sigma;
    s.atten_a = sensor_atten;
    s.alpha_fov = deg_to_rad(sensor_alpha_fov_deg);
    s.p_alpha = sensor_p_alpha;
    s.eps_fov = deg_to_rad(sensor_eps_fov_deg);
    s.eps_de = deg_to_rad(sensor_eps_de_deg);
    s.p_eps = sensor_p_eps;
    s.height_h = sensor_height;
    s.tl_form = sensor_tl_form;
    s.range_metric = sensor_range_metric;
    return s;
  }
};

/// A full planning problem as read from a scenario file. Domain bounds
/// and start positions are stored in file units; the world-frame
/// accessors apply length_scale. Sensor constants are always meters and
/// are never scaled, which lets scenarios blow up the search rectangle
/// until it matches the sensor's detection band.
struct Scenario {
  double domain_lo_x = 5.0;  // file units
  double domain_lo_y = 5.0;
  double domain_hi_x = 25.0;
  double domain_hi_y = 25.0;
  double length_scale = 1.0;
  double dt = 0.5;  // s
  int mc_samples_opt = 4096;
  int mc_samples_report = 65536;
  std::uint64_t seed = 1;

  bool ripples_enabled = false;
  double ripple_lo_x = 5.0;  // file units
  double ripple_lo_y = 5.0;
  double ripple_hi_x = 25.0;
  double ripple_hi_y = 25.0;
  double ripple_angle_deg = 135.0;
  double ripple_edge_sharpness = 30.0;  // per meter, already world units
  double ripple_width_sigma = 0.1;      // rad of heading
  RippleSplit ripple_split = RippleSplit::upper_left;
  DomForm ripple_form = DomForm::blend;

  std::vector<ScenarioVehicle> vehicles;
  OptimizationConfig opt;

  DomainRect domain() const {
    return DomainRect{domain_lo_x * length_scale, domain_lo_y * length_scale,
                      domain_hi_x * length_scale, domain_hi_y * length_scale};
  }

  RippleField ripple_field() const {
    RippleField f;
    f.domain_lo_x = ripple_lo_x * length_scale;
    f.domain_lo_y = ripple_lo_y * length_scale;
    f.domain_hi_x = ripple_hi_x * length_scale;
    f.domain_hi_y = ripple_hi_y * length_scale;
    f.ripple_angle = deg_to_rad(ripple_angle_deg);
    f.edge_sharpness = ripple_edge_sharpness;
    f.ripple_width_sigma = ripple_width_sigma;
    f.split = ripple_split;
    f.dom_form = ripple_form;
    return f;
  }

  /// The ripple field if enabled, otherwise empty.
  std::optional<RippleField> field_if_enabled() const {
    if (!ripples_enabled) return std::nullopt;
    return ripple_field();
  }

  std::vector<VehicleState> start_states() const {
    std::vector<VehicleState> out;
    out.reserve(vehicles.size());
    for (const ScenarioVehicle& v : vehicles)
      out.push_back(VehicleState{v.start_x * length_scale,
                                 v.start_y * length_scale,
                                 deg_to_rad(v.heading_deg), 0.0});
    return out;
  }

  std::vector<VehicleParams> vehicle_params() const {
    std::vector<VehicleParams> out;
    out.reserve(vehicles.size());
    for (const ScenarioVehicle& v : vehicles) out.push_back(v.vehicle_params());
    return out;
  }

  std::vector<SensorParams> sensor_params() const {
    std::vector<SensorParams> out;
    out.reserve(vehicles.size());
    for (const ScenarioVehicle& v : vehicles) out.push_back(v.sensor_params());
    return out;
  }

  double max_lambda() const {
    double m = 0.0;
    for (const ScenarioVehicle& v : vehicles)
      m = std::max(m, v.sensor_lambda);
    return m;
  }

  void validate() const {
    if (!(length_scale > 0.0))
      throw std::invalid_argument("scenario: length_scale must be > 0");
    domain().validate();
    if (vehicles.empty())
      throw std::invalid_argument("scenario: need at least one vehicle");
    if (!(dt > 0.0)) throw std::invalid_argument("scenario: dt must be > 0");
    if (mc_samples_opt < 1 || mc_samples_report < 1)
      throw std::invalid_argument("scenario: sample counts must be >= 1");
    const DomainRect box = domain();
    for (const ScenarioVehicle& v : vehicles) {
      v.vehicle_params().validate();
      v.sensor_params().validate();
      const double x = v.start_x * length_scale;
      const double y = v.start_y * length_scale;
      if (x < box.lo_x || x > box.hi_x || y < box.lo_y || y > box.hi_y)
        throw std::invalid_argument("scenario: vehicle start outside domain");
    }
    ripple_field().validate();
    opt.validate();
  }
};

}  // namespace mcmplan
