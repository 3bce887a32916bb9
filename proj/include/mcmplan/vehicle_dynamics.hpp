#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mcmplan/angles.hpp"

namespace mcmplan {

/// Planar pose plus turn rate. psi is measured from the +x axis, radians.
struct VehicleState {
  double x = 0.0;    // m
  double y = 0.0;    // m
  double psi = 0.0;  // rad
  double r = 0.0;    // rad/s
};

/// Constant-speed first-order (Nomoto) steering parameters.
struct VehicleParams {
  double speed_v = 2.5;        // m/s
  double nomoto_k = 5.0;       // 1/s
  double nomoto_t = 0.5;       // s
  double rudder_limit = 0.5235987755982988;  // rad (30 deg)

  void validate() const {
    if (!(speed_v > 0.0))
      throw std::invalid_argument("vehicle: speed must be > 0");
    if (!(nomoto_k > 0.0))
      throw std::invalid_argument("vehicle: nomoto_k must be > 0");
    if (!(nomoto_t > 0.0))
      throw std::invalid_argument("vehicle: nomoto_t must be > 0");
    if (!(rudder_limit > 0.0))
      throw std::invalid_argument("vehicle: rudder_limit must be > 0");
  }
};

struct StateDerivative {
  double dx = 0.0;
  double dy = 0.0;
  double dpsi = 0.0;
  double dr = 0.0;
};

/// Rudder deflection command as a piecewise-linear function of time.
/// Knot times are strictly increasing and span [0, T_f].
struct ControlSchedule {
  std::vector<double> knot_times;    // s
  std::vector<double> rudder_values; // rad

  double duration() const { return knot_times.empty() ? 0.0 : knot_times.back(); }

  bool empty() const { return knot_times.empty(); }

  /// Linear interpolation; t is clamped to [0, T_f].
  double rudder_at(double t) const {
    if (knot_times.empty()) return 0.0;
    if (t <= knot_times.front()) return rudder_values.front();
    if (t >= knot_times.back()) return rudder_values.back();
    auto it = std::upper_bound(knot_times.begin(), knot_times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - knot_times.begin());
    const std::size_t lo = hi - 1;
    const double span = knot_times[hi] - knot_times[lo];
    const double w = (t - knot_times[lo]) / span;
    return rudder_values[lo] + w * (rudder_values[hi] - rudder_values[lo]);
  }

  void validate(double rudder_limit) const {
    if (knot_times.size() != rudder_values.size())
      throw std::invalid_argument("schedule: knot/value length mismatch");
    if (knot_times.empty()) throw std::invalid_argument("schedule: empty");
    if (knot_times.front() != 0.0) throw std::invalid_argument("schedule: first knot must be t=0");
    for (std::size_t i = 1; i < knot_times.size(); ++i)
      if (!(knot_times[i] > knot_times[i - 1]))
        throw std::invalid_argument("schedule: knot times not strictly increasing");
    for (double v : rudder_values)
      if (std::abs(v) > rudder_limit + 1e-12)
        throw std::invalid_argument("schedule: rudder value exceeds limit");
  }
};

/// Uniform knot grid over [0, t_final] with n >= 2 knots (n == 1 only for t_final == 0).
inline std::vector<double> uniform_knots(double t_final, int n) {
  if (t_final <= 0.0) return {0.0};
  if (n < 2) throw std::invalid_argument("uniform_knots: need n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = t_final * i / (n - 1);
  t.back() = t_final;
  return t;
}

/// Time-sampled realization of the steering ODE under a rudder schedule.
struct Trajectory {
  double dt = 0.0;                  // nominal step, s (last step may be shorter)
  std::vector<double> times;        // s, times.front()==0, times.back()==T_f
  std::vector<VehicleState> states; // one per time
  std::vector<double> controls;     // rudder at each time, rad

  double final_time() const { return times.empty() ? 0.0 : times.back(); }
  std::size_t size() const { return states.size(); }
};

inline StateDerivative state_derivative(const VehicleState& s, double rudder,
                                        const VehicleParams& p) {
  return StateDerivative{
      p.speed_v * std::cos(s.psi),
      p.speed_v * std::sin(s.psi),
      s.r,
      (p.nomoto_k * rudder - s.r) / p.nomoto_t,
  };
}

/// Classical RK4 step of length dt from time t, sampling the rudder
/// schedule at t, t+dt/2 and t+dt.
inline VehicleState rk4_step(const VehicleState& s, const ControlSchedule& schedule,
                             double t, double dt, const VehicleParams& p) {
  const double p0 = schedule.rudder_at(t);
  const double pm = schedule.rudder_at(t + 0.5 * dt);
  const double p1 = schedule.rudder_at(t + dt);

  const StateDerivative k1 = state_derivative(s, p0, p);
  const VehicleState s2{s.x + 0.5 * dt * k1.dx, s.y + 0.5 * dt * k1.dy,
                        s.psi + 0.5 * dt * k1.dpsi, s.r + 0.5 * dt * k1.dr};
  const StateDerivative k2 = state_derivative(s2, pm, p);
  const VehicleState s3{s.x + 0.5 * dt * k2.dx, s.y + 0.5 * dt * k2.dy,
                        s.psi + 0.5 * dt * k2.dpsi, s.r + 0.5 * dt * k2.dr};
  const StateDerivative k3 = state_derivative(s3, pm, p);
  const VehicleState s4{s.x + dt * k3.dx, s.y + dt * k3.dy,
                        s.psi + dt * k3.dpsi, s.r + dt * k3.dr};
  const StateDerivative k4 = state_derivative(s4, p1, p);

  const double c = dt / 6.0;
  return VehicleState{
      s.x + c * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
      s.y + c * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
      s.psi + c * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi),
      s.r + c * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr),
  };
}

/// Integrates the schedule from t=0 to t=T_f on a fixed grid. The final
/// partial step is shortened so the last sample lands exactly on T_f.
/// Deterministic: identical inputs give bit-identical trajectories.
inline Trajectory rollout(const VehicleState& initial, const ControlSchedule& schedule,
                          double dt, const VehicleParams& params) {
  if (schedule.empty()) throw std::invalid_argument("rollout: empty schedule");
  if (!(dt > 0.0)) throw std::invalid_argument("rollout: dt must be positive");
  const double t_final = schedule.duration();

  Trajectory traj;
  traj.dt = dt;
  VehicleState s = initial;
  s.psi = wrap_pi(s.psi);
  traj.times.push_back(0.0);
  traj.states.push_back(s);
  traj.controls.push_back(schedule.rudder_at(0.0));
  if (t_final <= 0.0) return traj;  // zero-length mission: single sample

  const std::size_t n_steps =
      static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t0 = static_cast<double>(i) * dt;
    const double t1 = std::min(static_cast<double>(i + 1) * dt, t_final);
    s = rk4_step(s, schedule, t0, t1 - t0, params);
    s.psi = wrap_pi(s.psi);
    traj.times.push_back(t1);
    traj.states.push_back(s);
    traj.controls.push_back(schedule.rudder_at(t1));
  }
  return traj;
}

}  // namespace mcmplan
