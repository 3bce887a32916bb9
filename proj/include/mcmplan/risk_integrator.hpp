#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mcmplan/seabed_domain.hpp"
#include "mcmplan/vehicle_dynamics.hpp"

namespace mcmplan {

/// Axis-aligned search rectangle holding the uniform target prior.
struct DomainRect {
  double lo_x = 5.0;
  double lo_y = 5.0;
  double hi_x = 25.0;
  double hi_y = 25.0;

  double width() const { return hi_x - lo_x; }
  double height() const { return hi_y - lo_y; }

  void validate() const {
    if (!(lo_x < hi_x) || !(lo_y < hi_y))
      throw std::invalid_argument("domain: lo must be < hi componentwise");
  }
};

/// Fixed draw of target positions. Regeneration with the same seed is
/// bit-identical, which the optimizer relies on for a deterministic
/// objective (common random numbers).
struct TargetSample {
  std::vector<Target> targets;
  std::uint64_t seed = 0;
  int count_m = 0;
};

namespace detail {

// 53-bit uniform in [0, 1); the shift keeps the mapping exact and
// identical on every platform.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Uniform i.i.d. targets on the rectangle.
inline TargetSample sample_targets(const DomainRect& bounds, int count_m,
                                   std::uint64_t seed) {
  bounds.validate();
  if (count_m < 1)
    throw std::invalid_argument("sample_targets: count_m must be >= 1");
  TargetSample out;
  out.seed = seed;
  out.count_m = count_m;
  out.targets.reserve(static_cast<std::size_t>(count_m));
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count_m; ++i) {
    const double ux = detail::unit_uniform(rng);
    const double uy = detail::unit_uniform(rng);
    out.targets.push_back(Target{bounds.lo_x + ux * bounds.width(),
                                 bounds.lo_y + uy * bounds.height()});
  }
  return out;
}

/// Runs fn(i) for i in [0, n), split into contiguous index chunks over
/// at most `threads` workers. Results must be written to distinct slots
/// keyed by i; any reduction happens after the join, so the outcome is
/// bit-stable regardless of the worker count.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi, w] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Detection-rate callback: rate(vehicle_index, state, target) in 1/s.
template <typename F>
concept VehicleRateFn =
    requires(F f, std::size_t v, const VehicleState& s, const Target& w) {
      { f(v, s, w) } -> std::convertible_to<double>;
    };

namespace detail {

inline void require_shared_grid(const std::vector<Trajectory>& trajs) {
  if (trajs.empty())
    throw std::invalid_argument("exposure: need at least one trajectory");
  for (const Trajectory& t : trajs) {
    if (t.size() == 0)
      throw std::invalid_argument("exposure: empty trajectory");
    if (t.size() != trajs[0].size() || t.dt != trajs[0].dt ||
        t.final_time() != trajs[0].final_time())
      throw std::invalid_argument(
          "exposure: trajectories must share the time grid");
  }
}

}  // namespace detail

/// Integrated detection exposure of one target: the trapezoid rule over
/// the shared time grid applied to the sum of the per-vehicle rates.
/// Rates of independent scanning sensors add.
template <VehicleRateFn RateFn>
double exposure(const std::vector<Trajectory>& trajs, const Target& w,
                RateFn&& rate) {
  detail::require_shared_grid(trajs);
  const std::size_t n = trajs[0].size();
  auto total_rate = [&](std::size_t i) {
    double g = 0.0;
    for (std::size_t v = 0; v < trajs.size(); ++v)
      g += rate(v, trajs[v].states[i], w);
    return g;
  };
  double acc = 0.0;
  double prev = total_rate(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = total_rate(i);
    acc += 0.5 * (prev + cur) * (trajs[0].times[i] - trajs[0].times[i - 1]);
    prev = cur;
  }
  return acc;
}

/// Monte Carlo estimate of the residual risk and its companions.
struct RiskReport {
  double residual_risk = 1.0;  // mean probability of non-detection
  double std_error = 0.0;      // standard error of that mean
  double mission_time = 0.0;   // s
  std::vector<double> per_target_detection;
};

/// Mean non-detection probability over the target sample. Per-target
/// exposures evaluate in parallel; the reduction runs sequentially in
/// index order so the estimate does not depend on the thread count.
template <VehicleRateFn RateFn>
RiskReport residual_risk(const std::vector<Trajectory>& trajs,
                         const TargetSample& sample, RateFn&& rate,
                         int threads = 1) {
  detail::require_shared_grid(trajs);
  if (sample.targets.empty())
    throw std::invalid_argument("residual_risk: empty target sample");
  const std::size_t m = sample.targets.size();
  std::vector<double> q(m);
  parallel_for(m, threads, [&](std::size_t j) {
    q[j] = std::exp(-exposure(trajs, sample.targets[j], rate));
  });

  RiskReport report;
  report.mission_time = trajs[0].final_time();
  double sum = 0.0;
  for (std::size_t j = 0; j < m; ++j) sum += q[j];
  report.residual_risk = sum / static_cast<double>(m);
  if (m >= 2) {
    double ss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = q[j] - report.residual_risk;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(m - 1);
    report.std_error = std::sqrt(var / static_cast<double>(m));
  }
  report.per_target_detection.resize(m);
  for (std::size_t j = 0; j < m; ++j)
    report.per_target_detection[j] = 1.0 - q[j];
  return report;
}

/// Detection probability sampled on cell centers of the rectangle,
/// values[iy * nx + ix] with x varying fastest.
struct CoverageGrid {
  int nx = 0;
  int ny = 0;
  DomainRect bounds;
  std::vector<double> values;

  double value_at(int ix, int iy) const {
    return values[static_cast<std::size_t>(iy) * nx + ix];
  }
  double cell_x(int ix) const {
    return bounds.lo_x + (ix + 0.5) * bounds.width() / nx;
  }
  double cell_y(int iy) const {
    return bounds.lo_y + (iy + 0.5) * bounds.height() / ny;
  }
};

/// Deterministic coverage field 1 - exp(-exposure) on an nx-by-ny grid.
template <VehicleRateFn RateFn>
CoverageGrid coverage_grid(const std::vector<Trajectory>& trajs,
                           const DomainRect& bounds, int nx, int ny,
                           RateFn&& rate, int threads = 1) {
  detail::require_shared_grid(trajs);
  bounds.validate();
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("coverage_grid: resolution must be >= 2x2");
  CoverageGrid grid;
  grid.nx = nx;
  grid.ny = ny;
  grid.bounds = bounds;
  grid.values.resize(static_cast<std::size_t>(nx) * ny);
  parallel_for(grid.values.size(), threads, [&](std::size_t c) {
    const int ix = static_cast<int>(c % static_cast<std::size_t>(nx));
    const int iy = static_cast<int>(c / static_cast<std::size_t>(nx));
    const Target w{grid.cell_x(ix), grid.cell_y(iy)};
    grid.values[c] = 1.0 - std::exp(-exposure(trajs, w, rate));
  });
  return grid;
}

/// Sonar-rate callback with conservative culling. Targets are skipped
/// only where a gate or the detection probability is provably below the
/// e^-35 tail, so the result differs from the exact rate by at most
/// ~1e-14 * lambda while most far-field evaluations cost one distance
/// check.
class SensorRate {
 public:
  explicit SensorRate(std::vector<SensorParams> sensors,
                      const RippleField* field = nullptr)
      : sensors_(std::move(sensors)), field_(field) {
    if (sensors_.empty())
      throw std::invalid_argument("SensorRate: need at least one sensor");
    if (field_ != nullptr) field_->validate();
    culls_.reserve(sensors_.size());
    for (const SensorParams& p : sensors_) {
      p.validate();
      culls_.push_back(make_cull(p));
    }
  }

  double operator()(std::size_t vehicle, const VehicleState& s,
                    const Target& w) const {
    const SensorParams& p = sensors_[vehicle];
    const Cull& c = culls_[vehicle];
    const double dx = w.omega_x - s.x;
    const double dy = w.omega_y - s.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 > c.r2_max) return 0.0;
    if (d2 < c.r2_min) return 0.0;
    if (c.has_bearing_cull && d2 > 0.0) {
      const double forward = dx * std::cos(s.psi) + dy * std::sin(s.psi);
      if (forward < std::sqrt(d2) * c.cos_cull) return 0.0;
    }
    return effective_gamma(s, w, p, field_);
  }

  std::size_t vehicle_count() const { return sensors_.size(); }
  const std::vector<SensorParams>& sensors() const { return sensors_; }
  const RippleField* field() const { return field_; }

 private:
  struct Cull {
    double r2_min = 0.0;
    double r2_max = std::numeric_limits<double>::infinity();
    double cos_cull = -1.0;
    bool has_bearing_cull = false;
  };

  static Cull make_cull(const SensorParams& p) {
    Cull c;
    const double tail = 35.0;  // logistic(-35) and the Phi(-8) region

    // Elevation band: eps_b = arctan(-h/r) rises toward zero with
    // range, so each band edge maps to one radius.
    const double hi_angle = p.eps_de + 0.5 * p.eps_fov + tail / p.p_eps;
    const double lo_angle = p.eps_de - 0.5 * p.eps_fov - tail / p.p_eps;
    if (lo_angle >= 0.0) {
      // Band floor at or above horizontal: eps_b never reaches it.
      c.r2_max = 0.0;
      return c;
    }
    double r_max = std::numeric_limits<double>::infinity();
    if (hi_angle < 0.0) r_max = p.height_h / -std::tan(hi_angle);
    if (lo_angle > -0.5 * kPi && p.range_metric == RangeMetric::euclidean) {
      // Valid only above the range floor: a floored range can sit back
      // inside the band even when the true distance is tiny.
      const double r_min = p.height_h / -std::tan(lo_angle);
      if (r_min > kRangeFloor) c.r2_min = r_min * r_min;
    }

    // Transmission loss is monotone in range in both forms, so beyond
    // the radius where FOM - TL = -8 sigma the detection probability is
    // below Phi(-8).
    const double tl_cut = p.fom + 8.0 * p.sigma;
    const double r_hi = 1e7;
    if (transmission_loss(r_hi, p) >= tl_cut) {
      double lo = kRangeFloor, hi = r_hi;
      for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (transmission_loss(mid, p) < tl_cut ? lo : hi) = mid;
      }
      r_max = std::min(r_max, lo);
    }
    if (std::isfinite(r_max)) c.r2_max = r_max * r_max;

    // Outside alpha_fov/2 + 35/p_alpha the horizontal gate is in its
    // e^-35 tail.
    const double a_cull = 0.5 * p.alpha_fov + tail / p.p_alpha;
    if (a_cull < kPi) {
      c.cos_cull = std::cos(a_cull);
      c.has_bearing_cull = true;
    }
    return c;
  }

  std::vector<SensorParams> sensors_;
  const RippleField* field_;
  std::vector<Cull> culls_;
};

namespace detail {

inline void require_one_sensor_per_vehicle(
    const std::vector<Trajectory>& trajs,
    const std::vector<SensorParams>& sensors) {
  if (sensors.size() != trajs.size())
    throw std::invalid_argument("need exactly one sensor per trajectory");
}

}  // namespace detail

inline double exposure(const std::vector<Trajectory>& trajs, const Target& w,
                       const std::vector<SensorParams>& sensors,
                       const RippleField* field = nullptr) {
  detail::require_one_sensor_per_vehicle(trajs, sensors);
  return exposure(trajs, w, SensorRate(sensors, field));
}

inline RiskReport residual_risk(const std::vector<Trajectory>& trajs,
                                const TargetSample& sample,
                                const std::vector<SensorParams>& sensors,
                                const RippleField* field = nullptr,
                                int threads = 1) {
  detail::require_one_sensor_per_vehicle(trajs, sensors);
  return residual_risk(trajs, sample, SensorRate(sensors, field), threads);
}

inline CoverageGrid coverage_grid(const std::vector<Trajectory>& trajs,
                                  const DomainRect& bounds, int nx, int ny,
                                  const std::vector<SensorParams>& sensors,
                                  const RippleField* field = nullptr,
                                  int threads = 1) {
  detail::require_one_sensor_per_vehicle(trajs, sensors);
  return coverage_grid(trajs, bounds, nx, ny, SensorRate(sensors, field),
                       threads);
}

}  // namespace mcmplan
