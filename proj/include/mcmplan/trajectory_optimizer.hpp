#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmplan/risk_integrator.hpp"
#include "mcmplan/scenario.hpp"
#include "mcmplan/vehicle_dynamics.hpp"

namespace mcmplan {

/// The vehicles being planned for: start poses, dynamics, shared step.
struct FleetSetup {
  std::vector<VehicleState> starts;
  std::vector<VehicleParams> params;
  double dt = 0.5;
};

/// Thrown by the outer search when even the largest bracketed mission
/// time cannot meet the risk threshold.
class InfeasibleBracketError : public std::runtime_error {
 public:
  InfeasibleBracketError(double risk, double rho, double t_hi)
      : std::runtime_error("time bracket infeasible: min risk " +
                           std::to_string(risk) + " > threshold " +
                           std::to_string(rho) + " at T=" +
                           std::to_string(t_hi) + " s"),
        best_risk(risk),
        threshold(rho),
        bracket_hi(t_hi) {}
  double best_risk;
  double threshold;
  double bracket_hi;
};

// ---------------------------------------------------------------------
// Generic box-constrained minimizer
// ---------------------------------------------------------------------

struct InnerOptions {
  int max_iters = 200;
  double grad_step = 1e-3;
  // Stop when the projected gradient inf-norm falls strictly below
  // grad_tol_per_second times the schedule duration; zero disables.
  double grad_tol_per_second = 0.0;
  int memory = 6;  // quasi-Newton history pairs
  int ls_max_halvings = 25;
};

struct MinimizeResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  int evaluations = 0;
  bool gradient_converged = false;
};

/// Forward finite differences, falling back to a backward step on
/// coordinates pinned at their upper bound so every probe stays
/// feasible. f_x is the already-known objective value at x.
template <typename F>
std::vector<double> fd_gradient(F&& f, const std::vector<double>& x,
                                double f_x, const std::vector<double>& lo,
                                const std::vector<double>& hi, double h,
                                int* evaluations = nullptr) {
  std::vector<double> g(x.size());
  std::vector<double> probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] + h <= hi[i]) {
      probe[i] = x[i] + h;
      g[i] = (f(probe) - f_x) / h;
      if (evaluations != nullptr) ++*evaluations;
    } else {
      probe[i] = std::max(lo[i], x[i] - h);
      const double denom = x[i] - probe[i];
      if (denom > 0.0) {
        g[i] = (f_x - f(probe)) / denom;
        if (evaluations != nullptr) ++*evaluations;
      } else {
        g[i] = 0.0;  // the box is thinner than the probe step
      }
    }
    probe[i] = x[i];
  }
  return g;
}

namespace detail {

inline double projected_gradient_norm(const std::vector<double>& x,
                                      const std::vector<double>& g,
                                      const std::vector<double>& lo,
                                      const std::vector<double>& hi) {
  double norm = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double stepped = std::clamp(x[i] - g[i], lo[i], hi[i]);
    norm = std::max(norm, std::abs(x[i] - stepped));
  }
  return norm;
}

}  // namespace detail

/// Projected quasi-Newton descent with a backtracking line search that
/// accepts only strict decrease, so the returned value never exceeds
/// the starting one. Bounds are enforced exactly by clamping.
template <typename F>
MinimizeResult minimize_projected(F&& objective, std::vector<double> x,
                                  const std::vector<double>& lo,
                                  const std::vector<double>& hi,
                                  const InnerOptions& opts,
                                  double duration_for_tol = 0.0) {
  if (x.size() != lo.size() || x.size() != hi.size())
    throw std::invalid_argument("minimize: bound size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);

  MinimizeResult res;
  res.f = objective(x);
  res.evaluations = 1;
  if (!std::isfinite(res.f))
    throw std::runtime_error("minimize: objective is non-finite at the start");
  res.x = x;
  if (opts.max_iters == 0) return res;

  const double tol = opts.grad_tol_per_second * duration_for_tol;
  const std::size_t n = x.size();
  std::vector<double> g = fd_gradient(objective, x, res.f, lo, hi,
                                      opts.grad_step, &res.evaluations);
  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const double pg = detail::projected_gradient_norm(x, g, lo, hi);
    if (tol > 0.0 && pg < tol) {
      res.gradient_converged = true;
      break;
    }
    if (pg == 0.0) {  // exactly stationary, nothing to do
      res.gradient_converged = true;
      break;
    }

    // Two-loop recursion over the stored curvature pairs.
    std::vector<double> d(g.begin(), g.end());
    for (double& v : d) v = -v;
    if (!pairs.empty()) {
      std::vector<double> alpha(pairs.size());
      auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
      };
      for (std::size_t k = pairs.size(); k-- > 0;) {
        const auto& [s, y] = pairs[k];
        const double rho_k = 1.0 / dot(y, s);
        alpha[k] = rho_k * dot(s, d);
        for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
      }
      const auto& [s_last, y_last] = pairs.back();
      const double gamma = dot(s_last, y_last) / dot(y_last, y_last);
      for (double& v : d) v *= gamma;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& [s, y] = pairs[k];
        const double rho_k = 1.0 / dot(y, s);
        const double beta = rho_k * dot(y, d);
        for (std::size_t i = 0; i < n; ++i) d[i] += s[i] * (alpha[k] - beta);
      }
      double descent = 0.0;
      for (std::size_t i = 0; i < n; ++i) descent += d[i] * g[i];
      if (!(descent < 0.0))
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    }

    // Backtrack until the clamped step strictly decreases f.
    double step = 1.0;
    std::vector<double> x_new(n);
    double f_new = res.f;
    bool accepted = false;
    for (int halving = 0; halving < opts.ls_max_halvings; ++halving) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        x_new[i] = std::clamp(x[i] + step * d[i], lo[i], hi[i]);
        moved = moved || x_new[i] != x[i];
      }
      if (moved) {
        f_new = objective(x_new);
        ++res.evaluations;
        if (!std::isfinite(f_new))
          throw std::runtime_error("minimize: objective became non-finite");
        if (f_new < res.f) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    res.iterations = iter;
    if (!accepted) break;  // stationary up to the line search resolution

    std::vector<double> g_new = fd_gradient(objective, x_new, f_new, lo, hi,
                                            opts.grad_step, &res.evaluations);
    std::vector<double> s(n), y(n);
    double sy = 0.0, s_norm = 0.0, y_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
      s_norm += s[i] * s[i];
      y_norm += y[i] * y[i];
    }
    if (sy > 1e-10 * std::sqrt(s_norm * y_norm)) {
      pairs.emplace_back(std::move(s), std::move(y));
      while (pairs.size() > static_cast<std::size_t>(std::max(1, opts.memory)))
        pairs.pop_front();
    }
    x = std::move(x_new);
    res.f = f_new;
    res.x = x;
    g = std::move(g_new);
  }
  return res;
}

// ---------------------------------------------------------------------
// Risk objective over stacked rudder knot values
// ---------------------------------------------------------------------

/// Deterministic risk objective on a fixed target sample. The decision
/// vector stacks each vehicle's knot values in order; knot times are
/// fixed per solve. Per-vehicle exposure columns are cached so a
/// one-coordinate probe re-rolls only the vehicle it touches, and the
/// final reduction is sequential, so the value is independent of both
/// the evaluation history and the thread count.
template <VehicleRateFn RateFn>
class RiskObjective {
 public:
  RiskObjective(FleetSetup fleet, std::vector<std::vector<double>> knot_times,
                RateFn rate, const TargetSample& sample, int threads)
      : fleet_(std::move(fleet)),
        knot_times_(std::move(knot_times)),
        rate_(std::move(rate)),
        sample_(&sample),
        threads_(threads) {
    if (fleet_.starts.size() != fleet_.params.size() ||
        fleet_.starts.size() != knot_times_.size() || knot_times_.empty())
      throw std::invalid_argument("objective: fleet size mismatch");
    if (sample_->targets.empty())
      throw std::invalid_argument("objective: empty target sample");
    offsets_.push_back(0);
    for (const auto& kt : knot_times_) {
      if (kt.size() < 2)
        throw std::invalid_argument("objective: need at least two knots");
      offsets_.push_back(offsets_.back() + kt.size());
    }
    cached_values_.resize(knot_times_.size());
    trajectories_.resize(knot_times_.size());
    exposures_.assign(knot_times_.size(),
                      std::vector<double>(sample_->targets.size(), 0.0));
  }

  std::size_t dim() const { return offsets_.back(); }

  std::vector<double> lower_bounds() const { return bounds(-1.0); }
  std::vector<double> upper_bounds() const { return bounds(+1.0); }

  double operator()(const std::vector<double>& theta) {
    if (theta.size() != dim())
      throw std::invalid_argument("objective: wrong decision vector size");
    for (std::size_t v = 0; v < knot_times_.size(); ++v) {
      const auto begin = theta.begin() + offsets_[v];
      const auto end = theta.begin() + offsets_[v + 1];
      if (cached_values_[v].size() == knot_times_[v].size() &&
          std::equal(begin, end, cached_values_[v].begin()))
        continue;
      cached_values_[v].assign(begin, end);
      rebuild_column(v);
    }
    const std::size_t m = sample_->targets.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      double e = 0.0;
      for (const auto& col : exposures_) e += col[j];
      sum += std::exp(-e);
    }
    const double risk = sum / static_cast<double>(m);
    if (!std::isfinite(risk))
      throw std::runtime_error("objective: risk is non-finite");
    return risk;
  }

  std::vector<ControlSchedule> schedules(const std::vector<double>& theta) const {
    std::vector<ControlSchedule> out(knot_times_.size());
    for (std::size_t v = 0; v < knot_times_.size(); ++v) {
      out[v].knot_times = knot_times_[v];
      out[v].rudder_values.assign(theta.begin() + offsets_[v],
                                  theta.begin() + offsets_[v + 1]);
    }
    return out;
  }

  static std::vector<double> pack(const std::vector<ControlSchedule>& s) {
    std::vector<double> theta;
    for (const ControlSchedule& c : s)
      theta.insert(theta.end(), c.rudder_values.begin(), c.rudder_values.end());
    return theta;
  }

 private:
  std::vector<double> bounds(double sign) const {
    std::vector<double> b;
    b.reserve(dim());
    for (std::size_t v = 0; v < knot_times_.size(); ++v)
      b.insert(b.end(), knot_times_[v].size(),
               sign * fleet_.params[v].rudder_limit);
    return b;
  }

  void rebuild_column(std::size_t v) {
    ControlSchedule sched{knot_times_[v], cached_values_[v]};
    trajectories_[v] = rollout(fleet_.starts[v], sched, fleet_.dt, fleet_.params[v]);
    const Trajectory& tr = trajectories_[v];
    std::vector<double>& col = exposures_[v];
    parallel_for(sample_->targets.size(), threads_, [&](std::size_t j) {
      const Target& w = sample_->targets[j];
      double acc = 0.0;
      double prev = rate_(v, tr.states[0], w);
      for (std::size_t i = 1; i < tr.size(); ++i) {
        const double cur = rate_(v, tr.states[i], w);
        acc += 0.5 * (prev + cur) * (tr.times[i] - tr.times[i - 1]);
        prev = cur;
      }
      col[j] = acc;
    });
  }

  FleetSetup fleet_;
  std::vector<std::vector<double>> knot_times_;
  RateFn rate_;
  const TargetSample* sample_;
  int threads_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<double>> cached_values_;
  std::vector<Trajectory> trajectories_;
  std::vector<std::vector<double>> exposures_;
};

// ---------------------------------------------------------------------
// Inner solve: fixed mission time, minimize risk over knot values
// ---------------------------------------------------------------------

struct InnerSolve {
  std::vector<ControlSchedule> schedules;
  double risk = 1.0;
  int iterations = 0;
  bool gradient_converged = false;
};

template <VehicleRateFn RateFn>
InnerSolve minimize_risk(const FleetSetup& fleet,
                         const std::vector<ControlSchedule>& init, RateFn rate,
                         const TargetSample& sample, const InnerOptions& opts,
                         int threads = 1) {
  if (init.size() != fleet.starts.size())
    throw std::invalid_argument("minimize_risk: one schedule per vehicle");
  const double t_final = init.empty() ? 0.0 : init.front().duration();
  std::vector<std::vector<double>> knot_times;
  knot_times.reserve(init.size());
  for (const ControlSchedule& s : init) {
    if (std::abs(s.duration() - t_final) > 1e-9 * std::max(1.0, t_final))
      throw std::invalid_argument("minimize_risk: schedules must share T");
    knot_times.push_back(s.knot_times);
  }
  RiskObjective<RateFn> obj(fleet, std::move(knot_times), std::move(rate),
                            sample, threads);
  const MinimizeResult r = minimize_projected(
      [&obj](const std::vector<double>& x) { return obj(x); },
      RiskObjective<RateFn>::pack(init), obj.lower_bounds(),
      obj.upper_bounds(), opts, t_final);
  InnerSolve out;
  out.schedules = obj.schedules(r.x);
  out.risk = r.f;
  out.iterations = r.iterations;
  out.gradient_converged = r.gradient_converged;
  return out;
}

// ---------------------------------------------------------------------
// Schedule construction helpers
// ---------------------------------------------------------------------

/// Lawnmower-flavored seed: straight runs separated by full-rudder
/// pulses of alternating sign. Odd vehicles start turning the other
/// way so a fleet fans out instead of stacking.
inline ControlSchedule seed_schedule(double t_final, int knots_n,
                                     double rudder_limit,
                                     std::size_t vehicle_index) {
  ControlSchedule s;
  s.knot_times = uniform_knots(t_final, knots_n);
  s.rudder_values.reserve(s.knot_times.size());
  const double base = vehicle_index % 2 == 0 ? rudder_limit : -rudder_limit;
  for (std::size_t i = 0; i < s.knot_times.size(); ++i) {
    const std::size_t block = i / 2;
    if (block % 2 == 0) {
      s.rudder_values.push_back(0.0);
    } else {
      s.rudder_values.push_back(block / 2 % 2 == 0 ? base : -base);
    }
  }
  return s;
}

inline std::vector<ControlSchedule> seed_schedules(const FleetSetup& fleet,
                                                   double t_final, int knots_n) {
  std::vector<ControlSchedule> out;
  out.reserve(fleet.starts.size());
  for (std::size_t v = 0; v < fleet.starts.size(); ++v)
    out.push_back(seed_schedule(t_final, knots_n,
                                fleet.params[v].rudder_limit, v));
  return out;
}

/// Keeps the knot values, stretches the knot grid onto the new span.
inline std::vector<ControlSchedule> rescale_schedules(
    std::vector<ControlSchedule> schedules, double t_old, double t_new) {
  for (ControlSchedule& s : schedules) {
    for (double& t : s.knot_times) t *= t_new / t_old;
    if (!s.knot_times.empty()) s.knot_times.back() = t_new;
  }
  return schedules;
}

/// Appends one zero-rudder knot at the new end time. The control signal
/// on the original span is untouched, so with a shared step the longer
/// rollout reproduces the shorter one node for node.
inline std::vector<ControlSchedule> extend_schedules(
    std::vector<ControlSchedule> schedules, double t_new) {
  for (ControlSchedule& s : schedules) {
    if (!(t_new > s.duration()))
      throw std::invalid_argument("extend_schedules: t_new must grow the span");
    s.knot_times.push_back(t_new);
    s.rudder_values.push_back(0.0);
  }
  return schedules;
}

// ---------------------------------------------------------------------
// Outer search: minimal feasible mission time
// ---------------------------------------------------------------------

struct PlanResult {
  double mission_time = 0.0;  // s
  std::vector<ControlSchedule> schedules;
  double achieved_risk = 1.0;
  int inner_iterations = 0;
  double wall_clock = 0.0;  // s
};

namespace detail {

/// Inner solve from the lawnmower seed plus the configured number of
/// perturbed restarts; the lowest risk wins.
template <VehicleRateFn RateFn>
InnerSolve best_restart_solve(const FleetSetup& fleet, const RateFn& rate,
                              const TargetSample& sample,
                              const OptimizationConfig& cfg,
                              const InnerOptions& opts, double t, int threads,
                              int& total_iters) {
  std::mt19937_64 rng(cfg.seed);
  const std::vector<ControlSchedule> seed = seed_schedules(fleet, t, cfg.knots_n);
  InnerSolve best = minimize_risk(fleet, seed, rate, sample, opts, threads);
  total_iters += best.iterations;
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<ControlSchedule> jittered = seed;
    for (std::size_t v = 0; v < jittered.size(); ++v) {
      const double limit = fleet.params[v].rudder_limit;
      for (double& p : jittered[v].rudder_values) {
        p = std::clamp(p + (unit_uniform(rng) - 0.5) * 0.6 * limit, -limit,
                       limit);
      }
    }
    const InnerSolve s = minimize_risk(fleet, jittered, rate, sample, opts, threads);
    total_iters += s.iterations;
    if (s.risk < best.risk) best = s;
  }
  return best;
}

}  // namespace detail

/// One fixed-duration plan with no feasibility requirement: the outer
/// search's top-of-bracket stage run at the requested time. The time is
/// snapped to a rollout-step multiple like every searched duration.
template <VehicleRateFn RateFn>
PlanResult fixed_time_search(const FleetSetup& fleet, RateFn rate,
                             const TargetSample& sample,
                             const OptimizationConfig& cfg,
                             const InnerOptions& inner_base, double t_fixed,
                             int threads = 1) {
  cfg.validate();
  if (!(t_fixed > 0.0))
    throw std::invalid_argument("fixed_time_search: need t_fixed > 0");
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = fleet.dt;
  const double t = std::max(dt, std::round(t_fixed / dt) * dt);

  InnerOptions opts = inner_base;
  opts.max_iters = cfg.max_inner_iters;
  opts.grad_step = cfg.gradient_step;

  int total_iters = 0;
  const InnerSolve best = detail::best_restart_solve(fleet, rate, sample, cfg,
                                                     opts, t, threads, total_iters);
  PlanResult out;
  out.mission_time = t;
  out.schedules = best.schedules;
  out.achieved_risk = best.risk;
  out.inner_iterations = total_iters;
  out.wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Bisection on mission time against the monotone map from T to the
/// inner-minimized risk. Every evaluated T is snapped to a multiple of
/// the rollout step, so the quadrature grid of a longer mission
/// contains each shorter one and observed risks cannot increase with T;
/// that ordering is asserted across iterates. Feasibility is first
/// established by climbing from the bottom of the bracket with doubling
/// spans, warm-starting each rung from the previous solution extended
/// by zero rudder (a fresh seeded solve competes at every rung); this
/// keeps long-span solves anchored to structure found at spans the knot
/// grid can actually resolve. Each bisection midpoint then warm-starts
/// from the better of two candidates: the feasible-side solution with
/// its knot grid rescaled, or the infeasible-side solution extended by
/// zero rudder.
template <VehicleRateFn RateFn>
PlanResult min_time_search(const FleetSetup& fleet, RateFn rate,
                           const TargetSample& sample,
                           const OptimizationConfig& cfg,
                           const InnerOptions& inner_base, int threads = 1) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = fleet.dt;
  auto snap = [dt](double t) { return std::max(dt, std::round(t / dt) * dt); };
  auto wall = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  InnerOptions opts = inner_base;
  opts.max_iters = cfg.max_inner_iters;
  opts.grad_step = cfg.gradient_step;

  InnerOptions eval_only = opts;
  eval_only.max_iters = 0;

  const double rho = cfg.risk_threshold_rho;
  double lo_t = snap(cfg.time_bracket_lo);
  double hi_t = snap(cfg.time_bracket_hi);
  if (!(lo_t < hi_t))
    throw std::invalid_argument("min_time_search: bracket collapses under dt");
  const double tol = std::max(cfg.time_tolerance, dt);

  int total_iters = 0;
  auto solve = [&](const std::vector<ControlSchedule>& init,
                   const InnerOptions& o) {
    InnerSolve s = minimize_risk(fleet, init, rate, sample, o, threads);
    total_iters += s.iterations;
    return s;
  };

  // Feasibility ladder: start at the bottom of the bracket and double
  // the span until the threshold is met or the top is reached. Each
  // rung takes the better of the previous solution extended by zero
  // rudder and re-optimized, and a fresh seeded solve with restarts.
  double t_cur = lo_t;
  InnerSolve cur = detail::best_restart_solve(fleet, rate, sample, cfg, opts,
                                              t_cur, threads, total_iters);
  double infeas_t = lo_t;
  double infeas_risk = 1.0;
  std::vector<ControlSchedule> infeas_sched;
  bool have_infeas = false;
  while (!(cur.risk <= rho) && t_cur < hi_t) {
    infeas_t = t_cur;
    infeas_risk = cur.risk;
    infeas_sched = cur.schedules;
    have_infeas = true;
    const double t_next = std::min(hi_t, snap(2.0 * t_cur));
    const InnerSolve grown = solve(extend_schedules(cur.schedules, t_next), opts);
    const InnerSolve fresh = detail::best_restart_solve(
        fleet, rate, sample, cfg, opts, t_next, threads, total_iters);
    cur = grown.risk <= fresh.risk ? grown : fresh;
    if (cur.risk > infeas_risk + 1e-12)
      throw std::logic_error(
          "min_time_search: risk increased with mission time");
    t_cur = t_next;
  }
  if (!(cur.risk <= rho)) throw InfeasibleBracketError(cur.risk, rho, hi_t);

  double feas_t = t_cur;
  InnerSolve feas = cur;

  if (have_infeas) {
    while (feas_t - infeas_t > tol) {
      const double mid = snap(0.5 * (infeas_t + feas_t));
      if (!(mid > infeas_t) || !(mid < feas_t)) break;
      const std::vector<ControlSchedule> cand_grow =
          extend_schedules(infeas_sched, mid);
      const std::vector<ControlSchedule> cand_shrink =
          rescale_schedules(feas.schedules, feas_t, mid);
      const double risk_grow = solve(cand_grow, eval_only).risk;
      const double risk_shrink = solve(cand_shrink, eval_only).risk;
      const InnerSolve sol =
          solve(risk_grow <= risk_shrink ? cand_grow : cand_shrink, opts);
      if (sol.risk > infeas_risk + 1e-12)
        throw std::logic_error(
            "min_time_search: risk increased with mission time");
      if (sol.risk <= rho) {
        feas_t = mid;
        feas = sol;
      } else {
        infeas_t = mid;
        infeas_risk = sol.risk;
        infeas_sched = sol.schedules;
      }
    }
  }

  PlanResult out;
  out.mission_time = feas_t;
  out.schedules = std::move(feas.schedules);
  out.achieved_risk = feas.risk;
  out.inner_iterations = total_iters;
  out.wall_clock = wall();
  return out;
}

// ---------------------------------------------------------------------
// Scenario-level entry points
// ---------------------------------------------------------------------

namespace detail {

inline FleetSetup fleet_of(const Scenario& sc) {
  return FleetSetup{sc.start_states(), sc.vehicle_params(), sc.dt};
}

inline InnerOptions inner_options_of(const Scenario& sc) {
  InnerOptions o;
  o.max_iters = sc.opt.max_inner_iters;
  o.grad_step = sc.opt.gradient_step;
  o.grad_tol_per_second = sc.opt.grad_tol_factor * sc.max_lambda();
  return o;
}

}  // namespace detail

/// Fixed-time risk minimization from a caller-supplied initialization,
/// on the scenario's optimizer-sized target sample.
inline InnerSolve inner_minimize_risk(const Scenario& sc, double t_fixed,
                                      const std::vector<ControlSchedule>& init,
                                      int threads = 1) {
  sc.validate();
  if (!(t_fixed > 0.0))
    throw std::invalid_argument("inner_minimize_risk: t_fixed must be > 0");
  if (init.size() != sc.vehicles.size())
    throw std::invalid_argument("inner_minimize_risk: one schedule per vehicle");
  const std::vector<VehicleParams> vparams = sc.vehicle_params();
  for (std::size_t v = 0; v < init.size(); ++v) {
    init[v].validate(vparams[v].rudder_limit);
    if (std::abs(init[v].duration() - t_fixed) > 1e-9 * std::max(1.0, t_fixed))
      throw std::invalid_argument("inner_minimize_risk: schedule span != t_fixed");
  }
  const std::optional<RippleField> field = sc.field_if_enabled();
  const SensorRate rate(sc.sensor_params(), field ? &*field : nullptr);
  const TargetSample sample =
      sample_targets(sc.domain(), sc.mc_samples_opt, sc.seed);
  return minimize_risk(detail::fleet_of(sc), init, rate, sample,
                       detail::inner_options_of(sc), threads);
}

/// Minimal mission time meeting the scenario's risk threshold.
inline PlanResult outer_min_time(const Scenario& sc,
                                 const OptimizationConfig& cfg,
                                 int threads = 1) {
  sc.validate();
  const std::optional<RippleField> field = sc.field_if_enabled();
  const SensorRate rate(sc.sensor_params(), field ? &*field : nullptr);
  const TargetSample sample =
      sample_targets(sc.domain(), sc.mc_samples_opt, sc.seed);
  return min_time_search(detail::fleet_of(sc), rate, sample, cfg,
                         detail::inner_options_of(sc), threads);
}

/// Fixed-duration planning for the scenario: inner optimization only,
/// skipping the outer time search.
inline PlanResult plan_fixed_time(const Scenario& sc, double t_fixed,
                                  int threads = 1) {
  sc.validate();
  const std::optional<RippleField> field = sc.field_if_enabled();
  const SensorRate rate(sc.sensor_params(), field ? &*field : nullptr);
  const TargetSample sample =
      sample_targets(sc.domain(), sc.mc_samples_opt, sc.seed);
  return fixed_time_search(detail::fleet_of(sc), rate, sample, sc.opt,
                           detail::inner_options_of(sc), t_fixed, threads);
}

/// Pure evaluation of a stored plan under the scenario's current ripple
/// setting, on the reporting-sized sample. No optimization.
inline RiskReport evaluate_fixed_plan(const Scenario& sc,
                                      const std::vector<ControlSchedule>& schedules,
                                      double t, int threads = 1) {
  sc.validate();
  if (schedules.size() != sc.vehicles.size())
    throw std::invalid_argument("evaluate_fixed_plan: one schedule per vehicle");
  std::vector<Trajectory> trajs;
  trajs.reserve(schedules.size());
  const std::vector<VehicleState> starts = sc.start_states();
  const std::vector<VehicleParams> vparams = sc.vehicle_params();
  for (std::size_t v = 0; v < schedules.size(); ++v) {
    schedules[v].validate(vparams[v].rudder_limit);
    if (std::abs(schedules[v].duration() - t) > 1e-9 * std::max(1.0, t))
      throw std::invalid_argument("evaluate_fixed_plan: schedule span != t");
    trajs.push_back(rollout(starts[v], schedules[v], sc.dt, vparams[v]));
  }
  const std::optional<RippleField> field = sc.field_if_enabled();
  const SensorRate rate(sc.sensor_params(), field ? &*field : nullptr);
  const TargetSample sample =
      sample_targets(sc.domain(), sc.mc_samples_report, sc.seed);
  return residual_risk(trajs, sample, rate, threads);
}

}  // namespace mcmplan
