#include "mcmplan/trajectory_optimizer.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mcmplan/angles.hpp"
#include "mcmplan/risk_integrator.hpp"

using namespace mcmplan;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Smooth detection bump around the vehicle, wide enough that rudder
// choices change the objective in a differentiable way.
struct BumpRate {
  double scale = 0.05;
  double width = 30.0;
  double operator()(std::size_t, const VehicleState& s, const Target& w) const {
    const double dx = w.omega_x - s.x;
    const double dy = w.omega_y - s.y;
    return scale * std::exp(-(dx * dx + dy * dy) / (width * width));
  }
};

struct ZeroRate {
  double operator()(std::size_t, const VehicleState&, const Target&) const {
    return 0.0;
  }
};

struct ConstantRate {
  double c = 1e-3;
  double operator()(std::size_t, const VehicleState&, const Target&) const {
    return c;
  }
};

FleetSetup one_vehicle_fleet(double dt = 0.5) {
  FleetSetup f;
  f.starts = {VehicleState{0.0, 0.0, 0.0, 0.0}};
  f.params = {VehicleParams{}};
  f.dt = dt;
  return f;
}

std::vector<ControlSchedule> zero_schedules(const FleetSetup& fleet,
                                            double t_final, int knots) {
  std::vector<ControlSchedule> out;
  for (std::size_t v = 0; v < fleet.starts.size(); ++v) {
    ControlSchedule s;
    s.knot_times = uniform_knots(t_final, knots);
    s.rudder_values.assign(s.knot_times.size(), 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

double eval_risk(const FleetSetup& fleet,
                 const std::vector<ControlSchedule>& schedules, auto rate,
                 const TargetSample& sample) {
  InnerOptions eval_only;
  eval_only.max_iters = 0;
  return minimize_risk(fleet, schedules, rate, sample, eval_only).risk;
}

}  // namespace

TEST_CASE("box minimizer clamps to the active bounds exactly") {
  auto quad = [](const std::vector<double>& x) {
    const double a = x[0] - 2.0;
    const double b = x[1] + 3.0;
    return a * a + b * b;
  };
  InnerOptions opts;
  opts.max_iters = 100;
  const MinimizeResult r = minimize_projected(quad, {0.0, 0.0}, {-1.0, -1.0},
                                              {1.0, 1.0}, opts);
  REQUIRE(r.x[0] == 1.0);
  REQUIRE(r.x[1] == -1.0);
  REQUIRE(r.f == Catch::Approx(5.0).margin(1e-12));

  const MinimizeResult interior = minimize_projected(
      [](const std::vector<double>& x) {
        return (x[0] - 0.25) * (x[0] - 0.25);
      },
      {0.9}, {-1.0}, {1.0}, opts);
  REQUIRE(interior.x[0] == Catch::Approx(0.25).margin(1e-3));

  REQUIRE_THROWS_AS(
      minimize_projected(quad, {0.0}, {-1.0, -1.0}, {1.0, 1.0}, opts),
      std::invalid_argument);
}

TEST_CASE("zero detection rate keeps risk at one and stops immediately") {
  const FleetSetup fleet = one_vehicle_fleet();
  const TargetSample sample = sample_targets({0.0, 0.0, 10.0, 10.0}, 32, 5);
  InnerOptions opts;
  opts.max_iters = 200;
  const InnerSolve sol =
      minimize_risk(fleet, zero_schedules(fleet, 40.0, 8), ZeroRate{}, sample, opts);
  REQUIRE(sol.risk == 1.0);
  REQUIRE(sol.gradient_converged);
  REQUIRE(sol.iterations == 0);
}

TEST_CASE("solver steers toward an off-axis payoff region") {
  // Targets sit up and to the left of the straight-ahead track, beyond
  // bump range of it. Any improvement requires turning left.
  FleetSetup fleet = one_vehicle_fleet();
  const TargetSample sample = sample_targets({-20.0, 60.0, 20.0, 100.0}, 128, 11);
  BumpRate rate{0.08, 25.0};

  const std::vector<ControlSchedule> straight = zero_schedules(fleet, 60.0, 8);
  const double risk_straight = eval_risk(fleet, straight, rate, sample);

  InnerOptions opts;
  opts.max_iters = 120;
  opts.grad_step = 1e-3;
  const InnerSolve sol = minimize_risk(fleet, straight, rate, sample, opts);

  REQUIRE(sol.risk < risk_straight);
  REQUIRE(sol.risk < 0.9 * risk_straight);

  const Trajectory tr =
      rollout(fleet.starts[0], sol.schedules[0], fleet.dt, fleet.params[0]);
  REQUIRE(tr.states[30].psi > 0.0);  // turned left well before the region
  REQUIRE(tr.states.back().y > 5.0);
  double min_dist = std::numeric_limits<double>::infinity();
  for (const VehicleState& s : tr.states)
    min_dist = std::min(min_dist, std::hypot(s.x - 0.0, s.y - 80.0));
  // A straight run never comes closer than 80 m to the region center.
  REQUIRE(min_dist < 40.0);
}

TEST_CASE("solver never returns a risk above its initialization") {
  FleetSetup fleet = one_vehicle_fleet();
  const TargetSample sample = sample_targets({-30.0, -30.0, 90.0, 90.0}, 64, 3);
  BumpRate rate{0.05, 30.0};
  InnerOptions opts;
  opts.max_iters = 25;

  std::mt19937_64 rng(404);
  const double limit = fleet.params[0].rudder_limit;
  for (int trial = 0; trial < 20; ++trial) {
    ControlSchedule init;
    init.knot_times = uniform_knots(50.0, 6);
    for (std::size_t i = 0; i < init.knot_times.size(); ++i)
      init.rudder_values.push_back(uniform(rng, -limit, limit));
    const std::vector<ControlSchedule> init_v{init};
    const double f0 = eval_risk(fleet, init_v, rate, sample);
    const InnerSolve sol = minimize_risk(fleet, init_v, rate, sample, opts);
    REQUIRE(sol.risk <= f0);
  }
}

TEST_CASE("forward differences track central differences on a smooth toy") {
  // Gentle steering response keeps the objective's curvature moderate,
  // so the one-sided error stays within tolerance across step sizes.
  FleetSetup fleet = one_vehicle_fleet();
  fleet.params[0].nomoto_k = 1.0;
  fleet.params[0].nomoto_t = 1.0;
  const TargetSample sample = sample_targets({-10.0, 20.0, 50.0, 80.0}, 48, 21);
  BumpRate rate{0.08, 35.0};
  RiskObjective<BumpRate> obj(fleet, {uniform_knots(50.0, 4)}, rate, sample, 1);
  auto f = [&obj](const std::vector<double>& x) { return obj(x); };

  const std::vector<double> x{0.1, -0.2, 0.15, 0.05};
  const std::vector<double> lo = obj.lower_bounds();
  const std::vector<double> hi = obj.upper_bounds();
  const double f_x = f(x);

  for (const double h : {1e-3, 1e-4, 1e-5}) {
    const std::vector<double> g = fd_gradient(f, x, f_x, lo, hi, h);
    double num = 0.0, den = 0.0;
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      probe[i] = x[i] + h;
      const double fp = f(probe);
      probe[i] = x[i] - h;
      const double fm = f(probe);
      probe[i] = x[i];
      const double central = (fp - fm) / (2.0 * h);
      num += (g[i] - central) * (g[i] - central);
      den += central * central;
    }
    REQUIRE(den > 0.0);
    REQUIRE(std::sqrt(num / den) < 0.05);
  }
}

TEST_CASE("lawnmower seed alternates pulse signs and clamps nothing") {
  const ControlSchedule s = seed_schedule(70.0, 8, 0.6, 0);
  REQUIRE(s.knot_times.size() == 8);
  REQUIRE(s.knot_times.front() == 0.0);
  REQUIRE(s.knot_times.back() == 70.0);
  const std::vector<double> want{0.0, 0.0, 0.6, 0.6, 0.0, 0.0, -0.6, -0.6};
  REQUIRE(s.rudder_values == want);

  const ControlSchedule flipped = seed_schedule(70.0, 8, 0.6, 1);
  for (std::size_t i = 0; i < 8; ++i)
    REQUIRE(flipped.rudder_values[i] == -s.rudder_values[i]);
  REQUIRE_NOTHROW(s.validate(0.6));
}

TEST_CASE("schedule rescaling and extension preserve what they promise") {
  ControlSchedule s;
  s.knot_times = {0.0, 10.0, 25.0, 40.0};
  s.rudder_values = {0.1, -0.2, 0.3, 0.0};
  const std::vector<ControlSchedule> orig{s};

  const auto scaled = rescale_schedules(orig, 40.0, 90.0);
  REQUIRE(scaled[0].knot_times.front() == 0.0);
  REQUIRE(scaled[0].knot_times.back() == 90.0);
  REQUIRE(scaled[0].knot_times[1] == Catch::Approx(22.5).margin(1e-12));
  REQUIRE(scaled[0].rudder_values == s.rudder_values);

  const auto grown = extend_schedules(orig, 55.0);
  REQUIRE(grown[0].knot_times.size() == 5);
  REQUIRE(grown[0].knot_times.back() == 55.0);
  REQUIRE(grown[0].rudder_values.back() == 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(grown[0].knot_times[i] == s.knot_times[i]);
    REQUIRE(grown[0].rudder_values[i] == s.rudder_values[i]);
  }
  REQUIRE_THROWS_AS(extend_schedules(orig, 40.0), std::invalid_argument);
}

TEST_CASE("constant-rate search reproduces the closed-form time") {
  const FleetSetup fleet = one_vehicle_fleet(0.5);
  const TargetSample sample = sample_targets({0.0, 0.0, 20.0, 20.0}, 16, 1);
  OptimizationConfig cfg;
  cfg.risk_threshold_rho = 0.1;
  cfg.knots_n = 4;
  cfg.max_inner_iters = 2;
  cfg.time_bracket_lo = 100.0;
  cfg.time_bracket_hi = 4000.0;
  cfg.time_tolerance = 1.0;
  cfg.restarts = 0;
  cfg.seed = 1;
  const ConstantRate rate{1e-3};
  const PlanResult plan = min_time_search(fleet, rate, sample, cfg, InnerOptions{});

  const double t_star = std::log(1.0 / cfg.risk_threshold_rho) / rate.c;
  REQUIRE(plan.mission_time >= t_star - 1e-9);
  REQUIRE(plan.mission_time <= t_star + cfg.time_tolerance + 1e-9);
  REQUIRE(std::abs(plan.achieved_risk - std::exp(-rate.c * plan.mission_time)) <
          1e-12);
  REQUIRE(plan.achieved_risk <= cfg.risk_threshold_rho);
  REQUIRE(plan.schedules.size() == 1);
  REQUIRE(plan.schedules[0].duration() == plan.mission_time);
}

TEST_CASE("relaxed threshold returns the bottom of the bracket") {
  const FleetSetup fleet = one_vehicle_fleet(0.5);
  const TargetSample sample = sample_targets({0.0, 0.0, 20.0, 20.0}, 16, 1);
  OptimizationConfig cfg;
  cfg.risk_threshold_rho = 0.999;
  cfg.knots_n = 4;
  cfg.max_inner_iters = 2;
  cfg.time_bracket_lo = 100.0;
  cfg.time_bracket_hi = 4000.0;
  cfg.time_tolerance = 1.0;
  cfg.restarts = 0;
  const PlanResult plan =
      min_time_search(fleet, ConstantRate{1e-3}, sample, cfg, InnerOptions{});
  REQUIRE(plan.mission_time == 100.0);
}

TEST_CASE("doubling the fleet never lengthens the mission") {
  const TargetSample sample = sample_targets({0.0, 0.0, 20.0, 20.0}, 16, 1);
  OptimizationConfig cfg;
  cfg.risk_threshold_rho = 0.2;
  cfg.knots_n = 4;
  cfg.max_inner_iters = 2;
  cfg.time_bracket_lo = 50.0;
  cfg.time_bracket_hi = 4000.0;
  cfg.time_tolerance = 1.0;
  cfg.restarts = 0;
  const ConstantRate rate{1e-3};

  const PlanResult solo =
      min_time_search(one_vehicle_fleet(0.5), rate, sample, cfg, InnerOptions{});
  FleetSetup pair = one_vehicle_fleet(0.5);
  pair.starts.push_back(VehicleState{5.0, 0.0, 0.0, 0.0});
  pair.params.push_back(VehicleParams{});
  const PlanResult duo = min_time_search(pair, rate, sample, cfg, InnerOptions{});

  REQUIRE(duo.mission_time <= solo.mission_time);
  REQUIRE(duo.mission_time ==
          Catch::Approx(0.5 * solo.mission_time).margin(cfg.time_tolerance + 0.5));
}

TEST_CASE("hopeless bracket raises the dedicated error") {
  const FleetSetup fleet = one_vehicle_fleet(0.5);
  const TargetSample sample = sample_targets({0.0, 0.0, 20.0, 20.0}, 16, 1);
  OptimizationConfig cfg;
  cfg.risk_threshold_rho = 1e-6;
  cfg.knots_n = 4;
  cfg.max_inner_iters = 2;
  cfg.time_bracket_lo = 50.0;
  cfg.time_bracket_hi = 200.0;
  cfg.time_tolerance = 1.0;
  cfg.restarts = 0;
  try {
    min_time_search(fleet, ConstantRate{1e-6}, sample, cfg, InnerOptions{});
    FAIL("expected InfeasibleBracketError");
  } catch (const InfeasibleBracketError& e) {
    REQUIRE(e.threshold == 1e-6);
    REQUIRE(e.bracket_hi == 200.0);
    REQUIRE(e.best_risk > 0.99);
  }

  OptimizationConfig bad = cfg;
  bad.time_bracket_lo = 50.0;
  bad.time_bracket_hi = 50.2;  // both ends snap to the same step multiple
  FleetSetup coarse = one_vehicle_fleet(50.0);
  REQUIRE_THROWS_AS(
      min_time_search(coarse, ConstantRate{1e-3}, sample, bad, InnerOptions{}),
      std::invalid_argument);
}

TEST_CASE("search output is bit-stable across reruns and thread counts") {
  FleetSetup fleet = one_vehicle_fleet(0.5);
  fleet.starts = {VehicleState{0.0, 40.0, 0.0, 0.0}};
  const TargetSample sample = sample_targets({10.0, 10.0, 90.0, 70.0}, 96, 9);
  BumpRate rate{0.08, 30.0};
  OptimizationConfig cfg;
  cfg.risk_threshold_rho = 0.5;
  cfg.knots_n = 6;
  cfg.max_inner_iters = 12;
  cfg.time_bracket_lo = 20.0;
  cfg.time_bracket_hi = 120.0;
  cfg.time_tolerance = 2.0;
  cfg.restarts = 1;
  cfg.seed = 7;
  InnerOptions base;
  base.grad_tol_per_second = 0.0;

  const PlanResult a = min_time_search(fleet, rate, sample, cfg, base, 1);
  const PlanResult b = min_time_search(fleet, rate, sample, cfg, base, 1);
  const PlanResult c = min_time_search(fleet, rate, sample, cfg, base, 4);

  for (const PlanResult* other : {&b, &c}) {
    REQUIRE(a.mission_time == other->mission_time);
    REQUIRE(a.achieved_risk == other->achieved_risk);
    REQUIRE(a.inner_iterations == other->inner_iterations);
    REQUIRE(a.schedules.size() == other->schedules.size());
    for (std::size_t v = 0; v < a.schedules.size(); ++v) {
      REQUIRE(a.schedules[v].knot_times == other->schedules[v].knot_times);
      REQUIRE(a.schedules[v].rudder_values == other->schedules[v].rudder_values);
    }
  }
  REQUIRE(a.achieved_risk <= cfg.risk_threshold_rho);
  REQUIRE(a.mission_time < 120.0);  // the search actually tightened the time
}

TEST_CASE("scenario wrappers run end to end on a compact setup") {
  Scenario sc;
  sc.length_scale = 2.5;
  sc.dt = 0.5;
  sc.mc_samples_opt = 64;
  sc.mc_samples_report = 256;
  sc.seed = 3;
  ScenarioVehicle& v = sc.vehicles.emplace_back();
  v.start_x = 14.5;
  v.start_y = 15.0;
  v.sensor_height = 5.0;
  v.sensor_eps_de_deg = -30.0;
  v.sensor_eps_fov_deg = 20.0;
  v.sensor_lambda = 3.0;

  ControlSchedule s;
  s.knot_times = uniform_knots(40.0, 5);
  s.rudder_values.assign(5, 0.0);
  const std::vector<ControlSchedule> plan{s};

  const InnerSolve sol = inner_minimize_risk(sc, 40.0, plan);
  REQUIRE(sol.risk >= 0.0);
  REQUIRE(sol.risk <= 1.0);
  REQUIRE(sol.schedules.size() == 1);

  const RiskReport rep = evaluate_fixed_plan(sc, plan, 40.0);
  REQUIRE(rep.mission_time == Catch::Approx(40.0).margin(1e-9));
  REQUIRE(rep.residual_risk >= 0.0);
  REQUIRE(rep.residual_risk <= 1.0);
  REQUIRE(rep.per_target_detection.size() == 256);

  REQUIRE_THROWS_AS(inner_minimize_risk(sc, 35.0, plan), std::invalid_argument);
  REQUIRE_THROWS_AS(evaluate_fixed_plan(sc, plan, 35.0), std::invalid_argument);
}
