#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "mcmplan/scenario.hpp"
#include "mcmplan/trajectory_optimizer.hpp"

namespace mcmplan {

/// Raised for malformed scenario or plan files. Messages carry the
/// source name, line number, and offending key where applicable.
class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Shortest decimal string that parses back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

struct KeyContext {
  const std::string& source;
  int line;
  const std::string& key;

  [[noreturn]] void fail(const std::string& what) const {
    throw ScenarioParseError(source + ":" + std::to_string(line) + ": key '" +
                             key + "': " + what);
  }

  double to_double(std::string_view tok) const {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      fail("expected a number, got '" + std::string(tok) + "'");
    return v;
  }

  std::vector<std::string_view> tokens(std::string_view value,
                                       std::size_t count) const {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < value.size()) {
      while (i < value.size() && (value[i] == ' ' || value[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < value.size() && value[j] != ' ' && value[j] != '\t') ++j;
      if (j > i) out.push_back(value.substr(i, j - i));
      i = j;
    }
    if (out.size() != count)
      fail("expected " + std::to_string(count) + " value(s), got " +
           std::to_string(out.size()));
    return out;
  }

  double one_double(std::string_view value) const {
    return to_double(tokens(value, 1)[0]);
  }

  int one_int(std::string_view value) const {
    const std::string_view tok = tokens(value, 1)[0];
    int v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      fail("expected an integer, got '" + std::string(tok) + "'");
    return v;
  }

  std::uint64_t one_uint64(std::string_view value) const {
    const std::string_view tok = tokens(value, 1)[0];
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
      fail("expected a non-negative integer, got '" + std::string(tok) + "'");
    return v;
  }

  bool one_on_off(std::string_view value) const {
    const std::string_view tok = tokens(value, 1)[0];
    if (tok == "on") return true;
    if (tok == "off") return false;
    fail("expected on or off, got '" + std::string(tok) + "'");
  }

  std::string_view one_word(std::string_view value) const {
    return tokens(value, 1)[0];
  }
};

}  // namespace detail

/// Parses the flat key = value scenario format. `source` names the
/// input in error messages. Unknown and duplicate keys are rejected;
/// the result is fully validated.
inline Scenario parse_scenario_text(const std::string& text,
                                    const std::string& source = "<string>") {
  Scenario sc;
  std::set<std::string> seen;
  std::set<std::string> vehicle_keys;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ScenarioParseError(source + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" +
                               std::string(line) + "'");
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ScenarioParseError(source + ":" + std::to_string(line_no) +
                               ": empty key");
    if (!seen.insert(key).second)
      throw ScenarioParseError(source + ":" + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
    const detail::KeyContext ctx{source, line_no, key};

    if (key == "domain") {
      const auto t = ctx.tokens(value, 4);
      sc.domain_lo_x = ctx.to_double(t[0]);
      sc.domain_lo_y = ctx.to_double(t[1]);
      sc.domain_hi_x = ctx.to_double(t[2]);
      sc.domain_hi_y = ctx.to_double(t[3]);
    } else if (key == "length_scale") {
      sc.length_scale = ctx.one_double(value);
    } else if (key == "dt") {
      sc.dt = ctx.one_double(value);
    } else if (key == "seed") {
      sc.seed = ctx.one_uint64(value);
    } else if (key == "mc_samples_opt") {
      sc.mc_samples_opt = ctx.one_int(value);
    } else if (key == "mc_samples_report") {
      sc.mc_samples_report = ctx.one_int(value);
    } else if (key == "ripples.enabled") {
      sc.ripples_enabled = ctx.one_on_off(value);
    } else if (key == "ripples.rect") {
      const auto t = ctx.tokens(value, 4);
      sc.ripple_lo_x = ctx.to_double(t[0]);
      sc.ripple_lo_y = ctx.to_double(t[1]);
      sc.ripple_hi_x = ctx.to_double(t[2]);
      sc.ripple_hi_y = ctx.to_double(t[3]);
    } else if (key == "ripples.angle_deg") {
      sc.ripple_angle_deg = ctx.one_double(value);
    } else if (key == "ripples.edge_sharpness") {
      sc.ripple_edge_sharpness = ctx.one_double(value);
    } else if (key == "ripples.width_sigma") {
      sc.ripple_width_sigma = ctx.one_double(value);
    } else if (key == "ripples.split") {
      const std::string_view w = ctx.one_word(value);
      if (w == "upper_left") sc.ripple_split = RippleSplit::upper_left;
      else if (w == "lower_right") sc.ripple_split = RippleSplit::lower_right;
      else ctx.fail("expected upper_left or lower_right");
    } else if (key == "ripples.form") {
      const std::string_view w = ctx.one_word(value);
      if (w == "blend") sc.ripple_form = DomForm::blend;
      else if (w == "literal") sc.ripple_form = DomForm::paper_literal;
      else ctx.fail("expected blend or literal");
    } else if (key == "opt.risk_threshold") {
      sc.opt.risk_threshold_rho = ctx.one_double(value);
    } else if (key == "opt.knots") {
      sc.opt.knots_n = ctx.one_int(value);
    } else if (key == "opt.max_inner_iters") {
      sc.opt.max_inner_iters = ctx.one_int(value);
    } else if (key == "opt.gradient_step") {
      sc.opt.gradient_step = ctx.one_double(value);
    } else if (key == "opt.time_bracket") {
      const auto t = ctx.tokens(value, 2);
      sc.opt.time_bracket_lo = ctx.to_double(t[0]);
      sc.opt.time_bracket_hi = ctx.to_double(t[1]);
    } else if (key == "opt.time_tolerance") {
      sc.opt.time_tolerance = ctx.one_double(value);
    } else if (key == "opt.restarts") {
      sc.opt.restarts = ctx.one_int(value);
    } else if (key == "opt.seed") {
      sc.opt.seed = ctx.one_uint64(value);
    } else if (key == "opt.grad_tol_factor") {
      sc.opt.grad_tol_factor = ctx.one_double(value);
    } else if (key.starts_with("vehicle.")) {
      const std::size_t dot = key.find('.', 8);
      if (dot == std::string::npos) ctx.fail("expected vehicle.<index>.<field>");
      const std::string_view idx_str{key.data() + 8, dot - 8};
      int idx = -1;
      const auto [p, ec] =
          std::from_chars(idx_str.data(), idx_str.data() + idx_str.size(), idx);
      if (ec != std::errc{} || p != idx_str.data() + idx_str.size() || idx < 0)
        ctx.fail("bad vehicle index '" + std::string(idx_str) + "'");
      if (idx > 255) ctx.fail("vehicle index too large");
      if (static_cast<std::size_t>(idx) >= sc.vehicles.size())
        sc.vehicles.resize(idx + 1);
      ScenarioVehicle& v = sc.vehicles[idx];
      const std::string field = key.substr(dot + 1);
      vehicle_keys.insert(key);

      if (field == "start") {
        const auto t = ctx.tokens(value, 2);
        v.start_x = ctx.to_double(t[0]);
        v.start_y = ctx.to_double(t[1]);
      } else if (field == "heading_deg") {
        v.heading_deg = ctx.one_double(value);
      } else if (field == "speed") {
        v.speed = ctx.one_double(value);
      } else if (field == "nomoto_t") {
        v.nomoto_t = ctx.one_double(value);
      } else if (field == "nomoto_k") {
        v.nomoto_k = ctx.one_double(value);
      } else if (field == "rudder_limit_deg") {
        v.rudder_limit_deg = ctx.one_double(value);
      } else if (field == "sensor.lambda") {
        v.sensor_lambda = ctx.one_double(value);
      } else if (field == "sensor.fom") {
        v.sensor_fom = ctx.one_double(value);
      } else if (field == "sensor.sigma") {
        v.sensor_sigma = ctx.one_double(value);
      } else if (field == "sensor.atten") {
        v.sensor_atten = ctx.one_double(value);
      } else if (field == "sensor.alpha_fov_deg") {
        v.sensor_alpha_fov_deg = ctx.one_double(value);
      } else if (field == "sensor.p_alpha") {
        v.sensor_p_alpha = ctx.one_double(value);
      } else if (field == "sensor.eps_fov_deg") {
        v.sensor_eps_fov_deg = ctx.one_double(value);
      } else if (field == "sensor.eps_de_deg") {
        v.sensor_eps_de_deg = ctx.one_double(value);
      } else if (field == "sensor.p_eps") {
        v.sensor_p_eps = ctx.one_double(value);
      } else if (field == "sensor.height") {
        v.sensor_height = ctx.one_double(value);
      } else if (field == "sensor.tl_form") {
        const std::string_view w = ctx.one_word(value);
        if (w == "standard") v.sensor_tl_form = TlForm::standard;
        else if (w == "literal") v.sensor_tl_form = TlForm::paper_literal;
        else ctx.fail("expected standard or literal");
      } else if (field == "sensor.range_metric") {
        const std::string_view w = ctx.one_word(value);
        if (w == "euclidean") v.sensor_range_metric = RangeMetric::euclidean;
        else if (w == "l1") v.sensor_range_metric = RangeMetric::l1;
        else ctx.fail("expected euclidean or l1");
      } else {
        throw ScenarioParseError(source + ":" + std::to_string(line_no) +
                                 ": unknown key '" + key + "'");
      }
    } else {
      throw ScenarioParseError(source + ":" + std::to_string(line_no) +
                               ": unknown key '" + key + "'");
    }
  }

  if (!seen.contains("domain"))
    throw ScenarioParseError(source + ": missing required key 'domain'");
  if (sc.vehicles.empty())
    throw ScenarioParseError(source + ": missing required key 'vehicle.0.start'");
  for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
    const std::string want = "vehicle." + std::to_string(i) + ".start";
    if (!vehicle_keys.contains(want))
      throw ScenarioParseError(source + ": missing required key '" + want + "'");
  }
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioParseError(source + ": " + e.what());
  }
  return sc;
}

inline Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ScenarioParseError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path.filename().string());
}

/// Emits every field in a fixed key order; parsing the result gives
/// back the identical scenario, bit for bit, because all stored values
/// are written in their file-native units.
inline std::string serialize_scenario(const Scenario& sc) {
  using detail::fmt_double;
  std::ostringstream out;
  out << "domain = " << fmt_double(sc.domain_lo_x) << ' '
      << fmt_double(sc.domain_lo_y) << ' ' << fmt_double(sc.domain_hi_x) << ' '
      << fmt_double(sc.domain_hi_y) << '\n';
  out << "length_scale = " << fmt_double(sc.length_scale) << '\n';
  out << "dt = " << fmt_double(sc.dt) << '\n';
  out << "seed = " << sc.seed << '\n';
  out << "mc_samples_opt = " << sc.mc_samples_opt << '\n';
  out << "mc_samples_report = " << sc.mc_samples_report << '\n';
  out << "ripples.enabled = " << (sc.ripples_enabled ? "on" : "off") << '\n';
  out << "ripples.rect = " << fmt_double(sc.ripple_lo_x) << ' '
      << fmt_double(sc.ripple_lo_y) << ' ' << fmt_double(sc.ripple_hi_x) << ' '
      << fmt_double(sc.ripple_hi_y) << '\n';
  out << "ripples.angle_deg = " << fmt_double(sc.ripple_angle_deg) << '\n';
  out << "ripples.edge_sharpness = " << fmt_double(sc.ripple_edge_sharpness)
      << '\n';
  out << "ripples.width_sigma = " << fmt_double(sc.ripple_width_sigma) << '\n';
  out << "ripples.split = "
      << (sc.ripple_split == RippleSplit::upper_left ? "upper_left"
                                                     : "lower_right")
      << '\n';
  out << "ripples.form = "
      << (sc.ripple_form == DomForm::blend ? "blend" : "literal") << '\n';
  out << "opt.risk_threshold = " << fmt_double(sc.opt.risk_threshold_rho) << '\n';
  out << "opt.knots = " << sc.opt.knots_n << '\n';
  out << "opt.max_inner_iters = " << sc.opt.max_inner_iters << '\n';
  out << "opt.gradient_step = " << fmt_double(sc.opt.gradient_step) << '\n';
  out << "opt.time_bracket = " << fmt_double(sc.opt.time_bracket_lo) << ' '
      << fmt_double(sc.opt.time_bracket_hi) << '\n';
  out << "opt.time_tolerance = " << fmt_double(sc.opt.time_tolerance) << '\n';
  out << "opt.restarts = " << sc.opt.restarts << '\n';
  out << "opt.seed = " << sc.opt.seed << '\n';
  out << "opt.grad_tol_factor = " << fmt_double(sc.opt.grad_tol_factor) << '\n';
  for (std::size_t i = 0; i < sc.vehicles.size(); ++i) {
    const ScenarioVehicle& v = sc.vehicles[i];
    const std::string p = "vehicle." + std::to_string(i) + ".";
    out << p << "start = " << fmt_double(v.start_x) << ' '
        << fmt_double(v.start_y) << '\n';
    out << p << "heading_deg = " << fmt_double(v.heading_deg) << '\n';
    out << p << "speed = " << fmt_double(v.speed) << '\n';
    out << p << "nomoto_t = " << fmt_double(v.nomoto_t) << '\n';
    out << p << "nomoto_k = " << fmt_double(v.nomoto_k) << '\n';
    out << p << "rudder_limit_deg = " << fmt_double(v.rudder_limit_deg) << '\n';
    out << p << "sensor.lambda = " << fmt_double(v.sensor_lambda) << '\n';
    out << p << "sensor.fom = " << fmt_double(v.sensor_fom) << '\n';
    out << p << "sensor.sigma = " << fmt_double(v.sensor_sigma) << '\n';
    out << p << "sensor.atten = " << fmt_double(v.sensor_atten) << '\n';
    out << p << "sensor.alpha_fov_deg = " << fmt_double(v.sensor_alpha_fov_deg)
        << '\n';
    out << p << "sensor.p_alpha = " << fmt_double(v.sensor_p_alpha) << '\n';
    out << p << "sensor.eps_fov_deg = " << fmt_double(v.sensor_eps_fov_deg)
        << '\n';
    out << p << "sensor.eps_de_deg = " << fmt_double(v.sensor_eps_de_deg)
        << '\n';
    out << p << "sensor.p_eps = " << fmt_double(v.sensor_p_eps) << '\n';
    out << p << "sensor.height = " << fmt_double(v.sensor_height) << '\n';
    out << p << "sensor.tl_form = "
        << (v.sensor_tl_form == TlForm::standard ? "standard" : "literal")
        << '\n';
    out << p << "sensor.range_metric = "
        << (v.sensor_range_metric == RangeMetric::euclidean ? "euclidean" : "l1")
        << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------
// Plan files
// ---------------------------------------------------------------------

/// What the plan subcommand persists and evaluate reloads. Knot values
/// stay in radians; JSON shortest-round-trip printing keeps every
/// double exact across save and load.
struct StoredPlan {
  double mission_time = 0.0;
  double achieved_risk = 1.0;
  bool ripples_enabled = false;  // setting the plan was computed under
  std::vector<ControlSchedule> schedules;
};

inline void save_plan(const std::filesystem::path& path, const StoredPlan& plan) {
  nlohmann::json j;
  j["mission_time"] = plan.mission_time;
  j["achieved_risk"] = plan.achieved_risk;
  j["ripples_enabled"] = plan.ripples_enabled;
  nlohmann::json scheds = nlohmann::json::array();
  for (const ControlSchedule& s : plan.schedules) {
    nlohmann::json e;
    e["knot_times"] = s.knot_times;
    e["rudder_values"] = s.rudder_values;
    scheds.push_back(std::move(e));
  }
  j["schedules"] = std::move(scheds);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline StoredPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ScenarioParseError("cannot open plan file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    StoredPlan plan;
    plan.mission_time = j.at("mission_time").get<double>();
    plan.achieved_risk = j.at("achieved_risk").get<double>();
    plan.ripples_enabled = j.at("ripples_enabled").get<bool>();
    for (const nlohmann::json& e : j.at("schedules")) {
      ControlSchedule s;
      s.knot_times = e.at("knot_times").get<std::vector<double>>();
      s.rudder_values = e.at("rudder_values").get<std::vector<double>>();
      plan.schedules.push_back(std::move(s));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioParseError("plan file '" + path.string() + "': " + e.what());
  }
}

// ---------------------------------------------------------------------
// Result artifacts
// ---------------------------------------------------------------------

inline void write_trajectory_csv(const std::filesystem::path& path,
                                 const Trajectory& tr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "t,x,y,psi_deg,r_degps,p_deg\n";
  using detail::fmt_double;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const VehicleState& s = tr.states[i];
    out << fmt_double(tr.times[i]) << ',' << fmt_double(s.x) << ','
        << fmt_double(s.y) << ',' << fmt_double(rad_to_deg(s.psi)) << ','
        << fmt_double(rad_to_deg(s.r)) << ','
        << fmt_double(rad_to_deg(tr.controls[i])) << '\n';
  }
}

/// Inverse of write_trajectory_csv. Positions come back exactly; the
/// angle columns pass through a degree conversion, which can move the
/// last bit.
inline Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ScenarioParseError("cannot open trajectory file '" + path.string() +
                             "'");
  std::string line;
  if (!std::getline(in, line) ||
      detail::trim(line) != "t,x,y,psi_deg,r_degps,p_deg")
    throw ScenarioParseError("trajectory file '" + path.string() +
                             "': bad header");
  Trajectory tr;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    std::array<double, 6> col{};
    std::size_t start = 0;
    for (int c = 0; c < 6; ++c) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      if ((comma == line.size()) != (c == 5))
        throw ScenarioParseError("trajectory file '" + path.string() + "':" +
                                 std::to_string(line_no) + ": expected 6 columns");
      const std::string_view tok =
          detail::trim(std::string_view(line).substr(start, comma - start));
      const auto [p, ec] =
          std::from_chars(tok.data(), tok.data() + tok.size(), col[c]);
      if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ScenarioParseError("trajectory file '" + path.string() + "':" +
                                 std::to_string(line_no) + ": bad number '" +
                                 std::string(tok) + "'");
      start = comma + 1;
    }
    tr.times.push_back(col[0]);
    tr.states.push_back(VehicleState{col[1], col[2], deg_to_rad(col[3]),
                                     deg_to_rad(col[4])});
    tr.controls.push_back(deg_to_rad(col[5]));
  }
  tr.dt = tr.times.size() > 1 ? tr.times[1] - tr.times[0] : 0.0;
  return tr;
}

inline void write_coverage_csv(const std::filesystem::path& path,
                               const CoverageGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  using detail::fmt_double;
  out << "# nx=" << grid.nx << " ny=" << grid.ny << '\n';
  out << "# domain = " << fmt_double(grid.bounds.lo_x) << ' '
      << fmt_double(grid.bounds.lo_y) << ' ' << fmt_double(grid.bounds.hi_x)
      << ' ' << fmt_double(grid.bounds.hi_y) << '\n';
  out << "x,y,p\n";
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      out << fmt_double(grid.cell_x(ix)) << ',' << fmt_double(grid.cell_y(iy))
          << ',' << fmt_double(grid.value_at(ix, iy)) << '\n';
}

/// 8-bit grayscale map of per-cell detection probability, top row first
/// so north is up in image viewers.
inline void write_coverage_pgm(const std::filesystem::path& path,
                               const CoverageGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  std::vector<unsigned char> row(grid.nx);
  for (int iy = grid.ny; iy-- > 0;) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double p = std::clamp(grid.value_at(ix, iy), 0.0, 1.0);
      row[ix] = static_cast<unsigned char>(std::lround(255.0 * p));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

inline void write_summary(const std::filesystem::path& path,
                          const std::string& case_label, double risk,
                          double mission_time, double compute_seconds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  char buf[256];
  std::snprintf(buf, sizeof buf, "case=%s risk=%.2f%% mission=%.2fs compute=%.2fs\n",
                case_label.c_str(), 100.0 * risk, mission_time, compute_seconds);
  out << buf;
}

struct OutputPaths {
  std::filesystem::path summary;
  std::filesystem::path plan;
  std::filesystem::path coverage_csv;
  std::filesystem::path coverage_pgm;
  std::vector<std::filesystem::path> trajectories;
};

/// Writes the full artifact set for one planning run: per-vehicle
/// trajectory CSVs rolled from the stored schedules, the reloadable
/// plan, the coverage grid in CSV and PGM form, and a one-line summary.
/// The summary risk is the reporting-sample estimate.
inline OutputPaths write_outputs(const Scenario& sc, const PlanResult& plan,
                                 const RiskReport& report,
                                 const CoverageGrid& grid,
                                 const std::filesystem::path& out_dir,
                                 const std::string& case_label) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw std::runtime_error("cannot create output directory '" +
                             out_dir.string() + "': " + ec.message());
  OutputPaths paths;
  const std::vector<VehicleState> starts = sc.start_states();
  const std::vector<VehicleParams> params = sc.vehicle_params();
  for (std::size_t v = 0; v < plan.schedules.size(); ++v) {
    const Trajectory tr = rollout(starts[v], plan.schedules[v], sc.dt, params[v]);
    std::filesystem::path p =
        out_dir / ("trajectory_" + std::to_string(v) + ".csv");
    write_trajectory_csv(p, tr);
    paths.trajectories.push_back(std::move(p));
  }
  paths.plan = out_dir / "plan.json";
  save_plan(paths.plan, StoredPlan{plan.mission_time, report.residual_risk,
                                   sc.ripples_enabled, plan.schedules});
  paths.coverage_csv = out_dir / "coverage.csv";
  write_coverage_csv(paths.coverage_csv, grid);
  paths.coverage_pgm = out_dir / "coverage.pgm";
  write_coverage_pgm(paths.coverage_pgm, grid);
  paths.summary = out_dir / "summary.txt";
  write_summary(paths.summary, case_label, report.residual_risk,
                plan.mission_time, plan.wall_clock);
  return paths;
}

}  // namespace mcmplan
