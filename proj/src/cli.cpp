#include "roadfield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "roadfield/conical.hpp"
#include "roadfield/front_geometry.hpp"
#include "roadfield/rd_simulator.hpp"
#include "roadfield/verify.hpp"

namespace roadfield::cli {

using nlohmann::json;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

json params_json(const ModelParams& p) {
  return json{{"D", p.D},
              {"mu", p.mu},
              {"nu", p.nu},
              {"kappa", p.kappa},
              {"D_tilde", p.D_tilde ? json(*p.D_tilde) : json(nullptr)}};
}

json options_json(const RunConfig& c) {
  json o;
  auto opt = [&](const char* key, const std::optional<double>& v) {
    if (v) o[key] = *v;
  };
  opt("angle", c.angle);
  opt("theta", c.theta);
  opt("t", c.t);
  opt("x", c.x);
  opt("y", c.y);
  opt("q", c.q);
  opt("v", c.v);
  o["n"] = c.n;
  o["h"] = c.h;
  o["Lx"] = c.Lx;
  o["Ly"] = c.Ly;
  o["tmax"] = c.t_max;
  o["level"] = c.level;
  o["format"] = c.format;
  o["quick"] = c.quick;
  return o;
}

// Tabular artifact: column names and rows, emitted as CSV or as a list of
// objects inside "results".
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] json to_json() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json row;
      for (std::size_t k = 0; k < columns.size(); ++k) row[columns[k]] = r[k];
      arr.push_back(row);
    }
    return arr;
  }

  void write_csv(std::ostream& os) const {
    os << std::setprecision(17);
    for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
      os << '\n';
    }
  }
};

struct Artifact {
  json results = json::object();
  json tolerances = json::object();
  std::optional<Table> table;  ///< CSV payload and "samples" in JSON
  std::string table_key = "samples";
  int exit_code = kOk;
};

double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw InvalidConfig(std::string("missing required option --") + flag);
  return *v;
}

Artifact cmd_hamiltonian(const RunConfig& c) {
  const EffectiveRoadHamiltonian hr(c.params);
  Artifact a;
  a.results["q_crit"] = hr.q_crit();
  a.tolerances["pq_solver"] = hr.tolerance();
  auto row = [&](double q) {
    const double p = hr.solve_pq(q);
    return std::vector<double>{q, p, hr.eval(q), hr.derivative(q)};
  };
  if (c.q) {
    const auto r = row(*c.q);
    a.results["q"] = r[0];
    a.results["p_q"] = r[1];
    a.results["H_r"] = r[2];
    a.results["H_r_prime"] = r[3];
    a.results["F0_at_pq"] = eval_F0(r[0], r[1], c.params).value();
    return a;
  }
  Table t{{"q", "p_q", "H_r", "H_r_prime"}, {}};
  for (int k = 0; k < c.n; ++k) t.rows.push_back(row(4.0 * k / std::max(1, c.n - 1)));
  a.table = std::move(t);
  return a;
}

Artifact cmd_legendre(const RunConfig& c) {
  const RoadLagrangian road(c.params);
  Artifact a;
  a.results["window"] = road.window();
  a.tolerances["conjugate"] = RoadLagrangian::kDefaultTolerance;
  if (c.v) {
    const ConjugatePoint cp = road.conjugate(*c.v);
    a.results["v"] = *c.v;
    a.results["L_r"] = cp.value;
    a.results["L_r_prime"] = cp.q;
    a.results["L_f_on_road"] = eval_Lf(*c.v, 0.0);
    return a;
  }
  Table t{{"v", "L_r", "L_r_prime"}, {}};
  for (int k = 0; k < c.n; ++k) {
    const double v = 8.0 * k / std::max(1, c.n - 1);
    const ConjugatePoint cp = road.conjugate(v);
    t.rows.push_back({v, cp.value, cp.q});
  }
  a.table = std::move(t);
  return a;
}

json solution_json(const LaxOleinikSolution& s) {
  return json{{"t", s.t},         {"x", s.x},
              {"y", s.y},         {"J", s.value},
              {"w", std::max(0.0, s.value)},
              {"tau0", s.tau0},   {"z0", s.z0},
              {"q0", s.q0},       {"p0", s.p0},
              {"on_road_speed", s.on_road_speed},
              {"field_velocity", {s.field_velocity.x, s.field_velocity.y}}};
}

Artifact cmd_value(const RunConfig& c) {
  const ValueFunction vf(c.params);
  const double t = c.t.value_or(1.0);
  const LaxOleinikSolution s = vf.solve(t, require(c.x, "x"), require(c.y, "y"));
  Artifact a;
  a.results = solution_json(s);
  if (s.y > 0.0) {
    const Point2 g = vf.gradient(t, s.x, s.y);
    a.results["gradient"] = {g.x, g.y};
  }
  a.tolerances["argument"] = 1e-11;
  return a;
}

Artifact cmd_speed(const RunConfig& c) {
  const RoadSpeedReport rep = road_speed_report(c.params);
  const FrontGeometry fg(c.params);
  Artifact a;
  a.results["road_speed"] = fg.road_speed();
  a.results["road_speed_min_ratio"] = rep.by_min_ratio;
  a.results["road_speed_lagrangian_zero"] = rep.by_lagrangian;
  a.results["critical_angle"] = fg.critical_angle();
  if (c.params.D > 2.0) a.results["lower_shape_angle"] = fg.lower_shape_angle();
  a.results["large_D_asymptote"] = large_D_asymptote(c.params);
  if (c.theta) {
    a.results["theta"] = *c.theta;
    a.results["directional_speed"] = fg.directional_speed(*c.theta);
  }
  a.tolerances["road_speed_agreement"] = 1e-7;
  a.tolerances["speed_root"] = FrontGeometry::kSpeedTolerance;
  a.tolerances["angle"] = FrontGeometry::kAngleTolerance;
  return a;
}

Artifact cmd_wulff(const RunConfig& c) {
  const WulffShape w = sample_wulff(c.params, c.n);
  Artifact a;
  a.results["theta_star"] = w.theta_star;
  a.results["road_speed"] = w.road_speed;
  a.results["convex"] = w.convex;
  a.results["theta_star_violation"] = w.theta_star_violation;
  Table t{{"theta_rad", "speed", "x", "y"}, {}};
  for (const auto& s : w.samples) {
    if (s.theta >= 0.0) t.rows.push_back({s.theta, s.speed, s.x(), s.y()});
  }
  a.table = std::move(t);
  a.tolerances["speed_root"] = FrontGeometry::kSpeedTolerance;
  a.tolerances["convexity_midpoint"] = 1e-6;
  return a;
}

Artifact cmd_cone(const RunConfig& c) {
  const ConeGeometry cone(require(c.angle, "angle"));
  Artifact a;
  a.results["a"] = cone.a();
  if (c.params.D_tilde) {
    // Unequal diffusivities: bounds only.
    Table t{{"theta_rad", "lower", "upper"}, {}};
    UnequalBoundsOptions opt;
    for (int k = 0; k < c.n; ++k) {
      const double th = cone.far_road_theta() + 2.0 * cone.a() * k / std::max(1, c.n - 1);
      const SpeedBounds b = unequal_diffusion_speed_bounds(std::min(th, kHalfPi), cone, c.params, opt);
      t.rows.push_back({th, b.lower, b.upper});
    }
    a.table = std::move(t);
    a.tolerances["speed_root"] = FrontGeometry::kSpeedTolerance;
    return a;
  }
  const ConeWulffShape w = cone_wulff(cone, c.params, c.n);
  a.results["theta_star"] = w.theta_star;
  a.results["road_speed"] = w.road_speed;
  a.results["convex"] = w.convex;
  a.results["supporting_line_convex"] = w.supporting_line_convex;
  a.results["convexity_threshold_D"] = convexity_threshold_D(cone, c.params);
  if (!w.consistent()) {
    a.results["error"] = "convexity criteria disagree";
    a.exit_code = kConsistencyFailure;
  }
  Table t{{"theta_rad", "speed", "x", "y", "branch"}, {}};
  for (const auto& s : w.samples) t.rows.push_back({s.theta, s.speed, s.x(), s.y(), double(s.branch)});
  a.table = std::move(t);
  a.tolerances["speed_root"] = FrontGeometry::kSpeedTolerance;
  a.tolerances["angle"] = 1e-6;
  return a;
}

Artifact cmd_path(const RunConfig& c) {
  const ValueFunction vf(c.params);
  double t = c.t.value_or(1.0), x = 0.0, y = 0.0;
  if (c.theta) {
    // Boundary point of t W in direction theta.
    const double sp = FrontGeometry(c.params).directional_speed(*c.theta);
    x = t * sp * std::sin(*c.theta);
    y = std::max(0.0, t * sp * std::cos(*c.theta));
  } else {
    x = require(c.x, "x");
    y = require(c.y, "y");
  }
  const LaxOleinikSolution s = vf.solve(t, x, y);
  Artifact a;
  a.results = solution_json(s);
  Table tab{{"s", "x", "y", "J"}, {}};
  for (const auto& p : ValueFunction::path_of(s, std::max(2, c.n))) {
    const double J = p.s > 0.0 ? vf.value(p.s, p.position.x, std::max(0.0, p.position.y)) : 0.0;
    tab.rows.push_back({p.s, p.position.x, p.position.y, J});
  }
  a.table = std::move(tab);
  a.tolerances["argument"] = 1e-11;
  return a;
}

Artifact cmd_simulate(const RunConfig& c) {
  SimulationConfig sc;
  sc.h = c.h;
  sc.Lx = c.Lx;
  sc.Ly = c.Ly;
  sc.t_max = c.t_max;
  sc.level = c.level;
  sc.cone_a = c.angle;
  if (c.theta) {
    sc.thetas = {*c.theta};
  } else if (c.angle) {
    sc.thetas = {kHalfPi - 2.0 * *c.angle, kHalfPi - *c.angle, kHalfPi};
  } else {
    sc.thetas = {0.0, std::numbers::pi / 4.0, kHalfPi};
  }
  const SimulationResult r = run_simulation(c.params, sc);
  if (!c.snapshot.empty()) write_snapshot(r.final_state, c.snapshot);
  Artifact a;
  json speeds = json::array();
  const bool with_prediction = !c.params.D_tilde && !c.angle;
  std::optional<FrontGeometry> fg;
  if (with_prediction && c.params.kappa > 0.0) fg.emplace(c.params);
  for (std::size_t k = 0; k < sc.thetas.size(); ++k) {
    json e{{"theta", sc.thetas[k]},
           {"speed", r.speeds[k].speed},
           {"intercept", r.speeds[k].intercept},
           {"residual_rms", r.speeds[k].residual_rms},
           {"points", r.speeds[k].points}};
    if (fg) e["predicted"] = fg->directional_speed(sc.thetas[k]);
    speeds.push_back(e);
  }
  a.results["speeds"] = speeds;
  a.results["steps"] = r.steps;
  a.results["dt"] = r.final_state.dt;
  a.results["bounds_respected"] = r.bounds_respected;
  a.results["V_range"] = {r.min_V, r.max_V};
  a.results["U_range"] = {r.min_U, r.max_U};
  Table t{{"t", "theta", "radius"}, {}};
  for (const auto& fp : r.history) t.rows.push_back({fp.t, fp.theta, fp.radius});
  a.table = std::move(t);
  a.table_key = "front_history";
  a.tolerances["bounds"] = 1e-12;
  if (!r.bounds_respected) a.exit_code = kConsistencyFailure;
  return a;
}

Artifact cmd_verify(const RunConfig& c) {
  VerifyOptions vo;
  vo.params = c.params;
  vo.quick = c.quick;
  vo.inject_hr_fault = c.inject_fault;
  const VerifyReport rep = run_verify(vo);
  Artifact a;
  json checks = json::array();
  for (const auto& ch : rep.checks) {
    checks.push_back(json{{"name", ch.name},
                          {"group", ch.group},
                          {"basis", ch.basis},
                          {"passed", ch.passed},
                          {"measured", ch.measured},
                          {"reference", ch.reference},
                          {"tolerance", ch.tolerance},
                          {"seconds", ch.seconds},
                          {"detail", ch.detail}});
    a.tolerances[ch.name] = ch.tolerance;
  }
  a.results["checks"] = checks;
  a.results["passed"] = rep.passed();
  a.results["failed"] = rep.failed_names();
  Table t{{"passed", "measured", "reference", "tolerance", "seconds"}, {}};
  for (const auto& ch : rep.checks) {
    t.rows.push_back({ch.passed ? 1.0 : 0.0, ch.measured, ch.reference, ch.tolerance, ch.seconds});
  }
  a.table = std::move(t);
  a.table_key = "";
  if (!rep.passed()) a.exit_code = kConsistencyFailure;
  return a;
}

void emit(const RunConfig& c, const Artifact& a, std::ostream& out) {
  std::ofstream file;
  std::ostream* os = &out;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) throw InvalidConfig("cannot open output file: " + c.output);
    os = &file;
  }
  if (c.format == "csv") {
    if (c.command == "verify") {
      // Names are strings; write them alongside the numeric columns.
      *os << "name,passed,measured,reference,tolerance,seconds\n" << std::setprecision(17);
      for (const auto& ch : a.results["checks"]) {
        *os << ch["name"].get<std::string>() << ',' << (ch["passed"].get<bool>() ? 1 : 0) << ','
            << ch["measured"].get<double>() << ',' << ch["reference"].get<double>() << ','
            << ch["tolerance"].get<double>() << ',' << ch["seconds"].get<double>() << '\n';
      }
    } else if (a.table) {
      a.table->write_csv(*os);
    } else {
      *os << "key,value\n" << std::setprecision(17);
      for (const auto& [k, v] : a.results.items()) {
        if (v.is_number() || v.is_boolean()) *os << k << ',' << v.dump() << '\n';
      }
    }
    return;
  }
  json doc;
  doc["command"] = c.command;
  doc["params"] = params_json(c.params);
  doc["options"] = options_json(c);
  doc["results"] = a.results;
  if (a.table && !a.table_key.empty()) doc["results"][a.table_key] = a.table->to_json();
  doc["tolerances"] = a.tolerances;
  *os << doc.dump(2) << '\n';
}

// Fill options absent from the command line with values from a JSON config.
// Accepts flat keys or a previously emitted document.
void apply_config(const json& doc, RunConfig& c, const CLI::App& app) {
  auto given = [&](const std::string& flag) { return app.count("--" + flag) > 0; };
  json flat = json::object();
  if (doc.contains("params") && doc["params"].is_object()) flat.update(doc["params"]);
  if (doc.contains("options") && doc["options"].is_object()) flat.update(doc["options"]);
  for (const auto& [k, v] : doc.items()) {
    if (k != "params" && k != "options" && k != "results" && k != "tolerances") flat[k] = v;
  }
  auto num = [&](const char* key, const char* flag, auto setter) {
    if (!flat.contains(key) || flat[key].is_null() || given(flag)) return;
    if (!flat[key].is_number()) throw InvalidConfig(std::string("config key '") + key + "' must be a number");
    setter(flat[key].get<double>());
  };
  if (flat.contains("command") && c.command.empty()) c.command = flat["command"].get<std::string>();
  num("D", "D", [&](double v) { c.params.D = v; });
  num("mu", "mu", [&](double v) { c.params.mu = v; });
  num("nu", "nu", [&](double v) { c.params.nu = v; });
  num("kappa", "kappa", [&](double v) { c.params.kappa = v; });
  num("D_tilde", "Dtilde", [&](double v) { c.params.D_tilde = v; });
  num("Dtilde", "Dtilde", [&](double v) { c.params.D_tilde = v; });
  num("angle", "angle", [&](double v) { c.angle = v; });
  num("theta", "theta", [&](double v) { c.theta = v; });
  num("t", "t", [&](double v) { c.t = v; });
  num("x", "x", [&](double v) { c.x = v; });
  num("y", "y", [&](double v) { c.y = v; });
  num("q", "q", [&](double v) { c.q = v; });
  num("v", "v", [&](double v) { c.v = v; });
  num("n", "n", [&](double v) {
    if (v != std::floor(v)) throw InvalidConfig("n must be an integer");
    c.n = static_cast<int>(v);
  });
  num("h", "h", [&](double v) { c.h = v; });
  num("Lx", "Lx", [&](double v) { c.Lx = v; });
  num("Ly", "Ly", [&](double v) { c.Ly = v; });
  num("tmax", "tmax", [&](double v) { c.t_max = v; });
  num("level", "level", [&](double v) { c.level = v; });
  if (flat.contains("format") && flat["format"].is_string() && !given("format")) {
    c.format = flat["format"].get<std::string>();
  }
  if (flat.contains("output") && flat["output"].is_string() && !given("output")) {
    c.output = flat["output"].get<std::string>();
  }
  if (flat.contains("quick") && flat["quick"].is_boolean() && !given("quick")) c.quick = flat["quick"].get<bool>();
}

}  // namespace

void RunConfig::validate() const {
  const auto& cmds = commands();
  if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
    throw InvalidConfig("unknown command '" + command + "'");
  }
  if (format != "json" && format != "csv") throw InvalidConfig("format must be json or csv");
  // The simulator alone accepts a decoupled road.
  params.validate(command == "simulate");
  if (n < 2) throw InvalidConfig("n must be at least 2");
  if (command == "wulff" && n < 8) throw InvalidConfig("wulff needs n >= 8");
  if (command == "cone" && n < 16 && !params.D_tilde) throw InvalidConfig("cone needs n >= 16");
  if (params.D_tilde && command != "cone" && command != "simulate") {
    throw InvalidConfig("--Dtilde applies only to cone and simulate");
  }
  if (params.D_tilde && command == "simulate" && !angle) {
    throw InvalidConfig("--Dtilde requires --angle for simulate");
  }
  if (t && !(*t > 0.0)) throw InvalidConfig("t must be positive");
  if (!(h > 0.0) || !(Lx > 0.0) || !(Ly > 0.0) || !(t_max > 0.0)) {
    throw InvalidConfig("h, Lx, Ly and tmax must be positive");
  }
  if (!(level > 0.0 && level < 1.0)) throw InvalidConfig("level must lie in (0, 1)");
}

RunConfig parse_args(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Front propagation for the road-field model"};
  app.set_help_flag();  // help handled below so parse errors map to exit 2
  bool help = false;
  app.add_flag("--help", help, "Show usage");
  std::string config_path;
  double dtilde = std::nan("");
  app.add_option("command", c.command, "hamiltonian|legendre|value|speed|wulff|cone|path|simulate|verify");
  app.add_option("--D", c.params.D, "Road diffusivity (> 1)");
  app.add_option("--mu", c.params.mu, "Road-to-field exchange rate");
  app.add_option("--nu", c.params.nu, "Field-to-road exchange rate");
  app.add_option("--kappa", c.params.kappa, "Boundary exchange coefficient");
  app.add_option("--Dtilde", dtilde, "Diffusivity of the second cone road");
  app.add_option("--angle", c.angle, "Cone half-angle a in (0, pi/2]");
  app.add_option("--theta", c.theta, "Direction from the y-axis (rad)");
  app.add_option("--n", c.n, "Sample count");
  app.add_option("--t", c.t, "Time for point queries");
  app.add_option("--x", c.x, "Abscissa for point queries");
  app.add_option("--y", c.y, "Height for point queries");
  app.add_option("--q", c.q, "Momentum for hamiltonian");
  app.add_option("--v", c.v, "Velocity for legendre");
  app.add_option("--h", c.h, "Grid spacing");
  app.add_option("--Lx", c.Lx, "Domain half-width");
  app.add_option("--Ly", c.Ly, "Domain height");
  app.add_option("--tmax", c.t_max, "Simulated time");
  app.add_option("--level", c.level, "Front level in (0, 1)");
  app.add_option("--snapshot", c.snapshot, "Write the final simulation state (RDF1)");
  app.add_option("--output", c.output, "Output path (default: stdout)");
  app.add_option("--format", c.format, "json or csv");
  app.add_option("--config", config_path, "JSON file with option values");
  app.add_flag("--quick", c.quick, "verify: skip simulation-backed checks");
  app.add_flag("--inject-fault", c.inject_fault, "verify: perturb H_r inside the duality checks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    throw InvalidConfig(std::string("bad arguments: ") + e.what());
  }
  if (help) {
    c.command = "help";
    c.output = app.help();
    return c;
  }
  if (!std::isnan(dtilde)) c.params.D_tilde = dtilde;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw InvalidConfig("cannot open config file: " + config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidConfig("config must be a JSON object");
    try {
      apply_config(doc, c, app);
    } catch (const json::exception& e) {
      throw InvalidConfig(std::string("bad config value: ") + e.what());
    }
  }
  if (c.command.empty()) throw InvalidConfig("missing command");
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto report = [&](const char* code, const std::string& msg) {
    err << "error code=" << code << ": " << msg << '\n';
  };
  try {
    config.validate();
    Artifact a;
    const std::string& cmd = config.command;
    if (cmd == "hamiltonian") a = cmd_hamiltonian(config);
    else if (cmd == "legendre") a = cmd_legendre(config);
    else if (cmd == "value") a = cmd_value(config);
    else if (cmd == "speed") a = cmd_speed(config);
    else if (cmd == "wulff") a = cmd_wulff(config);
    else if (cmd == "cone") a = cmd_cone(config);
    else if (cmd == "path") a = cmd_path(config);
    else if (cmd == "simulate") a = cmd_simulate(config);
    else a = cmd_verify(config);
    emit(config, a, out);
    if (a.exit_code == kConsistencyFailure) {
      report("consistency_failure", cmd + " reported failed checks");
    }
    return a.exit_code;
  } catch (const InvalidConfig& e) {
    report("invalid_config", e.what());
    return kInvalidConfig;
  } catch (const ConsistencyError& e) {
    report("consistency_failure", e.what());
    return kConsistencyFailure;
  } catch (const FrontGuardError& e) {
    report("front_guard", e.what());
    return kConsistencyFailure;
  } catch (const std::exception& e) {
    report("internal", e.what());
    return kConsistencyFailure;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  try {
    c = parse_args(argc, argv);
  } catch (const InvalidConfig& e) {
    err << "error code=invalid_config: " << e.what() << '\n';
    return kInvalidConfig;
  }
  if (c.command == "help") {
    out << c.output;
    return kOk;
  }
  return run(c, out, err);
}

}  // namespace roadfield::cli
