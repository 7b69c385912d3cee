#include "fastconv/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "fastconv/abel.hpp"
#include "fastconv/engine.hpp"
#include "fastconv/error.hpp"
#include "fastconv/fracrd.hpp"
#include "fastconv/oracle.hpp"
#include "fastconv/trajectory.hpp"
#include "fastconv/visco.hpp"

namespace fastconv {

using nlohmann::json;

std::vector<double> random_grid(int steps, double T, std::uint64_t seed) {
  if (steps < 1 || !(T > 0.0)) throw ConfigError("grid: need steps >= 1 and T > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(steps));
  double total = 0.0;
  for (double& x : w) total += (x = 0.2 + unit(rng));
  std::vector<double> grid{0.0};
  for (double x : w) grid.push_back(grid.back() + T * x / total);
  grid.back() = T;
  return grid;
}

std::vector<double> uniform_grid(int steps, double T) {
  if (steps < 1 || !(T > 0.0)) throw ConfigError("grid: need steps >= 1 and T > 0");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid[i] = T * i / steps;
  return grid;
}

std::function<double(double)> sample_function(const std::string& name) {
  if (name == "sin") return [](double t) { return std::sin(t); };
  if (name == "cos") return [](double t) { return std::cos(t); };
  if (name == "one") return [](double) { return 1.0; };
  if (name == "linear") return [](double t) { return t; };
  throw ConfigError("unknown sample function '" + name + "'");
}

Trajectory complexity_sweep(const SectorialTransform& F, const ContourConstants& contour, int B, double T,
                            double h_min, int halvings, const std::function<double(double)>& g, std::uint64_t seed) {
  Trajectory out;
  out.columns = {"h_min",           "L",       "steps",        "F_evaluations", "F_bound", "stored_vectors_peak",
                 "g_reads_step_max", "g_bound", "ode_advances", "direct_steps"};
  for (int k = 0; k <= halvings; ++k) {
    const double h = h_min / std::ldexp(1.0, k);
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> unit(1.0, 2.0);
    std::vector<double> grid{0.0};
    while (grid.back() + 2.0 * h < T) grid.push_back(grid.back() + h * unit(rng));
    grid.push_back(T);
    FastConvolution engine(F, EngineConfig{h, B, T, contour, true}, 1);
    engine.start(Eigen::VectorXd::Constant(1, g(0.0)));
    for (std::size_t n = 1; n < grid.size(); ++n) engine.evaluate(grid[n], Eigen::VectorXd::Constant(1, g(grid[n])));
    const Counters& c = engine.counters();
    const double L = engine.levels();
    out.add({h, L, static_cast<double>(grid.size() - 1), static_cast<double>(c.F_evaluations),
             3.0 * (2 * contour.K + 1) * L, static_cast<double>(c.stored_vectors_peak),
             static_cast<double>(c.g_reads_step_max), 2.0 * L + 3.0, static_cast<double>(c.ode_advances),
             static_cast<double>(c.direct_steps)});
    out.counters = c;
  }
  return out;
}

SectorialTransform kernel_by_name(const std::string& name, double alpha) {
  if (name == "power") return power_kernel(alpha);
  if (name == "mittag-leffler") return mittag_leffler_kernel(alpha);
  throw ConfigError("unknown kernel '" + name + "'");
}

namespace {

json contour_json(const ContourConstants& c) {
  return {{"a", c.a}, {"d", c.d}, {"K", c.K}, {"C1", c.C1}, {"C2", c.C2}};
}

ContourConstants contour_from(const json& j) {
  if (j.is_string()) return contour_preset(j.get<std::string>());
  ContourConstants c;
  c.a = j.at("a").get<double>();
  c.d = j.value("d", c.d);
  c.K = j.at("K").get<int>();
  c.C1 = j.at("C1").get<double>();
  c.C2 = j.at("C2").get<double>();
  if (c.K < 1) throw ConfigError("contour: K must be positive");
  return c;
}

const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> t;
    const json grid{{"kind", "random"}, {"steps", 200}, {"seed", 42}};
    t["invert"] = {{"experiment", "invert"}, {"kernel", "power"},      {"alpha", 0.5},
                   {"contour", contour_json(contour_preset("fracrd"))}, {"B", 5},
                   {"h_min", 0.01},        {"level", 1},              {"samples", 20}};
    t["convolve"] = {{"experiment", "convolve"}, {"kernel", "power"}, {"alpha", 0.5},
                     {"contour", contour_json(contour_preset("fracrd"))},
                     {"B", 5},  {"T", 5.0}, {"g", "sin"}, {"grid", grid}};
    t["oracle-compare"] = t["convolve"];
    t["oracle-compare"]["experiment"] = "oracle-compare";
    t["complexity-sweep"] = {{"experiment", "complexity-sweep"},
                             {"kernel", "power"},
                             {"alpha", 0.5},
                             {"contour", contour_json(contour_preset("fracrd"))},
                             {"B", 5},
                             {"T", 1.0},
                             {"h_min", 1e-3},
                             {"halvings", 5},
                             {"g", "sin"},
                             {"seed", 7}};
    t["abel"] = {{"experiment", "abel"}, {"gamma", -2.5}, {"sigma_exp", 1.0}, {"tol", 1e-7},
                 {"T", 0.5},             {"h0", 1e-5},    {"h_min", 1e-11},   {"blowup_threshold", 100.0},
                 {"max_steps", 100000},  {"B", 5},        {"contour", contour_json(contour_preset("abel"))}};
    t["abel-convergence"] = t["abel"];
    t["abel-convergence"]["gamma"] = -2.0;
    t["abel-convergence"]["T"] = 10.0;
    t["abel-convergence"]["max_steps"] = 0;
    t["fracrd"] = {{"experiment", "fracrd"}, {"alpha", 0.5}, {"K_diff", 0.5}, {"k1", 1.0}, {"k2", 2.0},
                   {"k3", 3.0},  {"M_nodes", 50}, {"x_lo", -5.0}, {"x_hi", 5.0}, {"T", 30.0},
                   {"tol", 1e-4}, {"h0", 1e-5}, {"h_min", 1e-7}, {"B", 5},
                   {"contour", contour_json(contour_preset("fracrd"))}};
    t["visco"] = {{"experiment", "visco"},
                  {"alpha", 0.5},
                  {"gamma", 0.3},
                  {"tol", 1e-4},
                  {"T", 6.0},
                  {"h_min", 1e-9},
                  {"B", 5},
                  {"max_steps", 0},
                  {"load", "boundary"},
                  {"mesh", {{"nx", 8}, {"ny", 2}, {"Lx", 4.0}, {"Ly", 1.0}, {"E", 200.0}, {"nu_p", 0.3}, {"rho", 1.0}}},
                  {"contour", contour_json(contour_preset("visco"))}};
    return t;
  }();
  return table;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "preset", "kernel", "alpha",    "contour",   "B",         "h_min",  "tol",     "T",
      "out",        "level",  "samples", "t_lo",    "t_hi",      "g",         "grid",   "halvings", "seed",
      "gamma",      "sigma_exp", "h0",   "blowup_threshold", "max_steps", "K_diff", "k1", "k2",   "k3",
      "M_nodes",    "x_lo",   "x_hi",   "mesh",     "matrices",  "load"};
  return keys;
}

struct Outcome {
  Trajectory traj;
  json counters = json::object();
  json summary = json::object();
};

std::vector<double> grid_from(const RunConfig& cfg) {
  const json& g = cfg.params.at("grid");
  const std::string kind = g.value("kind", "random");
  const int steps = g.at("steps").get<int>();
  if (kind == "random") return random_grid(steps, cfg.T, g.value("seed", std::uint64_t{42}));
  if (kind == "uniform") return uniform_grid(steps, cfg.T);
  throw ConfigError("grid: unknown kind '" + kind + "'");
}

double smallest_step(const std::vector<double>& grid) {
  double h = grid[1] - grid[0];
  for (std::size_t i = 2; i < grid.size(); ++i) h = std::min(h, grid[i] - grid[i - 1]);
  return h;
}

Outcome run_invert(const RunConfig& cfg) {
  const SectorialTransform F = kernel_by_name(cfg.kernel, cfg.alpha);
  const int level = cfg.params.value("level", 1);
  const int samples = cfg.params.value("samples", 20);
  LevelPlan plan = plan_level(level, cfg.h_min, cfg.B, cfg.contour, F.sigma);
  if (cfg.params.contains("t_lo") || cfg.params.contains("t_hi"))
    plan = plan_interval(cfg.params.value("t_lo", plan.t_lo), cfg.params.value("t_hi", plan.t_hi), cfg.contour,
                         F.sigma);
  if (samples < 2) throw ConfigError("invert: samples must be at least 2");
  const Contour c(plan, cfg.contour, F);

  Outcome out;
  out.traj.columns = {"t", "h", "f", "f1", "f2"};
  if (F.closed_f) out.traj.columns.insert(out.traj.columns.end(), {"f_exact", "rel_err"});
  double worst = 0.0;
  double prev = plan.t_lo;
  for (int i = 0; i < samples; ++i) {
    const double t = plan.t_lo * std::pow(plan.t_hi / plan.t_lo, static_cast<double>(i) / (samples - 1));
    std::vector<double> row{t, t - prev, c.invert(Transform::F, t), c.invert(Transform::F1, t),
                            c.invert(Transform::F2, t)};
    if (F.closed_f) {
      const double exact = F.closed_f(t);
      const double err = std::abs(row[2] - exact) / std::abs(exact);
      worst = std::max(worst, err);
      row.insert(row.end(), {exact, err});
    }
    out.traj.add(std::move(row));
    prev = t;
  }
  out.counters = {{"F_evaluations", c.evaluations()}};
  out.summary = {{"t_lo", plan.t_lo}, {"t_hi", plan.t_hi}, {"K", cfg.contour.K}};
  if (F.closed_f) out.summary["max_rel_err"] = worst;
  return out;
}

Outcome run_convolve(const RunConfig& cfg, bool with_oracle) {
  const SectorialTransform F = kernel_by_name(cfg.kernel, cfg.alpha);
  const std::vector<double> grid = grid_from(cfg);
  const auto g = sample_function(cfg.params.value("g", std::string("sin")));
  EngineConfig ec{cfg.h_min > 0.0 ? cfg.h_min : smallest_step(grid), cfg.B, cfg.T, cfg.contour, true};
  FastConvolution engine(F, ec, 1);

  std::vector<double> samples(grid.size());
  std::transform(grid.begin(), grid.end(), samples.begin(), g);
  std::vector<double> ref;
  if (with_oracle) ref = oracle_convolve(F, grid, samples);

  Outcome out;
  out.traj.columns = {"t", "h", "u"};
  if (with_oracle) out.traj.columns.insert(out.traj.columns.end(), {"oracle", "deviation"});
  engine.start(Eigen::VectorXd::Constant(1, samples[0]));
  out.traj.add(with_oracle ? std::vector<double>{0.0, 0.0, 0.0, 0.0, 0.0} : std::vector<double>{0.0, 0.0, 0.0});
  double dev = 0.0;
  double scale = 0.0;
  for (std::size_t n = 1; n < grid.size(); ++n) {
    const double u = engine.evaluate(grid[n], Eigen::VectorXd::Constant(1, samples[n]))[0];
    if (with_oracle) {
      dev = std::max(dev, std::abs(u - ref[n]));
      scale = std::max(scale, std::abs(ref[n]));
      out.traj.add({grid[n], grid[n] - grid[n - 1], u, ref[n], u - ref[n]});
    } else {
      out.traj.add({grid[n], grid[n] - grid[n - 1], u});
    }
  }
  out.traj.counters = engine.counters();
  out.counters = json::parse(engine.counters().to_json());
  out.summary = {{"steps", grid.size() - 1}, {"levels", engine.levels()}, {"h_min", ec.h_min}};
  if (with_oracle) {
    out.summary["max_abs_deviation"] = dev;
    out.summary["max_rel_deviation"] = scale > 0.0 ? dev / scale : dev;
  }
  return out;
}

Outcome run_sweep(const RunConfig& cfg) {
  const int halvings = cfg.params.value("halvings", 5);
  if (halvings < 0) throw ConfigError("complexity-sweep: halvings must be non-negative");
  Outcome out;
  out.traj = complexity_sweep(kernel_by_name(cfg.kernel, cfg.alpha), cfg.contour, cfg.B, cfg.T, cfg.h_min, halvings,
                              sample_function(cfg.params.value("g", std::string("sin"))),
                              cfg.params.value("seed", std::uint64_t{7}));
  out.counters = json::array();
  for (const auto& row : out.traj.rows) {
    json c = json::object();
    for (std::size_t i = 0; i < out.traj.columns.size(); ++i) c[out.traj.columns[i]] = row[i];
    out.counters.push_back(c);
  }
  out.summary = {{"runs", halvings + 1}};
  return out;
}

Outcome run_abel(const RunConfig& cfg) {
  AbelProblem p;
  p.gamma = cfg.params.value("gamma", p.gamma);
  p.sigma_exp = cfg.params.value("sigma_exp", p.sigma_exp);
  p.tol = cfg.tol;
  p.t_end = cfg.T;
  p.h0 = cfg.params.value("h0", p.h0);
  p.h_min = cfg.h_min > 0.0 ? cfg.h_min : p.h_min;
  p.blowup_threshold = cfg.params.value("blowup_threshold", p.blowup_threshold);
  p.max_steps = cfg.params.value("max_steps", std::size_t{0});
  p.contour = cfg.contour;
  p.B = cfg.B;

  Outcome out;
  out.traj = abel_solve(p);
  const auto h = out.traj.column("h");
  const auto [lo, hi] = std::minmax_element(h.begin() + 1, h.end());
  out.summary = {{"steps", out.traj.size() - 1},
                 {"t_final", out.traj.rows.back()[0]},
                 {"abs_final", out.traj.column("abs").back()},
                 {"h_accepted_min", h.size() > 1 ? *lo : 0.0},
                 {"h_accepted_max", h.size() > 1 ? *hi : 0.0}};
  return out;
}

Outcome run_fracrd(const RunConfig& cfg) {
  FracRDProblem p;
  p.alpha = cfg.alpha;
  p.K_diff = cfg.params.value("K_diff", p.K_diff);
  p.k1 = cfg.params.value("k1", p.k1);
  p.k2 = cfg.params.value("k2", p.k2);
  p.k3 = cfg.params.value("k3", p.k3);
  p.M_nodes = cfg.params.value("M_nodes", p.M_nodes);
  p.x_lo = cfg.params.value("x_lo", p.x_lo);
  p.x_hi = cfg.params.value("x_hi", p.x_hi);
  p.T = cfg.T;
  p.tol = cfg.tol;
  p.h0 = cfg.params.value("h0", p.h0);
  p.h_min = cfg.h_min > 0.0 ? cfg.h_min : p.h_min;
  p.contour = cfg.contour;
  p.B = cfg.B;

  Outcome out;
  out.traj = fracrd_solve(p);
  const auto cons = out.traj.column("conserved");
  double drift = 0.0;
  for (double c : cons) drift = std::max(drift, std::abs(c - cons.front()));
  out.summary = {{"steps", out.traj.size() - 1},
                 {"t_final", out.traj.rows.back()[0]},
                 {"conserved_initial", cons.front()},
                 {"conserved_max_rel_drift", drift / std::abs(cons.front())}};
  return out;
}

ElasticModel visco_model(const json& params) {
  if (params.contains("matrices")) {
    const json& m = params.at("matrices");
    ElasticModel md;
    md.M = read_coordinate_matrix(m.at("M").get<std::string>());
    md.A = read_coordinate_matrix(m.at("A").get<std::string>());
    md.load = m.contains("load") ? read_vector(m.at("load").get<std::string>())
                                 : Eigen::VectorXd::Zero(md.M.rows());
    md.probe_x = m.value("probe_x", Eigen::Index{0});
    md.probe_y = m.value("probe_y", Eigen::Index{1});
    if (md.M.rows() != md.A.rows() || md.load.size() != md.M.rows() || md.probe_x >= md.M.rows() ||
        md.probe_y >= md.M.rows())
      throw ConfigError("visco: inconsistent matrix sizes or probe indices");
    return md;
  }
  const json& m = params.at("mesh");
  return assemble_cantilever(m.at("nx").get<int>(), m.at("ny").get<int>(), m.at("E").get<double>(),
                             m.at("nu_p").get<double>(), m.at("rho").get<double>(), m.value("Lx", 4.0),
                             m.value("Ly", 1.0));
}

Outcome run_visco(const RunConfig& cfg) {
  ViscoProblem p;
  p.model = visco_model(cfg.params);
  p.alpha = cfg.alpha;
  p.gamma = cfg.params.value("gamma", p.gamma);
  p.eps = cfg.tol;
  p.t_end = cfg.T;
  p.h_min = cfg.h_min > 0.0 ? cfg.h_min : p.h_min;
  p.max_steps = cfg.params.value("max_steps", std::size_t{0});
  p.contour = cfg.contour;
  p.B = cfg.B;
  const std::string load = cfg.params.value("load", std::string("boundary"));
  if (load == "none")
    p.amplitude = [](double) { return 0.0; };
  else if (load != "boundary")
    throw ConfigError("visco: load must be 'boundary' or 'none'");
  if (cfg.params.contains("matrices") && cfg.params.at("matrices").contains("u0"))
    p.u0 = read_vector(cfg.params.at("matrices").at("u0").get<std::string>());

  Outcome out;
  out.traj = visco_solve(p);
  const auto e = out.traj.column("energy");
  out.summary = {{"steps", out.traj.size() - 1},
                 {"t_final", out.traj.rows.back()[0]},
                 {"energy_initial", e.front()},
                 {"energy_final", e.back()}};
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  os << text << '\n';
}

}  // namespace

json RunConfig::to_json() const {
  json j = params;
  j["experiment"] = experiment;
  j["preset"] = preset;
  j["kernel"] = kernel;
  j["alpha"] = alpha;
  j["contour"] = contour_json(contour);
  j["B"] = B;
  j["h_min"] = h_min;
  j["tol"] = tol;
  j["T"] = T;
  j["out"] = out.string();
  return j;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"invert", "convolve", "abel", "fracrd", "visco", "oracle-compare",
                                              "complexity-sweep"};
  return names;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : presets()) n.push_back(k);
    return n;
  }();
  return names;
}

json preset_document(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw ConfigError("unknown preset '" + name + "'");
  return it->second;
}

RunConfig make_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : doc.items())
    if (!known_keys().contains(k)) throw ConfigError("unknown config key '" + k + "'");

  std::string experiment = doc.value("experiment", std::string());
  std::string preset = doc.value("preset", std::string());
  if (preset.empty()) preset = experiment;
  if (preset.empty()) throw ConfigError("config needs an experiment or a preset");
  json merged = preset_document(preset);
  if (experiment.empty()) experiment = merged.at("experiment").get<std::string>();
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end())
    throw ConfigError("unknown experiment '" + experiment + "'");

  // A contour given as a preset name replaces the object instead of patching it.
  json patch = doc;
  if (patch.contains("contour") && patch["contour"].is_string())
    patch["contour"] = contour_json(contour_preset(patch["contour"].get<std::string>()));
  merged.merge_patch(patch);

  try {
    RunConfig cfg;
    cfg.experiment = experiment;
    cfg.preset = preset;
    cfg.kernel = merged.value("kernel", cfg.kernel);
    cfg.alpha = merged.value("alpha", cfg.alpha);
    if (merged.contains("contour")) cfg.contour = contour_from(merged.at("contour"));
    cfg.B = merged.value("B", cfg.B);
    cfg.h_min = merged.value("h_min", cfg.h_min);
    cfg.tol = merged.value("tol", cfg.tol);
    cfg.T = merged.value("T", cfg.T);
    cfg.out = merged.value("out", std::string("out"));
    for (const char* k : {"experiment", "preset", "kernel", "alpha", "contour", "B", "h_min", "tol", "T", "out"})
      merged.erase(k);
    cfg.params = std::move(merged);

    if (cfg.B < 2) throw ConfigError("B must be at least 2");
    if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.h_min < 0.0) throw ConfigError("h_min must be non-negative");
    if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (cfg.experiment == "invert" && !(cfg.h_min > 0.0)) throw ConfigError("invert: h_min must be positive");
    if (cfg.experiment == "complexity-sweep" && !(cfg.h_min > 0.0))
      throw ConfigError("complexity-sweep: h_min must be positive");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunReport run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  RunReport report;
  json failure;
  try {
    if (cfg.experiment == "invert")
      out = run_invert(cfg);
    else if (cfg.experiment == "convolve")
      out = run_convolve(cfg, false);
    else if (cfg.experiment == "oracle-compare")
      out = run_convolve(cfg, true);
    else if (cfg.experiment == "complexity-sweep")
      out = run_sweep(cfg);
    else if (cfg.experiment == "abel")
      out = run_abel(cfg);
    else if (cfg.experiment == "fracrd")
      out = run_fracrd(cfg);
    else if (cfg.experiment == "visco")
      out = run_visco(cfg);
    else
      throw ConfigError("unknown experiment '" + cfg.experiment + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    failure = {{"error", e.what()}};
  }

  std::string status = "completed";
  if (!failure.is_null()) {
    status = "failed";
    report.exit_code = kExitNumerical;
  } else {
    if (out.counters.empty()) out.counters = json::parse(out.traj.counters.to_json());
    status = out.traj.status;
    if (!out.traj.ok()) {
      report.exit_code = kExitNumerical;
      failure = {{"error", out.traj.message}};
      if (!out.traj.rows.empty()) {
        json last = json::object();
        for (std::size_t i = 0; i < out.traj.columns.size(); ++i)
          last[out.traj.columns[i]] = out.traj.rows.back()[i];
        failure["last_row"] = last;
      }
    }
  }

  std::filesystem::create_directories(cfg.out);
  const auto csv = cfg.out / "trajectory.csv";
  const auto counters = cfg.out / "counters.json";
  const auto manifest = cfg.out / "manifest.json";
  {
    std::ofstream os(csv);
    if (!os) throw ConfigError("cannot write " + csv.string());
    out.traj.write_csv(os);
  }
  write_text(counters, out.counters.dump(2));

  report.manifest = {{"experiment", cfg.experiment},
                     {"preset", cfg.preset},
                     {"config", cfg.to_json()},
                     {"status", status},
                     {"exit_code", report.exit_code},
                     {"rows", out.traj.size()},
                     {"columns", out.traj.columns},
                     {"summary", out.summary},
                     {"files", {{"trajectory", csv.string()}, {"counters", counters.string()}}},
                     {"wall_seconds",
                      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
  if (!failure.is_null()) report.manifest["failure"] = failure;
  write_text(manifest, report.manifest.dump(2));
  return report;
}

}  // namespace fastconv
