#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fastconv/contour.hpp"
#include "fastconv/kernels.hpp"
#include "fastconv/trajectory.hpp"

namespace fastconv {

/// 0 = t_0 < ... < t_steps = T with steps drawn proportional to 0.2 + U(0, 1).
std::vector<double> random_grid(int steps, double T, std::uint64_t seed);
std::vector<double> uniform_grid(int steps, double T);

/// "sin", "cos", "one", "linear" (g(t) = t).
std::function<double(double)> sample_function(const std::string& name);

/// "power" (F = s^-alpha) or "mittag-leffler" (F = 1/(1 + s^alpha)).
SectorialTransform kernel_by_name(const std::string& name, double alpha);

/// Convolves g on random grids with steps in [h, 2h] for h = h_min, h_min/2, ... (halvings + 1 runs)
/// at fixed T. One row per run: h_min, L, steps, F_evaluations, F_bound, stored_vectors_peak,
/// g_reads_step_max, g_bound, ode_advances, direct_steps.
Trajectory complexity_sweep(const SectorialTransform& F, const ContourConstants& contour, int B, double T,
                            double h_min, int halvings, const std::function<double(double)>& g, std::uint64_t seed);

struct RunConfig {
  std::string experiment;
  std::string preset;
  std::string kernel = "power";
  double alpha = 0.5;
  ContourConstants contour{};
  int B = 5;
  /// Zero means derived from the grid where the experiment allows it.
  double h_min = 0.0;
  /// Controller tolerance; the step-density parameter eps for visco.
  double tol = 1e-6;
  double T = 1.0;
  /// Everything else, already merged with the preset defaults.
  nlohmann::json params = nlohmann::json::object();
  std::filesystem::path out = "out";

  /// Resolved configuration as a JSON document.
  nlohmann::json to_json() const;
};

const std::vector<std::string>& experiment_names();
const std::vector<std::string>& preset_names();
/// Throws ConfigError for unknown names.
nlohmann::json preset_document(const std::string& name);

/// Resolves {"experiment", "preset", ...} on top of the preset (by default the one named
/// after the experiment). Throws ConfigError.
RunConfig make_config(const nlohmann::json& doc);

struct RunReport {
  int exit_code = 0;
  nlohmann::json manifest;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the experiment and writes trajectory.csv, counters.json and manifest.json into cfg.out.
/// Config errors surface as exceptions; numerical failures are reported with exit code 3.
RunReport run(const RunConfig& cfg);

}  // namespace fastconv
