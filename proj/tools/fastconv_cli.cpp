#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fastconv/error.hpp"
#include "fastconv/run.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::string preset;
  std::optional<double> tol, hmin, gamma, alpha;
  std::optional<int> K, B;
  std::optional<std::string> out;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_file, "JSON config file");
  cmd->add_option("--preset", o.preset, "Parameter preset");
  cmd->add_option("--tol", o.tol, "Controller tolerance (eps for visco)");
  cmd->add_option("--K", o.K, "Quadrature half-size per contour");
  cmd->add_option("--B", o.B, "Mosaic base");
  cmd->add_option("--hmin", o.hmin, "Smallest resolved step");
  cmd->add_option("--gamma", o.gamma, "Coupling constant");
  cmd->add_option("--alpha", o.alpha, "Fractional order");
  cmd->add_option("--out", o.out, "Output directory");
}

nlohmann::json build_document(const std::string& experiment, const Overrides& o) {
  nlohmann::json doc = nlohmann::json::object();
  if (!o.config_file.empty()) {
    std::ifstream is(o.config_file);
    if (!is) throw fastconv::ConfigError("cannot open config " + o.config_file);
    try {
      doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& e) {
      throw fastconv::ConfigError(std::string("config parse: ") + e.what());
    }
  }
  if (!experiment.empty()) doc["experiment"] = experiment;
  if (!o.preset.empty()) doc["preset"] = o.preset;

  // The preset's contour object is only known after resolution, so K is applied in two passes.
  if (o.tol) doc["tol"] = *o.tol;
  if (o.B) doc["B"] = *o.B;
  if (o.hmin) doc["h_min"] = *o.hmin;
  if (o.gamma) doc["gamma"] = *o.gamma;
  if (o.alpha) doc["alpha"] = *o.alpha;
  if (o.out) doc["out"] = *o.out;
  if (o.K) {
    nlohmann::json contour = fastconv::make_config(doc).to_json()["contour"];
    contour["K"] = *o.K;
    doc["contour"] = contour;
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fast convolution quadrature with adaptive steps"};
  app.require_subcommand(1);

  Overrides o;
  std::string chosen;
  for (const std::string& name : fastconv::experiment_names()) {
    CLI::App* cmd = app.add_subcommand(name, "Run the " + name + " experiment");
    add_options(cmd, o);
    cmd->callback([&chosen, name] { chosen = name; });
  }
  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment named in the config file");
  add_options(run_cmd, o);
  CLI::App* list_cmd = app.add_subcommand("presets", "List presets as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fastconv::kExitConfig;
  }

  if (list_cmd->parsed()) {
    nlohmann::json all = nlohmann::json::object();
    for (const auto& name : fastconv::preset_names()) all[name] = fastconv::preset_document(name);
    std::cout << all.dump(2) << '\n';
    return fastconv::kExitOk;
  }

  try {
    const fastconv::RunConfig cfg = fastconv::make_config(build_document(chosen, o));
    const fastconv::RunReport report = fastconv::run(cfg);
    nlohmann::json brief{{"status", report.manifest["status"]},
                         {"summary", report.manifest["summary"]},
                         {"out", cfg.out.string()}};
    if (report.manifest.contains("failure")) brief["failure"] = report.manifest["failure"];
    std::cout << brief.dump(2) << '\n';
    return report.exit_code;
  } catch (const fastconv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fastconv::kExitConfig;
  } catch (const fastconv::Error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return fastconv::kExitNumerical;
  }
}
