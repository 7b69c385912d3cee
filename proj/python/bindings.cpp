#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "json.hpp"

#include "fastconv/engine.hpp"
#include "fastconv/error.hpp"
#include "fastconv/oracle.hpp"
#include "fastconv/run.hpp"

namespace py = pybind11;
using namespace fastconv;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fast convolution quadrature with adaptive steps";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<FastConvolution>(m, "Convolution")
      .def(py::init([](const std::string& kernel, double alpha, double h_min, int B, double horizon,
                       const std::string& contour, Eigen::Index dim) {
             return FastConvolution(kernel_by_name(kernel, alpha),
                                    EngineConfig{h_min, B, horizon, contour_preset(contour), true}, dim);
           }),
           py::kw_only(), py::arg("kernel") = "power", py::arg("alpha") = 0.5, py::arg("h_min"), py::arg("B") = 5,
           py::arg("horizon"), py::arg("contour") = "fracrd", py::arg("dim") = 1)
      .def("start", &FastConvolution::start, py::arg("g0"))
      .def("evaluate", &FastConvolution::evaluate, py::arg("t"), py::arg("g"))
      .def("history", &FastConvolution::history, py::arg("t"))
      .def("commit", &FastConvolution::commit, py::arg("t"), py::arg("g"))
      .def_property_readonly("levels", &FastConvolution::levels)
      .def_property_readonly("counters_json", [](const FastConvolution& e) { return e.counters().to_json(); });

  m.def(
      "oracle_convolve",
      [](const std::string& kernel, double alpha, const std::vector<double>& grid, const std::vector<double>& g) {
        if (grid.size() != g.size()) throw ConfigError("grid and samples differ in length");
        return oracle_convolve(kernel_by_name(kernel, alpha), grid, g);
      },
      py::arg("kernel"), py::arg("alpha"), py::arg("grid"), py::arg("samples"));

  m.def("random_grid", &random_grid, py::arg("steps"), py::arg("T"), py::arg("seed"));
  m.def("experiment_names", &experiment_names);
  m.def("preset_json", [](const std::string& name) { return preset_document(name).dump(); });
  m.def(
      "run_json",
      [](const std::string& doc) {
        RunConfig cfg;
        try {
          cfg = make_config(nlohmann::json::parse(doc));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(e.what());
        }
        py::gil_scoped_release release;
        const RunReport r = run(cfg);
        return std::pair{r.exit_code, r.manifest.dump()};
      },
      py::arg("config"));
}
