#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "risnoma/comm_noma.hpp"
#include "risnoma/errors.hpp"
#include "risnoma/experiments.hpp"
#include "risnoma/geometry_channel.hpp"
#include "risnoma/joint_driver.hpp"
#include "risnoma/sensing.hpp"

namespace py = pybind11;
using namespace risnoma;

namespace {

py::dict channels_dict(const ChannelSet& ch) {
  py::dict d;
  d["G"] = ch.G;
  d["g_near"] = ch.g_near;
  d["g_far"] = ch.g_far;
  return d;
}

py::dict record_dict(const TrialRecord& r) {
  py::dict d;
  d["seed"] = r.seed;
  d["n_ris"] = r.n_ris;
  d["ok"] = r.ok;
  d["error"] = r.error;
  d["chi"] = r.chi;
  d["gains"] = r.gains;
  d["user_rates"] = r.user_rates;
  d["qos_margin"] = r.qos_margin;
  d["outer_trace"] = r.outer_trace;
  d["events"] = r.diagnostics.events;
  d["seconds"] = r.seconds;
  return d;
}

}  // namespace

PYBIND11_MODULE(_risnoma, m) {
  m.doc() = "RIS-assisted NOMA-ISAC max-min beampattern optimizer";

  // Translators run newest first, so the subclasses are registered last.
  const auto& base = py::register_exception<Error>(m, "RisnomaError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("n_tx", &SystemConfig::n_tx)
      .def_readwrite("n_ris", &SystemConfig::n_ris)
      .def_readwrite("n_clusters", &SystemConfig::n_clusters)
      .def_readwrite("p_max", &SystemConfig::p_max)
      .def_readwrite("noise_power", &SystemConfig::noise_power)
      .def_readwrite("r_min_near", &SystemConfig::r_min_near)
      .def_readwrite("r_min_far", &SystemConfig::r_min_far)
      .def_readwrite("spacing_ratio", &SystemConfig::spacing_ratio)
      .def_readwrite("target_angles", &SystemConfig::target_angles)
      .def_readwrite("beam_width", &SystemConfig::beam_width)
      .def_readwrite("angle_grid_points", &SystemConfig::angle_grid_points)
      .def_readwrite("ris_sweep", &SystemConfig::ris_sweep)
      .def_readwrite("rng_seed", &SystemConfig::rng_seed)
      .def_readwrite("seeds", &SystemConfig::seeds)
      .def("validate", &SystemConfig::validate)
      .def("canonical", &canonical_config);

  m.def("profile_config", &profile_config, py::arg("name"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("parse_config", &parse_config, py::arg("json_text"));
  m.def("config_hash", &config_hash, py::arg("config"));
  m.def("version", &version_string);
  m.def("dbm_to_watt", &dbm_to_watt, py::arg("dbm"));
  m.def("pathloss", &pathloss, py::arg("distance"), py::arg("exponent"), py::arg("ref_gain"));
  m.def("steering_vector", &steering_vector, py::arg("theta"), py::arg("m"),
        py::arg("spacing_ratio") = 0.5);
  m.def("lift_phases", &lift_phases, py::arg("v"));
  m.def(
      "beampattern_gain",
      [](const CMatrix& V, const std::vector<CMatrix>& W, const CMatrix& G, double theta,
         double spacing) { return beampattern_gain(V, W, G, theta, spacing); },
      py::arg("V"), py::arg("W"), py::arg("G"), py::arg("theta"), py::arg("spacing_ratio") = 0.5);

  m.def(
      "build_scenario",
      [](const SystemConfig& c, std::uint64_t seed) {
        return channels_dict(build_scenario(c, seed).second);
      },
      py::arg("config"), py::arg("seed"));

  m.def(
      "algorithm3",
      [](const SystemConfig& c, std::uint64_t seed) {
        const auto scenario = build_scenario(c, seed);
        JointResult r;
        {
          py::gil_scoped_release release;
          r = algorithm3(scenario.second, c, seed);
        }
        py::dict d;
        d["chi"] = r.chi;
        d["outer_trace"] = r.outer_trace;
        d["w"] = r.state.w;
        d["a_near"] = r.state.a_near;
        d["v"] = r.state.v;
        d["converged"] = r.converged;
        d["events"] = r.diagnostics.events;
        d["channels"] = channels_dict(scenario.second);
        return d;
      },
      py::arg("config"), py::arg("seed"));

  m.def(
      "baseline",
      [](const SystemConfig& c, std::uint64_t seed) {
        const auto scenario = build_scenario(c, seed);
        BaselineResult r;
        {
          py::gil_scoped_release release;
          r = baseline_ris_isac(scenario.second, c, seed);
        }
        py::dict d;
        d["chi"] = r.chi;
        d["outer_trace"] = r.outer_trace;
        d["w"] = r.design.w;
        d["v"] = r.design.v;
        d["events"] = r.diagnostics.events;
        return d;
      },
      py::arg("config"), py::arg("seed"));

  m.def(
      "run_trial",
      [](const SystemConfig& c, std::uint64_t seed, const std::string& system) {
        if (system != "noma" && system != "baseline")
          throw ConfigError("system must be 'noma' or 'baseline'");
        TrialRecord r;
        {
          py::gil_scoped_release release;
          r = system == "noma" ? run_noma_trial(c, seed) : run_baseline_trial(c, seed);
        }
        return record_dict(r);
      },
      py::arg("config"), py::arg("seed"), py::arg("system") = "noma");
}
