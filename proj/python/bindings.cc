#include "agvsl/cli.h"
#include "agvsl/kpi.h"
#include "agvsl/sim_engine.h"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace agvsl;

namespace {

py::tuple
Cli (const std::vector<std::string> &args)
{
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = CliMain (args, out, err);
  }
  return py::make_tuple (code, out.str (), err.str ());
}

KpiRecord
RunConfig (const ScenarioConfig &config)
{
  py::gil_scoped_release release;
  return ToKpiRecord (Run (config));
}

} // namespace

PYBIND11_MODULE (_agvsl, m)
{
  m.doc () = "Slot-level NR sidelink simulator for cooperating AGV groups";

  py::register_exception<ConfigError> (m, "ConfigError", PyExc_ValueError);

  py::class_<ScenarioConfig> (m, "ScenarioConfig")
      .def (py::init<> ())
      .def_static ("from_json", [] (const std::string &text) { return ParseScenarioConfig (text); })
      .def ("to_json", [] (const ScenarioConfig &c) { return DumpScenarioConfig (c); })
      .def ("validate", [] (const ScenarioConfig &c) { Validate (c); })
      .def_property (
          "alloc_mode", [] (const ScenarioConfig &c) { return std::string (ToString (c.alloc_mode)); },
          [] (ScenarioConfig &c, const std::string &s) { c.alloc_mode = ParseAllocMode (s); })
      .def_property (
          "duplex", [] (const ScenarioConfig &c) { return std::string (ToString (c.duplex)); },
          [] (ScenarioConfig &c, const std::string &s) { c.duplex = ParseDuplexMode (s); })
      .def_readwrite ("n_group_agvs", &ScenarioConfig::n_group_agvs)
      .def_readwrite ("n_a2i_links", &ScenarioConfig::n_a2i_links)
      .def_readwrite ("packet_period_ms", &ScenarioConfig::packet_period_ms)
      .def_readwrite ("harq_enabled", &ScenarioConfig::harq_enabled)
      .def_readwrite ("sim_duration_s", &ScenarioConfig::sim_duration_s)
      .def_readwrite ("seed", &ScenarioConfig::seed)
      .def_readwrite ("tx_power_dbm", &ScenarioConfig::tx_power_dbm)
      .def_readwrite ("inband_emission_db", &ScenarioConfig::inband_emission_db)
      .def_readwrite ("rsrp_threshold_dbm", &ScenarioConfig::rsrp_threshold_dbm)
      .def ("__repr__", [] (const ScenarioConfig &c) { return "<ScenarioConfig " + RunId (c) + ">"; });

  py::class_<KpiRecord> (m, "KpiRecord")
      .def_readonly ("run_id", &KpiRecord::run_id)
      .def_readonly ("seed", &KpiRecord::seed)
      .def_readonly ("alloc_mode", &KpiRecord::alloc_mode)
      .def_readonly ("n_agvs", &KpiRecord::n_agvs)
      .def_readonly ("period_ms", &KpiRecord::period_ms)
      .def_readonly ("harq", &KpiRecord::harq)
      .def_readonly ("duplex", &KpiRecord::duplex)
      .def_readonly ("prr", &KpiRecord::prr)
      .def_readonly ("throughput_a2a_mbps", &KpiRecord::throughput_a2a_mbps)
      .def_readonly ("throughput_a2i_mbps", &KpiRecord::throughput_a2i_mbps)
      .def_readonly ("generated", &KpiRecord::generated)
      .def_readonly ("delivered", &KpiRecord::delivered)
      .def_readonly ("expired", &KpiRecord::expired)
      .def (py::self == py::self)
      .def ("__repr__", [] (const KpiRecord &r) { return "<KpiRecord " + r.run_id + ">"; });

  m.def ("run", &RunConfig, py::arg ("config"), "Run one configuration and return its KPI record.");
  m.def ("run_id", &RunId, py::arg ("config"));
  m.def ("to_csv", &ToCsv, py::arg ("records"));
  m.def ("parse_csv", [] (const std::string &text) { return ParseCsv (text); }, py::arg ("text"));
  m.def ("cli", &Cli, py::arg ("args"), "Run the command-line front end; returns (exit_code, stdout, stderr).");
  m.attr ("CSV_HEADER") = std::string (kCsvHeader);
}
