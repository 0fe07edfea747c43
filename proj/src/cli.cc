#include "agvsl/cli.h"

#include "agvsl/kpi.h"
#include "agvsl/scenario.h"
#include "agvsl/sim_engine.h"

#include <CLI11.hpp>

#include <algorithm>
#include <ostream>
#include <tuple>

namespace agvsl {

namespace {

/// Raw flag values; sweep accepts comma-separated lists for the axes.
struct CliOptions
{
  std::string config;
  std::string mode;
  std::string agvs;
  std::string period_ms;
  std::string harq;
  std::string duplex;
  std::uint64_t seed{1};
  bool seed_set{false};
  int seeds{1};
  double duration_s{0.0};
  bool duration_set{false};
  std::string out;
};

void
AddCommonOptions (CLI::App *cmd, CliOptions &o, bool lists)
{
  const std::string suffix = lists ? " (comma-separated list)" : "";
  cmd->add_option ("--config", o.config, "scenario configuration (JSON)");
  cmd->add_option ("--mode", o.mode, "allocation mode: random|mode1|mode2_noreeval|mode2|cooperative" + suffix);
  cmd->add_option ("--agvs", o.agvs, "group size, 2..8" + suffix);
  cmd->add_option ("--period-ms", o.period_ms, "packet period, 3 or 10" + suffix);
  cmd->add_option ("--harq", o.harq, "on|off" + suffix);
  cmd->add_option ("--duplex", o.duplex, "half|full" + suffix);
  cmd->add_option ("--seed", o.seed, "first seed");
  cmd->add_option ("--duration-s", o.duration_s, "simulated seconds");
}

std::vector<std::string>
SplitList (const std::string &s)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;)
    {
      const auto comma = s.find (',', start);
      out.push_back (s.substr (start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos)
        {
          return out;
        }
      start = comma + 1;
    }
}

int
ParseInt (const std::string &s, const std::string &flag)
{
  try
    {
      std::size_t used = 0;
      const int v = std::stoi (s, &used);
      if (used == s.size ())
        {
          return v;
        }
    }
  catch (const std::exception &)
    {
    }
  throw ConfigError ("invalid value '" + s + "' for " + flag);
}

bool
ParseOnOff (const std::string &s)
{
  if (s == "on" || s == "true" || s == "1")
    {
      return true;
    }
  if (s == "off" || s == "false" || s == "0")
    {
      return false;
    }
  throw ConfigError ("invalid value '" + s + "' for --harq (expected on|off)");
}

/// Axis values of a flag, or the single base value when the flag is absent.
template <typename T, typename F>
std::vector<T>
Axis (const std::string &raw, T base, F parse)
{
  if (raw.empty ())
    {
      return {base};
    }
  std::vector<T> out;
  for (const auto &item : SplitList (raw))
    {
      out.push_back (parse (item));
    }
  return out;
}

ScenarioConfig
BaseConfig (const CliOptions &o)
{
  ScenarioConfig c = o.config.empty () ? ScenarioConfig{} : LoadScenarioConfig (o.config);
  if (o.seed_set)
    {
      c.seed = o.seed;
    }
  if (o.duration_set)
    {
      c.sim_duration_s = o.duration_s;
    }
  return c;
}

/// Expands the flags into the validated list of configurations to run.
std::vector<ScenarioConfig>
Expand (const CliOptions &o)
{
  const ScenarioConfig base = BaseConfig (o);
  const auto modes = Axis<AllocMode> (o.mode, base.alloc_mode, [] (const std::string &s) { return ParseAllocMode (s); });
  const auto agvs = Axis<int> (o.agvs, base.n_group_agvs, [] (const std::string &s) { return ParseInt (s, "--agvs"); });
  const auto periods =
      Axis<int> (o.period_ms, base.packet_period_ms, [] (const std::string &s) { return ParseInt (s, "--period-ms"); });
  const auto harqs = Axis<bool> (o.harq, base.harq_enabled, ParseOnOff);
  const auto duplexes =
      Axis<DuplexMode> (o.duplex, base.duplex, [] (const std::string &s) { return ParseDuplexMode (s); });
  if (o.seeds < 1)
    {
      throw ConfigError ("--seeds must be at least 1");
    }

  std::vector<ScenarioConfig> out;
  for (AllocMode m : modes)
    for (int k : agvs)
      for (int p : periods)
        for (bool h : harqs)
          for (DuplexMode d : duplexes)
            for (int s = 0; s < o.seeds; ++s)
              {
                ScenarioConfig c = base;
                c.alloc_mode = m;
                c.n_group_agvs = k;
                c.packet_period_ms = p;
                c.harq_enabled = h;
                c.duplex = d;
                c.seed = base.seed + static_cast<std::uint64_t> (s);
                Validate (c);
                out.push_back (c);
              }
  return out;
}

auto
SortKey (const KpiRecord &r)
{
  return std::tie (r.alloc_mode, r.n_agvs, r.period_ms, r.harq, r.duplex, r.seed);
}

int
RunAndExport (const std::vector<ScenarioConfig> &configs, const std::string &path, std::ostream &out)
{
  std::vector<KpiRecord> records;
  records.reserve (configs.size ());
  for (const auto &c : configs)
    {
      records.push_back (ToKpiRecord (Run (c)));
    }
  std::sort (records.begin (), records.end (),
             [] (const KpiRecord &a, const KpiRecord &b) { return SortKey (a) < SortKey (b); });
  if (path.empty ())
    {
      out << ToCsv (records);
    }
  else
    {
      ExportCsv (records, path);
    }
  return kExitOk;
}

} // namespace

int
CliMain (const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Sidelink resource-allocation simulator for AGV groups", "agvsl"};
  app.require_subcommand (1);
  CliOptions o;

  auto *run = app.add_subcommand ("run", "run one configuration and export its KPI row");
  AddCommonOptions (run, o, false);
  run->add_option ("--out", o.out, "CSV destination (default: stdout)");

  auto *sweep = app.add_subcommand ("sweep", "run the cross product of the given axes and seeds");
  AddCommonOptions (sweep, o, true);
  sweep->add_option ("--seeds", o.seeds, "number of consecutive seeds starting at --seed");
  sweep->add_option ("--out", o.out, "CSV destination (default: stdout)");

  auto *validate = app.add_subcommand ("validate", "check a configuration without running it");
  AddCommonOptions (validate, o, false);

  std::vector<std::string> reversed (args.rbegin (), args.rend ());
  try
    {
      app.parse (reversed);
    }
  catch (const CLI::ParseError &e)
    {
      const int rc = app.exit (e, out, err);
      return rc == 0 ? kExitOk : kExitUsageError;
    }

  CLI::App *cmd = run->parsed () ? run : sweep->parsed () ? sweep : validate;
  o.seed_set = cmd->count ("--seed") > 0;
  o.duration_set = cmd->count ("--duration-s") > 0;
  if (cmd != sweep)
    {
      for (const auto *axis : {&o.mode, &o.agvs, &o.period_ms, &o.harq, &o.duplex})
        {
          if (axis->find (',') != std::string::npos)
            {
              err << "error: value lists are only accepted by sweep\n";
              return kExitUsageError;
            }
        }
    }

  std::vector<ScenarioConfig> configs;
  try
    {
      configs = Expand (o);
    }
  catch (const ConfigError &e)
    {
      err << "error: " << e.what () << "\n";
      return kExitUsageError;
    }

  if (validate->parsed ())
    {
      out << "ok: " << RunId (configs.front ()) << "\n";
      return kExitOk;
    }
  try
    {
      return RunAndExport (configs, o.out, out);
    }
  catch (const std::exception &e)
    {
      err << "error: " << e.what () << "\n";
      return kExitRuntimeError;
    }
}

} // namespace agvsl
