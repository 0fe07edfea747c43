#include "agvsl/cli.h"
#include "agvsl/kpi.h"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace agvsl;

namespace {

struct CliResult
{
  int code;
  std::string out;
  std::string err;
};

CliResult
Cli (std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = CliMain (args, out, err);
  return {code, out.str (), err.str ()};
}

std::string
Slurp (const std::filesystem::path &p)
{
  std::ifstream in (p);
  std::stringstream ss;
  ss << in.rdbuf ();
  return ss.str ();
}

} // namespace

TEST_CASE ("run writes one data row")
{
  const auto path = std::filesystem::temp_directory_path () / "agvsl_cli_run.csv";
  std::filesystem::remove (path);
  const auto r = Cli ({"run", "--mode", "mode2", "--agvs", "4", "--period-ms", "10", "--seed", "1", "--duration-s",
                       "0.5", "--out", path.string ()});
  CHECK (r.code == kExitOk);
  const auto recs = ParseCsv (Slurp (path));
  REQUIRE (recs.size () == 1u);
  CHECK (recs[0].run_id == "mode2-k4-p10-harq0-half-s1");
  std::filesystem::remove (path);
}

TEST_CASE ("run without --out prints CSV")
{
  const auto r = Cli ({"run", "--duration-s", "0.2", "--harq", "on", "--duplex", "full"});
  CHECK (r.code == kExitOk);
  const auto recs = ParseCsv (r.out);
  REQUIRE (recs.size () == 1u);
  CHECK (recs[0].harq);
  CHECK (recs[0].duplex == "full");
}

TEST_CASE ("sweep expands the cross product")
{
  const auto r = Cli ({"sweep", "--mode", "random,mode2", "--agvs", "4,6,8", "--seeds", "5", "--duration-s", "0.2"});
  CHECK (r.code == kExitOk);
  const auto recs = ParseCsv (r.out);
  CHECK (recs.size () == 2u * 3u * 5u);
}

TEST_CASE ("usage errors exit with 2")
{
  CHECK (Cli ({"run", "--agvs", "9"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--period-ms", "5"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--mode", "bogus"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--harq", "maybe"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--agvs", "4,6"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--no-such-flag"}).code == kExitUsageError);
  CHECK (Cli ({}).code == kExitUsageError);
  CHECK (Cli ({"sweep", "--seeds", "0"}).code == kExitUsageError);
  CHECK (Cli ({"run", "--config", "/nonexistent/config.json"}).code == kExitUsageError);
  const auto r = Cli ({"run", "--agvs", "9"});
  CHECK_FALSE (r.err.empty ());
}

TEST_CASE ("runtime errors exit with 1")
{
  const auto r = Cli ({"run", "--duration-s", "0.1", "--out", "/nonexistent-dir/r.csv"});
  CHECK (r.code == kExitRuntimeError);
  CHECK (r.err.find ("/nonexistent-dir/r.csv") != std::string::npos);
}

TEST_CASE ("validate lints without running")
{
  const auto r = Cli ({"validate", "--mode", "cooperative", "--agvs", "8", "--period-ms", "3"});
  CHECK (r.code == kExitOk);
  CHECK (r.out == "ok: cooperative-k8-p3-harq0-half-s1\n");
}

TEST_CASE ("configuration file with flag overrides")
{
  const auto path = std::filesystem::temp_directory_path () / "agvsl_cli_config.json";
  {
    std::ofstream f (path);
    f << R"({"traffic": {"n_group_agvs": 6, "packet_period_ms": 3}, "sim": {"seed": 9}})";
  }
  const auto r = Cli ({"validate", "--config", path.string (), "--period-ms", "10"});
  CHECK (r.code == kExitOk);
  CHECK (r.out == "ok: mode2-k6-p10-harq0-half-s9\n");
  std::filesystem::remove (path);
}

TEST_CASE ("help exits cleanly")
{
  const auto r = Cli ({"--help"});
  CHECK (r.code == kExitOk);
  CHECK (r.out.find ("sweep") != std::string::npos);
}
