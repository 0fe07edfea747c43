#include "agvsl/kpi.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agvsl {

std::optional<double>
Prr (std::int64_t successes, std::int64_t intended)
{
  if (intended <= 0)
    {
      return std::nullopt;
    }
  return static_cast<double> (successes) / static_cast<double> (intended);
}

std::optional<double>
Prr (const RunReport &report)
{
  return Prr (report.a2a.receptions_success, report.a2a.receptions_intended);
}

double
ThroughputMbps (std::int64_t bits, double seconds)
{
  if (seconds <= 0.0)
    {
      return 0.0;
    }
  return static_cast<double> (bits) / seconds / 1e6;
}

double
ThroughputMbps (const RunReport &report, TrafficClass cls)
{
  const ClassCounters &c = cls == TrafficClass::A2a ? report.a2a : report.a2i;
  return ThroughputMbps (c.bits_delivered, report.counted_seconds);
}

std::string
RunId (const ScenarioConfig &config)
{
  std::ostringstream os;
  os << ToString (config.alloc_mode) << "-k" << config.n_group_agvs << "-p" << config.packet_period_ms << "-harq"
     << (config.harq_enabled ? 1 : 0) << "-" << ToString (config.duplex) << "-s" << config.seed;
  return os.str ();
}

KpiRecord
ToKpiRecord (const RunReport &report)
{
  const ScenarioConfig &c = report.config;
  KpiRecord r;
  r.run_id = RunId (c);
  r.seed = c.seed;
  r.alloc_mode = std::string (ToString (c.alloc_mode));
  r.n_agvs = c.n_group_agvs;
  r.period_ms = c.packet_period_ms;
  r.harq = c.harq_enabled;
  r.duplex = std::string (ToString (c.duplex));
  r.prr = Prr (report);
  r.throughput_a2a_mbps = ThroughputMbps (report, TrafficClass::A2a);
  r.throughput_a2i_mbps = ThroughputMbps (report, TrafficClass::A2i);
  r.generated = report.a2a.generated;
  r.delivered = report.a2a.DeliveredAny ();
  r.expired = report.a2a.expired;
  return r;
}

std::string
FormatDouble (double v)
{
  char buf[64];
  auto [end, ec] = std::to_chars (buf, buf + sizeof (buf), v);
  if (ec != std::errc{})
    {
      throw std::runtime_error ("cannot format number");
    }
  return std::string (buf, end);
}

std::string
ToCsv (const std::vector<KpiRecord> &records)
{
  std::string out (kCsvHeader);
  out += '\n';
  for (const auto &r : records)
    {
      out += r.run_id + ',' + std::to_string (r.seed) + ',' + r.alloc_mode + ',' + std::to_string (r.n_agvs) + ',' +
             std::to_string (r.period_ms) + ',' + (r.harq ? "1" : "0") + ',' + r.duplex + ',' +
             (r.prr ? FormatDouble (*r.prr) : std::string ()) + ',' + FormatDouble (r.throughput_a2a_mbps) + ',' +
             FormatDouble (r.throughput_a2i_mbps) + ',' + std::to_string (r.generated) + ',' +
             std::to_string (r.delivered) + ',' + std::to_string (r.expired) + '\n';
    }
  return out;
}

void
ExportCsv (const std::vector<KpiRecord> &records, const std::string &path)
{
  std::ofstream f (path, std::ios::binary | std::ios::trunc);
  if (!f)
    {
      throw std::runtime_error ("cannot write CSV to '" + path + "'");
    }
  f << ToCsv (records);
  if (!f.flush ())
    {
      throw std::runtime_error ("cannot write CSV to '" + path + "'");
    }
}

namespace {

template <typename T>
T
ParseNumber (std::string_view s, std::string_view column)
{
  T v{};
  auto [ptr, ec] = std::from_chars (s.data (), s.data () + s.size (), v);
  if (ec != std::errc{} || ptr != s.data () + s.size ())
    {
      throw std::runtime_error ("bad value '" + std::string (s) + "' in column " + std::string (column));
    }
  return v;
}

std::vector<std::string_view>
SplitFields (std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;)
    {
      const auto comma = line.find (',', start);
      if (comma == std::string_view::npos)
        {
          out.push_back (line.substr (start));
          return out;
        }
      out.push_back (line.substr (start, comma - start));
      start = comma + 1;
    }
}

} // namespace

std::vector<KpiRecord>
ParseCsv (std::string_view text)
{
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size ())
    {
      auto nl = text.find ('\n', start);
      if (nl == std::string_view::npos)
        {
          nl = text.size ();
        }
      auto line = text.substr (start, nl - start);
      if (!line.empty () && line.back () == '\r')
        {
          line.remove_suffix (1);
        }
      lines.push_back (line);
      start = nl + 1;
    }
  if (lines.empty () || lines.front () != kCsvHeader)
    {
      throw std::runtime_error ("CSV header does not match the KPI schema");
    }
  std::vector<KpiRecord> out;
  for (std::size_t i = 1; i < lines.size (); ++i)
    {
      if (lines[i].empty ())
        {
          continue;
        }
      const auto f = SplitFields (lines[i]);
      if (f.size () != 13)
        {
          throw std::runtime_error ("CSV line " + std::to_string (i + 1) + " has " + std::to_string (f.size ()) +
                                    " fields, expected 13");
        }
      KpiRecord r;
      r.run_id = std::string (f[0]);
      r.seed = ParseNumber<std::uint64_t> (f[1], "seed");
      r.alloc_mode = std::string (ToString (ParseAllocMode (f[2])));
      r.n_agvs = ParseNumber<int> (f[3], "n_agvs");
      r.period_ms = ParseNumber<int> (f[4], "period_ms");
      if (f[5] != "0" && f[5] != "1")
        {
          throw std::runtime_error ("bad value '" + std::string (f[5]) + "' in column harq");
        }
      r.harq = f[5] == "1";
      r.duplex = std::string (ToString (ParseDuplexMode (f[6])));
      if (!f[7].empty ())
        {
          r.prr = ParseNumber<double> (f[7], "prr");
        }
      r.throughput_a2a_mbps = ParseNumber<double> (f[8], "throughput_a2a_mbps");
      r.throughput_a2i_mbps = ParseNumber<double> (f[9], "throughput_a2i_mbps");
      r.generated = ParseNumber<std::int64_t> (f[10], "generated");
      r.delivered = ParseNumber<std::int64_t> (f[11], "delivered");
      r.expired = ParseNumber<std::int64_t> (f[12], "expired");
      out.push_back (std::move (r));
    }
  return out;
}

} // namespace agvsl
