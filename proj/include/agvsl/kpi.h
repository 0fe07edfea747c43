#pragma once

#include "agvsl/sim_engine.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agvsl {

enum class TrafficClass { A2a, A2i };

/// One CSV row: the KPIs of a single (configuration, seed) run.
struct KpiRecord
{
  std::string run_id;
  std::uint64_t seed{0};
  std::string alloc_mode;
  int n_agvs{0};
  int period_ms{0};
  bool harq{false};
  std::string duplex;
  std::optional<double> prr;
  double throughput_a2a_mbps{0.0};
  double throughput_a2i_mbps{0.0};
  std::int64_t generated{0};
  std::int64_t delivered{0};
  std::int64_t expired{0};

  bool operator== (const KpiRecord &) const = default;
};

/// Column order of the exported CSV.
inline constexpr std::string_view kCsvHeader = "run_id,seed,alloc_mode,n_agvs,period_ms,harq,duplex,prr,"
                                               "throughput_a2a_mbps,throughput_a2i_mbps,generated,delivered,expired";

/// Successful (packet, receiver) pairs over intended pairs for counted A2A
/// packets; absent when nothing was counted.
std::optional<double> Prr (const RunReport &report);
std::optional<double> Prr (std::int64_t successes, std::int64_t intended);

/// Unique delivered bits over the counted duration, in Mbps.
double ThroughputMbps (const RunReport &report, TrafficClass cls);
double ThroughputMbps (std::int64_t bits, double seconds);

/// Stable identifier of a run derived from its sweep coordinates.
std::string RunId (const ScenarioConfig &config);

KpiRecord ToKpiRecord (const RunReport &report);

/// Shortest round-trip decimal representation.
std::string FormatDouble (double v);

std::string ToCsv (const std::vector<KpiRecord> &records);
/// Throws std::runtime_error naming the path when it cannot be written.
void ExportCsv (const std::vector<KpiRecord> &records, const std::string &path);
/// Throws std::runtime_error on a header or field mismatch.
std::vector<KpiRecord> ParseCsv (std::string_view text);

} // namespace agvsl
