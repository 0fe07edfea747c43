#pragma once

#include "agvsl/geometry.h"
#include "agvsl/rng.h"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agvsl {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class AllocMode { Random, Mode1, Mode2NoReeval, Mode2, Cooperative };
enum class DuplexMode { Half, Full };
enum class FeedbackMode { AckNack, NackOnly };

std::string_view ToString (AllocMode m);
std::string_view ToString (DuplexMode m);
std::string_view ToString (FeedbackMode m);
AllocMode ParseAllocMode (std::string_view s);
DuplexMode ParseDuplexMode (std::string_view s);
FeedbackMode ParseFeedbackMode (std::string_view s);

/// Full experiment description. Defaults reproduce the reference indoor
/// factory: 200 m x 200 m hall, one gNB at the centre, 2 GHz / 20 MHz.
struct ScenarioConfig
{
  // geometry
  double hall_width_m{200.0};
  double hall_depth_m{200.0};
  double workpiece_edge_m{10.0};
  double trajectory_margin_m{20.0};
  double a2i_spread_m{50.0};

  // radio
  double carrier_freq_ghz{2.0};
  double bandwidth_mhz{20.0};
  double tx_power_dbm{23.0};
  double antenna_gain_tx_dbi{3.0};
  double antenna_gain_rx_dbi{3.0};
  double noise_figure_db{9.0};
  double shadowing_sigma_db{3.0};
  double shadowing_decorr_m{25.0};
  double inband_emission_db{-40.0};
  double rsrp_threshold_dbm{-110.0};
  int ctrl_payload_bits{100};

  // traffic
  int n_group_agvs{4};
  int n_a2i_links{10};
  double group_speed_kmh{6.0};
  double a2i_speed_kmh{16.0};
  int packet_period_ms{10};
  int packet_size_a2a_bits{2400};
  int packet_size_a2i_bits{12000};

  // allocation
  AllocMode alloc_mode{AllocMode::Mode2};
  int sensing_window_ms{100};

  // link layer
  bool harq_enabled{false};
  FeedbackMode harq_feedback{FeedbackMode::NackOnly};
  std::optional<double> nack_range_m; ///< unset: twice the workpiece diagonal
  DuplexMode duplex{DuplexMode::Half};
  std::optional<double> residual_si_db; ///< unset: ideal cancellation

  // simulation
  double sim_duration_s{60.0};
  std::uint64_t seed{1};
  double position_update_s{0.1};
  bool record_events{false};

  double NackRangeM () const;
  int PeriodSlots () const { return packet_period_ms; }
  std::int64_t HorizonSlots () const;
};

/// Throws ConfigError naming the first violated constraint.
void Validate (const ScenarioConfig &config);

/// Nested key/value (JSON) representation. Unknown keys are rejected.
ScenarioConfig ParseScenarioConfig (std::string_view text);
ScenarioConfig LoadScenarioConfig (const std::string &path);
std::string DumpScenarioConfig (const ScenarioConfig &config);

using UeId = int;

enum class UeKind { GroupAgv, LeaderAgv, A2iAgv, Gnb };

struct UeState
{
  UeId id{0};
  UeKind kind{UeKind::GroupAgv};
  Vec2 position;
  Vec2 velocity;

  bool IsGroupMember () const { return kind == UeKind::GroupAgv || kind == UeKind::LeaderAgv; }
};

struct Trajectory
{
  std::vector<Vec2> waypoints;
  bool loop{true};

  double Length () const;
  Vec2 PointAt (double arc_length) const;
  Vec2 DirectionAt (double arc_length) const;
};

/// Rectangular loop inset by `margin_m` from the hall walls.
Trajectory MakeGroupTrajectory (const ScenarioConfig &config);

/// Offsets of `n_agvs` AGVs spread evenly along the workpiece perimeter,
/// walking clockwise. Counts divisible by four start at the (+,+) corner so
/// that every corner is occupied; otherwise placement starts at the (+,0)
/// edge midpoint.
std::vector<Vec2> BuildFormation (int n_agvs, double edge_m);

/// m positions from a Poisson process whose intensity is an isotropic
/// Gaussian (std `spread_m`) around `centre`, rejection-clipped to the hall.
std::vector<UeState> DropA2iUes (int m, Vec2 centre, double spread_m, double width_m, double depth_m,
                                 Rng &rng, UeId first_id = 0);

Vec2 ClampToHall (Vec2 p, double width_m, double depth_m);

/// Owns the mobility state of every UE: the rigid group formation riding the
/// trajectory and random-waypoint A2I AGVs.
class Mobility
{
public:
  Mobility (const ScenarioConfig &config, RngStreams const &streams);

  /// UE layout: [0, K) group AGVs (id 0 is the leader in cooperative mode),
  /// [K, K+M) A2I AGVs, K+M the gNB.
  const std::vector<UeState> &Ues () const { return m_ues; }
  const Trajectory &GroupTrajectory () const { return m_trajectory; }
  double GroupArcLength () const { return m_arc; }
  UeId GnbId () const { return static_cast<UeId> (m_ues.size ()) - 1; }
  int GroupSize () const { return m_groupSize; }

  /// Moves every UE by `dt_s`. Returns the displacement of each UE.
  std::vector<double> Advance (double dt_s);

private:
  Vec2 DrawWaypoint ();

  ScenarioConfig m_config;
  Trajectory m_trajectory;
  std::vector<Vec2> m_offsets;
  std::vector<UeState> m_ues;
  std::vector<Vec2> m_waypoints;
  Rng m_mobilityRng;
  double m_arc{0.0};
  int m_groupSize{0};
};

constexpr double
KmhToMps (double kmh)
{
  return kmh / 3.6;
}

} // namespace agvsl
