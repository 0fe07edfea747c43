#include "agvsl/scenario.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace agvsl {

namespace {

template <typename E, std::size_t N>
E
ParseEnum (std::string_view s, const std::pair<std::string_view, E> (&table)[N], std::string_view what)
{
  for (const auto &[name, value] : table)
    {
      if (name == s)
        {
          return value;
        }
    }
  throw ConfigError ("invalid " + std::string (what) + " '" + std::string (s) + "'");
}

constexpr std::pair<std::string_view, AllocMode> kAllocModes[] = {
    {"random", AllocMode::Random},
    {"mode1", AllocMode::Mode1},
    {"mode2_noreeval", AllocMode::Mode2NoReeval},
    {"mode2", AllocMode::Mode2},
    {"cooperative", AllocMode::Cooperative},
};
constexpr std::pair<std::string_view, DuplexMode> kDuplexModes[] = {
    {"half", DuplexMode::Half},
    {"full", DuplexMode::Full},
};
constexpr std::pair<std::string_view, FeedbackMode> kFeedbackModes[] = {
    {"ack_nack", FeedbackMode::AckNack},
    {"nack_only", FeedbackMode::NackOnly},
};

template <typename E, std::size_t N>
std::string_view
EnumName (E v, const std::pair<std::string_view, E> (&table)[N])
{
  for (const auto &[name, value] : table)
    {
      if (value == v)
        {
          return name;
        }
    }
  return "?";
}

using nlohmann::json;

// One accessor per addressable field: section, key, reader, writer.
struct Field
{
  std::string_view section;
  std::string_view key;
  std::function<void (ScenarioConfig &, const json &)> read;
  std::function<json (const ScenarioConfig &)> write;
};

template <typename T>
T
As (const json &v, std::string_view key)
{
  try
    {
      if constexpr (std::is_same_v<T, bool>)
        {
          if (!v.is_boolean ())
            {
              throw ConfigError ("");
            }
        }
      else if constexpr (std::is_arithmetic_v<T>)
        {
          if (!v.is_number ())
            {
              throw ConfigError ("");
            }
          if constexpr (std::is_integral_v<T>)
            {
              if (!v.is_number_integer () && !v.is_number_unsigned ())
                {
                  throw ConfigError ("");
                }
            }
        }
      return v.get<T> ();
    }
  catch (const std::exception &)
    {
      throw ConfigError ("field '" + std::string (key) + "' has the wrong type");
    }
}

#define AGVSL_FIELD(sec, name)                                                                     \
  Field                                                                                            \
  {                                                                                                \
    sec, #name,                                                                                    \
        [] (ScenarioConfig &c, const json &v) { c.name = As<decltype (c.name)> (v, #name); },      \
        [] (const ScenarioConfig &c) { return json (c.name); }                                     \
  }

#define AGVSL_OPT_FIELD(sec, name)                                                                 \
  Field                                                                                            \
  {                                                                                                \
    sec, #name,                                                                                    \
        [] (ScenarioConfig &c, const json &v) {                                                    \
          if (v.is_null ())                                                                        \
            c.name.reset ();                                                                       \
          else                                                                                     \
            c.name = As<double> (v, #name);                                                        \
        },                                                                                         \
        [] (const ScenarioConfig &c) { return c.name ? json (*c.name) : json (nullptr); }          \
  }

const std::vector<Field> &
Fields ()
{
  static const std::vector<Field> fields = {
      AGVSL_FIELD ("geometry", hall_width_m),
      AGVSL_FIELD ("geometry", hall_depth_m),
      AGVSL_FIELD ("geometry", workpiece_edge_m),
      AGVSL_FIELD ("geometry", trajectory_margin_m),
      AGVSL_FIELD ("geometry", a2i_spread_m),
      AGVSL_FIELD ("radio", carrier_freq_ghz),
      AGVSL_FIELD ("radio", bandwidth_mhz),
      AGVSL_FIELD ("radio", tx_power_dbm),
      AGVSL_FIELD ("radio", antenna_gain_tx_dbi),
      AGVSL_FIELD ("radio", antenna_gain_rx_dbi),
      AGVSL_FIELD ("radio", noise_figure_db),
      AGVSL_FIELD ("radio", shadowing_sigma_db),
      AGVSL_FIELD ("radio", shadowing_decorr_m),
      AGVSL_FIELD ("radio", inband_emission_db),
      AGVSL_FIELD ("radio", rsrp_threshold_dbm),
      AGVSL_FIELD ("radio", ctrl_payload_bits),
      AGVSL_FIELD ("traffic", n_group_agvs),
      AGVSL_FIELD ("traffic", n_a2i_links),
      AGVSL_FIELD ("traffic", group_speed_kmh),
      AGVSL_FIELD ("traffic", a2i_speed_kmh),
      AGVSL_FIELD ("traffic", packet_period_ms),
      AGVSL_FIELD ("traffic", packet_size_a2a_bits),
      AGVSL_FIELD ("traffic", packet_size_a2i_bits),
      Field{"allocation", "alloc_mode",
            [] (ScenarioConfig &c, const json &v) {
              c.alloc_mode = ParseAllocMode (As<std::string> (v, "alloc_mode"));
            },
            [] (const ScenarioConfig &c) { return json (std::string (ToString (c.alloc_mode))); }},
      AGVSL_FIELD ("allocation", sensing_window_ms),
      AGVSL_FIELD ("link", harq_enabled),
      Field{"link", "harq_feedback",
            [] (ScenarioConfig &c, const json &v) {
              c.harq_feedback = ParseFeedbackMode (As<std::string> (v, "harq_feedback"));
            },
            [] (const ScenarioConfig &c) { return json (std::string (ToString (c.harq_feedback))); }},
      AGVSL_OPT_FIELD ("link", nack_range_m),
      Field{"link", "duplex",
            [] (ScenarioConfig &c, const json &v) {
              c.duplex = ParseDuplexMode (As<std::string> (v, "duplex"));
            },
            [] (const ScenarioConfig &c) { return json (std::string (ToString (c.duplex))); }},
      AGVSL_OPT_FIELD ("link", residual_si_db),
      AGVSL_FIELD ("sim", sim_duration_s),
      AGVSL_FIELD ("sim", seed),
      AGVSL_FIELD ("sim", position_update_s),
      AGVSL_FIELD ("sim", record_events),
  };
  return fields;
}

#undef AGVSL_FIELD
#undef AGVSL_OPT_FIELD

void
Require (bool ok, const std::string &msg)
{
  if (!ok)
    {
      throw ConfigError (msg);
    }
}

} // namespace

std::string_view
ToString (AllocMode m)
{
  return EnumName (m, kAllocModes);
}
std::string_view
ToString (DuplexMode m)
{
  return EnumName (m, kDuplexModes);
}
std::string_view
ToString (FeedbackMode m)
{
  return EnumName (m, kFeedbackModes);
}
AllocMode
ParseAllocMode (std::string_view s)
{
  return ParseEnum (s, kAllocModes, "alloc_mode");
}
DuplexMode
ParseDuplexMode (std::string_view s)
{
  return ParseEnum (s, kDuplexModes, "duplex");
}
FeedbackMode
ParseFeedbackMode (std::string_view s)
{
  return ParseEnum (s, kFeedbackModes, "harq_feedback");
}

double
ScenarioConfig::NackRangeM () const
{
  return nack_range_m.value_or (2.0 * workpiece_edge_m * std::numbers::sqrt2);
}

std::int64_t
ScenarioConfig::HorizonSlots () const
{
  return static_cast<std::int64_t> (std::llround (sim_duration_s * 1000.0));
}

void
Validate (const ScenarioConfig &c)
{
  auto finite = [] (double v) { return std::isfinite (v); };
  Require (c.n_group_agvs >= 2 && c.n_group_agvs <= 8, "n_group_agvs must be in [2, 8]");
  Require (c.n_a2i_links >= 0, "n_a2i_links must be >= 0");
  Require (c.packet_period_ms == 3 || c.packet_period_ms == 10, "packet_period_ms must be 3 or 10");
  Require (c.sensing_window_ms == 100 || c.sensing_window_ms == 1100,
           "sensing_window_ms must be 100 or 1100");
  Require (finite (c.hall_width_m) && c.hall_width_m > 0, "hall_width_m must be > 0");
  Require (finite (c.hall_depth_m) && c.hall_depth_m > 0, "hall_depth_m must be > 0");
  Require (finite (c.workpiece_edge_m) && c.workpiece_edge_m > 0, "workpiece_edge_m must be > 0");
  Require (finite (c.trajectory_margin_m) && c.trajectory_margin_m >= 0,
           "trajectory_margin_m must be >= 0");
  Require (2.0 * c.trajectory_margin_m < std::min (c.hall_width_m, c.hall_depth_m),
           "trajectory_margin_m leaves no room for the trajectory");
  Require (finite (c.a2i_spread_m) && c.a2i_spread_m > 0, "a2i_spread_m must be > 0");
  Require (finite (c.carrier_freq_ghz) && c.carrier_freq_ghz > 0, "carrier_freq_ghz must be > 0");
  Require (finite (c.bandwidth_mhz) && c.bandwidth_mhz > 0, "bandwidth_mhz must be > 0");
  Require (finite (c.tx_power_dbm) && c.tx_power_dbm <= 23.0, "tx_power_dbm must be finite and <= 23");
  for (double g : {c.antenna_gain_tx_dbi, c.antenna_gain_rx_dbi, c.noise_figure_db, c.inband_emission_db,
                   c.rsrp_threshold_dbm})
    {
      Require (finite (g), "gains and thresholds must be finite");
    }
  Require (finite (c.shadowing_sigma_db) && c.shadowing_sigma_db >= 0, "shadowing_sigma_db must be >= 0");
  Require (finite (c.shadowing_decorr_m) && c.shadowing_decorr_m > 0, "shadowing_decorr_m must be > 0");
  Require (c.ctrl_payload_bits >= 0, "ctrl_payload_bits must be >= 0");
  Require (finite (c.group_speed_kmh) && c.group_speed_kmh >= 0, "group_speed_kmh must be >= 0");
  Require (finite (c.a2i_speed_kmh) && c.a2i_speed_kmh >= 0, "a2i_speed_kmh must be >= 0");
  Require (c.packet_size_a2a_bits >= 0 && c.packet_size_a2i_bits >= 0, "packet sizes must be >= 0");
  Require (!c.nack_range_m || (finite (*c.nack_range_m) && *c.nack_range_m >= 0),
           "nack_range_m must be >= 0");
  Require (!c.residual_si_db || finite (*c.residual_si_db), "residual_si_db must be finite");
  Require (finite (c.sim_duration_s) && c.sim_duration_s >= 0, "sim_duration_s must be >= 0");
  Require (finite (c.position_update_s) && c.position_update_s > 0, "position_update_s must be > 0");
  const double updateSlots = c.position_update_s * 1000.0;
  Require (std::abs (updateSlots - std::round (updateSlots)) < 1e-9,
           "position_update_s must be a whole number of slots");
}

ScenarioConfig
ParseScenarioConfig (std::string_view text)
{
  json root;
  try
    {
      root = json::parse (text.begin (), text.end ());
    }
  catch (const json::parse_error &e)
    {
      throw ConfigError (std::string ("malformed configuration: ") + e.what ());
    }
  Require (root.is_object (), "configuration root must be an object");

  std::map<std::string, std::map<std::string, const Field *>> index;
  for (const auto &f : Fields ())
    {
      index[std::string (f.section)][std::string (f.key)] = &f;
    }

  ScenarioConfig config;
  for (const auto &[section, body] : root.items ())
    {
      auto sec = index.find (section);
      Require (sec != index.end (), "unknown section '" + section + "'");
      Require (body.is_object (), "section '" + section + "' must be an object");
      for (const auto &[key, value] : body.items ())
        {
          auto f = sec->second.find (key);
          Require (f != sec->second.end (), "unknown key '" + section + "." + key + "'");
          f->second->read (config, value);
        }
    }
  Validate (config);
  return config;
}

ScenarioConfig
LoadScenarioConfig (const std::string &path)
{
  std::ifstream in (path);
  if (!in)
    {
      throw ConfigError ("cannot read configuration file '" + path + "'");
    }
  std::ostringstream ss;
  ss << in.rdbuf ();
  return ParseScenarioConfig (ss.str ());
}

std::string
DumpScenarioConfig (const ScenarioConfig &config)
{
  json root = json::object ();
  for (const auto &f : Fields ())
    {
      root[std::string (f.section)][std::string (f.key)] = f.write (config);
    }
  return root.dump (2);
}

// --- geometry ---------------------------------------------------------------

double
Trajectory::Length () const
{
  double len = 0.0;
  const std::size_t n = waypoints.size ();
  for (std::size_t i = 0; i + 1 < n; ++i)
    {
      len += Distance (waypoints[i], waypoints[i + 1]);
    }
  if (loop && n > 1)
    {
      len += Distance (waypoints.back (), waypoints.front ());
    }
  return len;
}

namespace {

// Segment index and distance into it for a given arc length.
std::pair<std::size_t, double>
Locate (const Trajectory &t, double s)
{
  const double total = t.Length ();
  const std::size_t n = t.waypoints.size ();
  if (t.loop)
    {
      s = std::fmod (s, total);
      if (s < 0)
        {
          s += total;
        }
    }
  else
    {
      s = std::clamp (s, 0.0, total);
    }
  const std::size_t segments = t.loop ? n : n - 1;
  for (std::size_t i = 0; i < segments; ++i)
    {
      const double len = Distance (t.waypoints[i], t.waypoints[(i + 1) % n]);
      if (s <= len || i + 1 == segments)
        {
          return {i, std::min (s, len)};
        }
      s -= len;
    }
  return {0, 0.0};
}

} // namespace

Vec2
Trajectory::PointAt (double s) const
{
  if (waypoints.size () < 2)
    {
      return waypoints.empty () ? Vec2{} : waypoints.front ();
    }
  auto [i, into] = Locate (*this, s);
  const Vec2 a = waypoints[i];
  const Vec2 b = waypoints[(i + 1) % waypoints.size ()];
  const double len = Distance (a, b);
  return a + (b - a) * (into / len);
}

Vec2
Trajectory::DirectionAt (double s) const
{
  if (waypoints.size () < 2)
    {
      return {};
    }
  auto [i, into] = Locate (*this, s);
  const Vec2 a = waypoints[i];
  const Vec2 b = waypoints[(i + 1) % waypoints.size ()];
  return (b - a) * (1.0 / Distance (a, b));
}

Trajectory
MakeGroupTrajectory (const ScenarioConfig &c)
{
  const double m = c.trajectory_margin_m;
  return Trajectory{{{m, m}, {c.hall_width_m - m, m}, {c.hall_width_m - m, c.hall_depth_m - m},
                     {m, c.hall_depth_m - m}},
                    true};
}

std::vector<Vec2>
BuildFormation (int n_agvs, double edge_m)
{
  if (n_agvs < 2 || n_agvs > 8)
    {
      throw ConfigError ("formation size must be in [2, 8]");
    }
  if (!(edge_m > 0))
    {
      throw ConfigError ("workpiece edge must be > 0");
    }
  const double h = edge_m / 2.0;
  // Clockwise perimeter walk starting at (+h, +h).
  const Vec2 corners[4] = {{h, h}, {h, -h}, {-h, -h}, {-h, h}};
  auto along = [&] (double s) {
    s = std::fmod (s, 4.0 * edge_m);
    const int side = std::min (3, static_cast<int> (s / edge_m));
    const double t = (s - side * edge_m) / edge_m;
    const Vec2 a = corners[side];
    const Vec2 b = corners[(side + 1) % 4];
    return a + (b - a) * t;
  };
  const double spacing = 4.0 * edge_m / n_agvs;
  const double start = (n_agvs % 4 == 0) ? 0.0 : h; // h along the first side is (+h, 0)
  std::vector<Vec2> offsets;
  offsets.reserve (n_agvs);
  for (int i = 0; i < n_agvs; ++i)
    {
      Vec2 p = along (start + i * spacing);
      // Snap round-off so symmetric placements compare exactly.
      p.x = std::round (p.x * 1e9) / 1e9;
      p.y = std::round (p.y * 1e9) / 1e9;
      offsets.push_back (p);
    }
  return offsets;
}

Vec2
ClampToHall (Vec2 p, double width_m, double depth_m)
{
  return {std::clamp (p.x, 0.0, width_m), std::clamp (p.y, 0.0, depth_m)};
}

std::vector<UeState>
DropA2iUes (int m, Vec2 centre, double spread_m, double width_m, double depth_m, Rng &rng, UeId first_id)
{
  std::vector<UeState> ues;
  if (m <= 0)
    {
      return ues;
    }
  ues.reserve (m);
  std::normal_distribution<double> n (0.0, spread_m);
  while (static_cast<int> (ues.size ()) < m)
    {
      const Vec2 p{centre.x + n (rng), centre.y + n (rng)};
      if (p.x < 0 || p.x > width_m || p.y < 0 || p.y > depth_m)
        {
          continue;
        }
      ues.push_back (UeState{first_id + static_cast<UeId> (ues.size ()), UeKind::A2iAgv, p, {}});
    }
  return ues;
}

// --- mobility ---------------------------------------------------------------

Mobility::Mobility (const ScenarioConfig &config, RngStreams const &streams)
    : m_config (config), m_trajectory (MakeGroupTrajectory (config)),
      m_offsets (BuildFormation (config.n_group_agvs, config.workpiece_edge_m)),
      m_mobilityRng (streams.Stream ("mobility")), m_groupSize (config.n_group_agvs)
{
  Rng placement = streams.Stream ("placement");
  m_arc = Uniform01 (placement) * m_trajectory.Length ();

  const Vec2 centre = m_trajectory.PointAt (m_arc);
  const Vec2 vel = m_trajectory.DirectionAt (m_arc) * KmhToMps (config.group_speed_kmh);
  for (int i = 0; i < m_groupSize; ++i)
    {
      const UeKind kind = (i == 0 && config.alloc_mode == AllocMode::Cooperative) ? UeKind::LeaderAgv
                                                                                  : UeKind::GroupAgv;
      m_ues.push_back (UeState{i, kind,
                               ClampToHall (centre + m_offsets[i], config.hall_width_m, config.hall_depth_m),
                               vel});
    }

  const Vec2 gnb{config.hall_width_m / 2.0, config.hall_depth_m / 2.0};
  auto a2i = DropA2iUes (config.n_a2i_links, gnb, config.a2i_spread_m, config.hall_width_m,
                         config.hall_depth_m, placement, m_groupSize);
  for (auto &ue : a2i)
    {
      m_ues.push_back (ue);
      m_waypoints.push_back (DrawWaypoint ());
    }
  m_ues.push_back (UeState{static_cast<UeId> (m_ues.size ()), UeKind::Gnb, gnb, {}});
}

Vec2
Mobility::DrawWaypoint ()
{
  const Vec2 gnb{m_config.hall_width_m / 2.0, m_config.hall_depth_m / 2.0};
  Rng &rng = m_mobilityRng;
  return DropA2iUes (1, gnb, m_config.a2i_spread_m, m_config.hall_width_m, m_config.hall_depth_m, rng)
      .front ()
      .position;
}

std::vector<double>
Mobility::Advance (double dt_s)
{
  std::vector<double> moved (m_ues.size (), 0.0);
  if (dt_s <= 0)
    {
      return moved;
    }

  m_arc = std::fmod (m_arc + KmhToMps (m_config.group_speed_kmh) * dt_s, m_trajectory.Length ());
  const Vec2 centre = m_trajectory.PointAt (m_arc);
  const Vec2 vel = m_trajectory.DirectionAt (m_arc) * KmhToMps (m_config.group_speed_kmh);
  for (int i = 0; i < m_groupSize; ++i)
    {
      const Vec2 next = ClampToHall (centre + m_offsets[i], m_config.hall_width_m, m_config.hall_depth_m);
      moved[i] = Distance (next, m_ues[i].position);
      m_ues[i].position = next;
      m_ues[i].velocity = vel;
    }

  const double speed = KmhToMps (m_config.a2i_speed_kmh);
  for (std::size_t k = 0; k < m_waypoints.size (); ++k)
    {
      UeState &ue = m_ues[m_groupSize + k];
      double budget = speed * dt_s;
      Vec2 p = ue.position;
      while (budget > 0)
        {
          const Vec2 to = m_waypoints[k] - p;
          const double d = to.Norm ();
          if (d <= budget)
            {
              p = m_waypoints[k];
              budget -= d;
              m_waypoints[k] = DrawWaypoint ();
              if (d == 0.0 && budget > 0 && m_waypoints[k] == p)
                {
                  break;
                }
            }
          else
            {
              p = p + to * (budget / d);
              ue.velocity = to * (speed / d);
              budget = 0;
            }
        }
      p = ClampToHall (p, m_config.hall_width_m, m_config.hall_depth_m);
      moved[m_groupSize + k] = Distance (p, ue.position);
      ue.position = p;
    }
  return moved;
}

} // namespace agvsl
