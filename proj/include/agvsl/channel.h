#pragma once

#include "agvsl/geometry.h"
#include "agvsl/radio_resources.h"
#include "agvsl/rng.h"
#include "agvsl/scenario.h"

#include <cmath>
#include <span>
#include <vector>

namespace agvsl {

constexpr double kThermalNoiseDbmHz = -174.0;
constexpr double kMinDistanceM = 1.0;

inline double
DbToLinear (double db)
{
  return std::pow (10.0, db / 10.0);
}

inline double
LinearToDb (double lin)
{
  return 10.0 * std::log10 (lin);
}

// Powers are carried in milliwatts whenever they are linear.
inline double
DbmToMw (double dbm)
{
  return DbToLinear (dbm);
}

inline double
MwToDbm (double mw)
{
  return LinearToDb (mw);
}

enum class LinkKind { A2aLos, A2iNlos };

/// WINNER+ A1 indoor path loss. Distances below 1 m are clamped.
double PathLossDb (LinkKind kind, double distance_m, double fc_ghz);

struct ShadowingState
{
  double value_db{0.0};
  Vec2 last_update_position;
  double sigma_db{3.0};
  double decorr_m{25.0};
};

/// Gudmundson-correlated log-normal shadowing. The correlation after moving
/// `displacement_m` is exp(-d / decorr_m); the marginal stays N(0, sigma^2).
ShadowingState ShadowingStep (const ShadowingState &state, double displacement_m, Rng &rng);
ShadowingState ShadowingStep (const ShadowingState &state, Vec2 new_position, Rng &rng);

/// Fresh draw from the stationary distribution.
ShadowingState ShadowingInit (double sigma_db, double decorr_m, Vec2 position, Rng &rng);

/// Thermal noise plus receiver noise figure. Throws std::domain_error for a
/// non-positive bandwidth.
double NoisePowerDbm (double bw_hz, double nf_db);

struct McsThreshold
{
  double gamma_star_linear{0.0};
  double tb_bits{0.0};
  double subchannel_bw_hz{0.0};
  double slot_s{0.0};

  double Db () const { return LinearToDb (gamma_star_linear); }
};

/// Shannon-inverted decode threshold: 2^(bits / (B T)) - 1.
McsThreshold SinrThreshold (double tb_bits, double subchannel_bw_hz, double slot_s);

/// Per-link linear power gain (path loss, shadowing and both antenna gains).
/// Block fading: a gain holds for every resource until the next refresh.
class ChannelGainMap
{
public:
  ChannelGainMap () = default;
  explicit ChannelGainMap (int n_ues) : m_n (n_ues), m_gain (static_cast<std::size_t> (n_ues) * n_ues, 1.0) {}

  int Size () const { return m_n; }
  double Gain (UeId tx, UeId rx) const { return m_gain[Index (tx, rx)]; }
  double Gain (UeId tx, UeId rx, ResourceId) const { return Gain (tx, rx); }
  void Set (UeId tx, UeId rx, double linear) { m_gain[Index (tx, rx)] = linear; }

private:
  std::size_t Index (UeId tx, UeId rx) const { return static_cast<std::size_t> (tx) * m_n + rx; }

  int m_n{0};
  std::vector<double> m_gain;
};

struct ActiveTx
{
  UeId ue{0};
  ResourceId resource;
  double power_mw{0.0};
};

/// Received SINR (linear) at `rx` for the signal of `tx` on `resource`:
/// P_tx g / (noise + sum of co-channel transmitters' P g + extra). Only
/// entries of `active` on exactly `resource` (other than `tx`) interfere.
double SinrOnResource (UeId rx, UeId tx, ResourceId resource, const ChannelGainMap &gains,
                       std::span<const ActiveTx> active, double noise_mw, double extra_interference_mw = 0.0);

/// Link classification: AGV-to-AGV inside the group is line of sight,
/// everything touching an A2I AGV or the gNB is non line of sight.
LinkKind ClassifyLink (const UeState &a, const UeState &b);

/// Owns per-link shadowing and the current gain map.
class ChannelModel
{
public:
  ChannelModel (const ScenarioConfig &config, std::span<const UeState> ues, Rng rng);

  /// Advances shadowing by each link's endpoint displacement and recomputes
  /// every gain from the current positions.
  void Refresh (std::span<const UeState> ues, std::span<const double> displacement);

  const ChannelGainMap &Gains () const { return m_gains; }
  double ShadowingDb (UeId a, UeId b) const;

private:
  std::size_t LinkIndex (UeId a, UeId b) const;
  void Recompute (std::span<const UeState> ues);

  ScenarioConfig m_config;
  int m_n;
  std::vector<ShadowingState> m_shadowing; // upper triangle, reciprocal
  ChannelGainMap m_gains;
  Rng m_rng;
};

} // namespace agvsl
