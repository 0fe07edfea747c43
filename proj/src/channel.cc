#include "agvsl/channel.h"

#include <algorithm>
#include <stdexcept>

namespace agvsl {

double
PathLossDb (LinkKind kind, double distance_m, double fc_ghz)
{
  const double d = std::max (distance_m, kMinDistanceM);
  const double freq = 20.0 * std::log10 (fc_ghz / 5.0);
  switch (kind)
    {
    case LinkKind::A2aLos:
      return 46.8 + 18.7 * std::log10 (d) + freq;
    case LinkKind::A2iNlos:
      return 43.8 + 36.8 * std::log10 (d) + freq;
    }
  return 0.0;
}

ShadowingState
ShadowingStep (const ShadowingState &state, double displacement_m, Rng &rng)
{
  ShadowingState next = state;
  if (displacement_m <= 0.0)
    {
      return next;
    }
  const double rho = std::exp (-displacement_m / state.decorr_m);
  std::normal_distribution<double> n (0.0, state.sigma_db);
  next.value_db = rho * state.value_db + std::sqrt (1.0 - rho * rho) * n (rng);
  return next;
}

ShadowingState
ShadowingStep (const ShadowingState &state, Vec2 new_position, Rng &rng)
{
  ShadowingState next = ShadowingStep (state, Distance (new_position, state.last_update_position), rng);
  next.last_update_position = new_position;
  return next;
}

ShadowingState
ShadowingInit (double sigma_db, double decorr_m, Vec2 position, Rng &rng)
{
  std::normal_distribution<double> n (0.0, sigma_db);
  return ShadowingState{n (rng), position, sigma_db, decorr_m};
}

double
NoisePowerDbm (double bw_hz, double nf_db)
{
  if (!(bw_hz > 0.0))
    {
      throw std::domain_error ("noise bandwidth must be > 0");
    }
  return kThermalNoiseDbmHz + 10.0 * std::log10 (bw_hz) + nf_db;
}

McsThreshold
SinrThreshold (double tb_bits, double subchannel_bw_hz, double slot_s)
{
  const double spectral = tb_bits / (subchannel_bw_hz * slot_s);
  return McsThreshold{std::exp2 (spectral) - 1.0, tb_bits, subchannel_bw_hz, slot_s};
}

double
SinrOnResource (UeId rx, UeId tx, ResourceId resource, const ChannelGainMap &gains,
                std::span<const ActiveTx> active, double noise_mw, double extra_interference_mw)
{
  double signal = 0.0;
  double interference = 0.0;
  for (const ActiveTx &a : active)
    {
      if (a.resource != resource || a.ue == rx)
        {
          continue;
        }
      const double p = a.power_mw * gains.Gain (a.ue, rx, resource);
      if (a.ue == tx)
        {
          signal += p;
        }
      else
        {
          interference += p;
        }
    }
  return signal / (noise_mw + interference + extra_interference_mw);
}

LinkKind
ClassifyLink (const UeState &a, const UeState &b)
{
  return (a.IsGroupMember () && b.IsGroupMember ()) ? LinkKind::A2aLos : LinkKind::A2iNlos;
}

ChannelModel::ChannelModel (const ScenarioConfig &config, std::span<const UeState> ues, Rng rng)
    : m_config (config), m_n (static_cast<int> (ues.size ())), m_gains (m_n), m_rng (std::move (rng))
{
  m_shadowing.resize (static_cast<std::size_t> (m_n) * (m_n - 1) / 2);
  for (int a = 0; a < m_n; ++a)
    {
      for (int b = a + 1; b < m_n; ++b)
        {
          m_shadowing[LinkIndex (a, b)] =
              ShadowingInit (config.shadowing_sigma_db, config.shadowing_decorr_m, {}, m_rng);
        }
    }
  Recompute (ues);
}

std::size_t
ChannelModel::LinkIndex (UeId a, UeId b) const
{
  if (a > b)
    {
      std::swap (a, b);
    }
  // Row-major upper triangle without the diagonal.
  return static_cast<std::size_t> (a) * (2 * m_n - a - 1) / 2 + (b - a - 1);
}

double
ChannelModel::ShadowingDb (UeId a, UeId b) const
{
  return m_shadowing[LinkIndex (a, b)].value_db;
}

void
ChannelModel::Refresh (std::span<const UeState> ues, std::span<const double> displacement)
{
  for (int a = 0; a < m_n; ++a)
    {
      for (int b = a + 1; b < m_n; ++b)
        {
          auto &s = m_shadowing[LinkIndex (a, b)];
          s = ShadowingStep (s, displacement[a] + displacement[b], m_rng);
        }
    }
  Recompute (ues);
}

void
ChannelModel::Recompute (std::span<const UeState> ues)
{
  const double antenna = m_config.antenna_gain_tx_dbi + m_config.antenna_gain_rx_dbi;
  for (int a = 0; a < m_n; ++a)
    {
      for (int b = a + 1; b < m_n; ++b)
        {
          const double pl = PathLossDb (ClassifyLink (ues[a], ues[b]), Distance (ues[a].position, ues[b].position),
                                        m_config.carrier_freq_ghz);
          const double g = DbToLinear (antenna - pl - ShadowingDb (a, b));
          m_gains.Set (a, b, g);
          m_gains.Set (b, a, g);
        }
    }
}

} // namespace agvsl
