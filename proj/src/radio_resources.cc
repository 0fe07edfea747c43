#include "agvsl/radio_resources.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace agvsl {

void
ResourceGrid::Validate () const
{
  if (n_subchannels <= 0 || subchannel_prbs <= 0 || !(slot_duration_ms > 0) || !(scs_khz > 0))
    {
      throw std::domain_error ("resource grid dimensions must be positive");
    }
  if (n_subchannels * SubchannelBandwidthHz () > carrier_bw_mhz * 1e6 + 1e-6)
    {
      throw std::domain_error ("resource grid exceeds the carrier bandwidth");
    }
}

std::int64_t
ResourceIndex (ResourceId r, const ResourceGrid &grid)
{
  if (r.subchannel < 0 || r.subchannel >= grid.n_subchannels)
    {
      throw std::domain_error ("subchannel " + std::to_string (r.subchannel) + " outside [0, " +
                               std::to_string (grid.n_subchannels) + ")");
    }
  if (r.slot < 0)
    {
      throw std::domain_error ("negative slot index");
    }
  return r.slot * grid.n_subchannels + r.subchannel;
}

ResourceId
ResourceFromIndex (std::int64_t index, const ResourceGrid &grid)
{
  if (index < 0)
    {
      throw std::domain_error ("negative resource index");
    }
  return {index / grid.n_subchannels, static_cast<int> (index % grid.n_subchannels)};
}

void
SensingHistory::MarkTransmitted (Slot slot)
{
  if (m_txSlots.empty () || m_txSlots.back () != slot)
    {
      m_txSlots.push_back (slot);
    }
}

bool
SensingHistory::TransmittedIn (Slot slot) const
{
  return std::find (m_txSlots.begin (), m_txSlots.end (), slot) != m_txSlots.end ();
}

bool
SensingHistory::Record (const Observation &obs, Slot now)
{
  Evict (now);
  if (!m_fullDuplex && TransmittedIn (obs.observed_slot))
    {
      return false;
    }
  if (now - obs.observed_slot > m_window)
    {
      return false;
    }
  m_obs.push_back (obs);
  return true;
}

bool
SensingHistory::Record (ResourceId res, double rsrp_dbm, Slot now)
{
  return Record (Observation{res, rsrp_dbm, -1, 0, -std::numeric_limits<double>::infinity (), res.slot}, now);
}

void
SensingHistory::Evict (Slot now)
{
  // Observations arrive in observation order, so the oldest sit at the front.
  while (!m_obs.empty () && now - m_obs.front ().observed_slot > m_window)
    {
      m_obs.pop_front ();
    }
  while (!m_txSlots.empty () && now - m_txSlots.front () > m_window)
    {
      m_txSlots.pop_front ();
    }
}

void
SelectionWindow::Validate () const
{
  if (t1 < 1 || t2 < t1)
    {
      throw std::domain_error ("selection window requires 1 <= t1 <= t2");
    }
}

std::vector<ResourceId>
WindowResources (const SelectionWindow &window, const ResourceGrid &grid, Slot now)
{
  std::vector<ResourceId> out;
  out.reserve (static_cast<std::size_t> (window.Slots ()) * grid.n_subchannels);
  for (Slot s = now + window.t1; s <= now + window.t2; ++s)
    {
      for (int c = 0; c < grid.n_subchannels; ++c)
        {
          out.push_back ({s, c});
        }
    }
  return out;
}

std::vector<double>
ProjectRsrp (const SensingHistory &history, const SelectionWindow &window, const ResourceGrid &grid, Slot now,
             const ObservationFilter &keep)
{
  const double none = -std::numeric_limits<double>::infinity ();
  const int nsub = grid.n_subchannels;
  std::vector<double> rsrp (static_cast<std::size_t> (window.Slots ()) * nsub, none);
  const Slot first = now + window.t1;
  const Slot last = now + window.t2;

  auto apply = [&] (const Observation &o, Slot s) {
    const std::size_t row = static_cast<std::size_t> (s - first) * nsub;
    if (o.leakage_db > none)
      {
        const double leak = o.rsrp_dbm + o.leakage_db;
        for (int c = 0; c < nsub; ++c)
          {
            rsrp[row + c] = std::max (rsrp[row + c], leak);
          }
      }
    double &own = rsrp[row + o.resource.subchannel];
    own = std::max (own, o.rsrp_dbm);
  };

  for (const Observation &o : history.Observations ())
    {
      if (keep && !keep (o))
        {
          continue;
        }
      const Slot s0 = o.resource.slot;
      if (o.period_slots <= 0)
        {
          if (s0 >= first && s0 <= last)
            {
              apply (o, s0);
            }
          continue;
        }
      // A periodic reservation is honoured while it has been sighted within
      // its last period; older sightings belong to abandoned reservations.
      const int p = o.period_slots;
      if (now - o.observed_slot > p)
        {
          continue;
        }
      for (Slot s = s0; s <= last; s += p)
        {
          if (s >= first)
            {
              apply (o, s);
            }
        }
    }
  return rsrp;
}

CandidateSet
CandidateResources (const SensingHistory &history, const SelectionWindow &window, const ResourceGrid &grid,
                    double threshold_dbm, Slot now, const ObservationFilter &keep)
{
  window.Validate ();
  const auto all = WindowResources (window, grid, now);
  const auto rsrp = ProjectRsrp (history, window, grid, now, keep);
  const std::size_t floor = static_cast<std::size_t> (std::ceil (kCandidateFraction * all.size () - 1e-9));

  CandidateSet out;
  out.window_size = all.size ();
  double threshold = threshold_dbm;
  for (;;)
    {
      ++out.iterations;
      out.resources.clear ();
      for (std::size_t i = 0; i < all.size (); ++i)
        {
          if (!(rsrp[i] > threshold))
            {
              out.resources.push_back (all[i]);
            }
        }
      if (out.resources.size () >= floor)
        {
          break;
        }
      threshold += kThresholdStepDb;
    }
  out.final_threshold_dbm = threshold;
  return out;
}

} // namespace agvsl
