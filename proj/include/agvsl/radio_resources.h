#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace agvsl {

using UeId = int;
using Slot = std::int64_t;

/// Slot x subchannel pool. The default partition uses 10 subchannels of 10
/// PRBs at 15 kHz (18 MHz of the 20 MHz carrier) with 1 ms slots.
struct ResourceGrid
{
  int n_subchannels{10};
  int subchannel_prbs{10};
  double slot_duration_ms{1.0};
  double scs_khz{15.0};
  double carrier_bw_mhz{20.0};

  double SubchannelBandwidthHz () const { return subchannel_prbs * 12.0 * scs_khz * 1e3; }
  double SlotSeconds () const { return slot_duration_ms / 1000.0; }
  void Validate () const;
};

struct ResourceId
{
  Slot slot{0};
  int subchannel{0};

  auto operator<=> (const ResourceId &) const = default;
};

/// Row-major pairing slot * n_subchannels + subchannel. Throws
/// std::domain_error for a subchannel outside the grid.
std::int64_t ResourceIndex (ResourceId r, const ResourceGrid &grid);
ResourceId ResourceFromIndex (std::int64_t index, const ResourceGrid &grid);

/// One SL-RSRP observation. `period_slots` is the reservation period the
/// sender declared (0: one-shot). `leakage_db` is the in-band emission level
/// the same transmission produces on the other subchannels of its slot
/// (-inf: none).
struct Observation
{
  ResourceId resource;
  double rsrp_dbm{0.0};
  UeId source{-1};
  int period_slots{0};
  double leakage_db{-std::numeric_limits<double>::infinity ()};
  Slot observed_slot{0};
};

/// Per-UE sensing memory over the last `window_slots` slots. Slots in which
/// the owner transmitted are unmonitored under half duplex.
class SensingHistory
{
public:
  SensingHistory () = default;
  SensingHistory (UeId owner, int window_slots, bool full_duplex = false)
      : m_owner (owner), m_window (window_slots), m_fullDuplex (full_duplex)
  {
  }

  UeId Owner () const { return m_owner; }
  int WindowSlots () const { return m_window; }

  /// Marks `slot` as one in which the owner transmitted.
  void MarkTransmitted (Slot slot);
  bool TransmittedIn (Slot slot) const;

  /// Stores `obs` unless the owner was transmitting when it was made (half
  /// duplex). Evicts anything older than the window. Returns whether stored.
  bool Record (const Observation &obs, Slot now);
  bool Record (ResourceId res, double rsrp_dbm, Slot now);

  void Evict (Slot now);

  const std::deque<Observation> &Observations () const { return m_obs; }
  const std::deque<Slot> &TransmittedSlots () const { return m_txSlots; }
  bool Empty () const { return m_obs.empty (); }
  std::size_t Size () const { return m_obs.size (); }

private:
  UeId m_owner{-1};
  int m_window{100};
  bool m_fullDuplex{false};
  std::deque<Observation> m_obs;
  std::deque<Slot> m_txSlots;
};

/// Absolute selection window [now + t1, now + t2] (slots, inclusive).
struct SelectionWindow
{
  int t1{1};
  int t2{10};

  void Validate () const;
  int Slots () const { return t2 - t1 + 1; }
};

std::vector<ResourceId> WindowResources (const SelectionWindow &window, const ResourceGrid &grid, Slot now);

using ObservationFilter = std::function<bool (const Observation &)>;

/// Projected SL-RSRP of every window resource, in WindowResources order.
/// An observation on (s, c) with period P projects onto (s + iP, c), i >= 0;
/// its leakage projects onto the other subchannels of those slots.
/// Unobserved resources read -inf.
std::vector<double> ProjectRsrp (const SensingHistory &history, const SelectionWindow &window,
                                 const ResourceGrid &grid, Slot now, const ObservationFilter &keep = {});

struct CandidateSet
{
  std::vector<ResourceId> resources;
  double final_threshold_dbm{0.0};
  int iterations{0};
  std::size_t window_size{0};
};

constexpr double kCandidateFraction = 0.2;
constexpr double kThresholdStepDb = 3.0;

/// Mode-2 exclusion: drop resources whose projected RSRP exceeds the
/// threshold, raising the threshold 3 dB at a time until at least 20 % of the
/// window survives.
CandidateSet CandidateResources (const SensingHistory &history, const SelectionWindow &window,
                                 const ResourceGrid &grid, double threshold_dbm, Slot now,
                                 const ObservationFilter &keep = {});

} // namespace agvsl
