#pragma once

#include "agvsl/radio_resources.h"
#include "agvsl/rng.h"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace agvsl {

enum class Origin { RandomInit, Mode2, Mode1, Cooperative, FallbackRandom };

std::string_view ToString (Origin o);

/// A semi-persistent reservation. `resource` names the next occurrence; it
/// recurs every traffic period.
struct AllocationDecision
{
  UeId ue{-1};
  ResourceId resource;
  int reselection_counter{0};
  Origin origin{Origin::RandomInit};
};

constexpr int kMinReselectionCounter = 25;
constexpr int kMaxReselectionCounter = 75;
/// Re-evaluation runs this many slots before a scheduled transmission.
constexpr int kReevaluationLeadSlots = 2;
/// Minimum distance between a transmission and its HARQ retransmission:
/// one slot for the PSFCH verdict, then the next slot.
constexpr int kHarqGapSlots = 2;

int DrawReselectionCounter (Rng &rng);

/// Uniform draw over the window.
AllocationDecision SelectRandom (UeId ue, const ResourceGrid &grid, const SelectionWindow &window, Slot now,
                                 Rng &rng, Origin origin = Origin::RandomInit);

/// Options shared by the sensing-based selectors.
struct SensingSelectOptions
{
  double threshold_dbm{-110.0};
  /// When > 0, slots the owner transmitted in (projected by this period) are
  /// avoided because they were never monitored.
  int own_period_slots{0};
};

/// Uniform draw over the mode-2 candidate set; falls back to SelectRandom
/// (origin fallback_random) when the history holds no observation.
AllocationDecision SelectMode2 (UeId ue, const SensingHistory &history, const SelectionWindow &window,
                                const ResourceGrid &grid, Slot now, Rng &rng,
                                const SensingSelectOptions &options = {});

/// Keeps `decision` if its resource is still a candidate; otherwise redraws
/// uniformly from the current candidate set. The reselection counter is
/// untouched.
AllocationDecision ReevaluateSelection (const AllocationDecision &decision, const SensingHistory &history,
                                        const SelectionWindow &window, const ResourceGrid &grid, Slot now,
                                        Rng &rng, const SensingSelectOptions &options = {});

/// On-demand HARQ retransmission resource: uniform over the candidates in
/// the window, or over the whole window when no candidate is left. Empty
/// when the window is empty.
std::optional<ResourceId> SelectRetxResource (const std::vector<ResourceId> &candidates,
                                              const SelectionWindow &window, const ResourceGrid &grid, Slot now,
                                              Rng &rng);

/// gNB round-robin scheduler. Requesters get orthogonal resources spread
/// across slots first (requester i and i+1 never share a slot while slots
/// remain). Grants hold until the grant epoch expires.
class Mode1Scheduler
{
public:
  explicit Mode1Scheduler (ResourceGrid grid) : m_grid (grid) {}

  std::map<UeId, AllocationDecision> AssignMode1 (std::span<const UeId> requesters, const SelectionWindow &window,
                                                   Slot now, Rng &rng);

  bool EpochExpired () const { return m_epochPeriods <= 0; }
  /// Called once per traffic period.
  void TickPeriod () { --m_epochPeriods; }
  const std::map<UeId, AllocationDecision> &Current () const { return m_current; }

private:
  ResourceGrid m_grid;
  std::map<UeId, AllocationDecision> m_current;
  std::vector<UeId> m_requesters;
  int m_epochPeriods{0};
};

struct Sci3Message
{
  UeId sender{-1};
  std::vector<ResourceId> selected_resources;
  Slot slot_sent{0};
  bool delivered{false};
};

struct LeaderState
{
  UeId leader_id{0};
  std::map<UeId, std::vector<ResourceId>> declared;
  std::map<UeId, ResourceId> assignment;
};

struct CooperativeOptions
{
  double threshold_dbm{-110.0};
  /// Spread members across slots before ranking by RSRP (half duplex).
  bool spread_slots{true};
};

/// One leader round: ingest delivered SCI-3 messages, assign every member a
/// distinct low-RSRP candidate from the leader's view (the members' own
/// declared transmissions are removed from it), then deliver assignments.
/// Members whose assignment is lost fall back to SelectRandom.
std::map<UeId, AllocationDecision> CooperativeRound (LeaderState &leader, std::span<const Sci3Message> msgs,
                                                     std::span<const UeId> members,
                                                     const SensingHistory &leader_history,
                                                     const ResourceGrid &grid, const SelectionWindow &window,
                                                     Slot now, Rng &rng,
                                                     const std::function<bool (UeId)> &assignment_delivered,
                                                     const CooperativeOptions &options = {});

} // namespace agvsl
