#include "agvsl/allocation.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace agvsl {

std::string_view
ToString (Origin o)
{
  switch (o)
    {
    case Origin::RandomInit:
      return "random_init";
    case Origin::Mode2:
      return "mode2";
    case Origin::Mode1:
      return "mode1";
    case Origin::Cooperative:
      return "cooperative";
    case Origin::FallbackRandom:
      return "fallback_random";
    }
  return "?";
}

int
DrawReselectionCounter (Rng &rng)
{
  return static_cast<int> (UniformInt (rng, kMinReselectionCounter, kMaxReselectionCounter));
}

namespace {

template <typename T>
const T &
PickUniform (const std::vector<T> &v, Rng &rng)
{
  return v[static_cast<std::size_t> (UniformInt (rng, 0, static_cast<std::int64_t> (v.size ()) - 1))];
}

// Resources in `pool` whose slot lies in [lo, hi].
std::vector<ResourceId>
InSlots (const std::vector<ResourceId> &pool, Slot lo, Slot hi)
{
  std::vector<ResourceId> out;
  for (const auto &r : pool)
    {
      if (r.slot >= lo && r.slot <= hi)
        {
          out.push_back (r);
        }
    }
  return out;
}

// Drops candidates lying in slots the owner never monitored.
std::vector<ResourceId>
WithoutUnmonitored (const std::vector<ResourceId> &candidates, const SensingHistory &history, int period)
{
  if (period <= 0 || history.TransmittedSlots ().empty ())
    {
      return candidates;
    }
  std::vector<ResourceId> out;
  for (const auto &r : candidates)
    {
      bool unmonitored = false;
      for (Slot t : history.TransmittedSlots ())
        {
          if (r.slot > t && (r.slot - t) % period == 0)
            {
              unmonitored = true;
              break;
            }
        }
      if (!unmonitored)
        {
          out.push_back (r);
        }
    }
  return out.empty () ? candidates : out;
}

} // namespace

std::optional<ResourceId>
SelectRetxResource (const std::vector<ResourceId> &candidates, const SelectionWindow &window,
                    const ResourceGrid &grid, Slot now, Rng &rng)
{
  if (window.t1 > window.t2)
    {
      return std::nullopt;
    }
  auto pool = InSlots (candidates, now + window.t1, now + window.t2);
  if (pool.empty ())
    {
      pool = WindowResources (window, grid, now);
    }
  if (pool.empty ())
    {
      return std::nullopt;
    }
  return PickUniform (pool, rng);
}

AllocationDecision
SelectRandom (UeId ue, const ResourceGrid &grid, const SelectionWindow &window, Slot now, Rng &rng, Origin origin)
{
  window.Validate ();
  const auto all = WindowResources (window, grid, now);
  AllocationDecision d;
  d.ue = ue;
  d.origin = origin;
  d.resource = PickUniform (all, rng);
  d.reselection_counter = DrawReselectionCounter (rng);
  return d;
}

AllocationDecision
SelectMode2 (UeId ue, const SensingHistory &history, const SelectionWindow &window, const ResourceGrid &grid,
             Slot now, Rng &rng, const SensingSelectOptions &options)
{
  if (history.Empty ())
    {
      return SelectRandom (ue, grid, window, now, rng, Origin::FallbackRandom);
    }
  const auto cs = CandidateResources (history, window, grid, options.threshold_dbm, now);
  const auto pool = WithoutUnmonitored (cs.resources, history, options.own_period_slots);

  AllocationDecision d;
  d.ue = ue;
  d.origin = Origin::Mode2;
  d.resource = PickUniform (pool, rng);
  d.reselection_counter = DrawReselectionCounter (rng);
  return d;
}

AllocationDecision
ReevaluateSelection (const AllocationDecision &decision, const SensingHistory &history,
                     const SelectionWindow &window, const ResourceGrid &grid, Slot now, Rng &rng,
                     const SensingSelectOptions &options)
{
  const auto cs = CandidateResources (history, window, grid, options.threshold_dbm, now);
  if (std::find (cs.resources.begin (), cs.resources.end (), decision.resource) != cs.resources.end ())
    {
      return decision;
    }
  const auto pool = WithoutUnmonitored (cs.resources, history, options.own_period_slots);
  AllocationDecision d = decision;
  d.resource = PickUniform (pool, rng);
  return d;
}

std::map<UeId, AllocationDecision>
Mode1Scheduler::AssignMode1 (std::span<const UeId> requesters, const SelectionWindow &window, Slot now, Rng &rng)
{
  const std::vector<UeId> req (requesters.begin (), requesters.end ());
  if (!EpochExpired () && req == m_requesters)
    {
      return m_current;
    }
  window.Validate ();
  const int slots = window.Slots ();
  const int total = slots * m_grid.n_subchannels;
  const int start = static_cast<int> (UniformInt (rng, 0, total - 1));
  const int epoch = DrawReselectionCounter (rng);

  std::map<UeId, AllocationDecision> out;
  for (std::size_t i = 0; i < req.size (); ++i)
    {
      if (static_cast<int> (i) >= total)
        {
          AllocationDecision d = SelectRandom (req[i], m_grid, window, now, rng, Origin::FallbackRandom);
          d.reselection_counter = epoch;
          out[req[i]] = d;
          continue;
        }
      // Slot-first spreading: consecutive sequence positions change slot.
      const int k = (start + static_cast<int> (i)) % total;
      AllocationDecision d;
      d.ue = req[i];
      d.resource = {now + window.t1 + k % slots, (k / slots) % m_grid.n_subchannels};
      d.reselection_counter = epoch;
      d.origin = Origin::Mode1;
      out[req[i]] = d;
    }
  m_current = out;
  m_requesters = req;
  m_epochPeriods = epoch;
  return out;
}

std::map<UeId, AllocationDecision>
CooperativeRound (LeaderState &leader, std::span<const Sci3Message> msgs, std::span<const UeId> members,
                  const SensingHistory &leader_history, const ResourceGrid &grid, const SelectionWindow &window,
                  Slot now, Rng &rng, const std::function<bool (UeId)> &assignment_delivered,
                  const CooperativeOptions &options)
{
  std::set<UeId> declaredBy;
  for (const auto &m : msgs)
    {
      if (m.delivered)
        {
          leader.declared[m.sender] = m.selected_resources;
          declaredBy.insert (m.sender);
        }
    }
  declaredBy.insert (leader.leader_id);

  // The group's own transmissions are about to be rearranged, so they do
  // not count as interference in the leader's view.
  auto keep = [&] (const Observation &o) { return declaredBy.count (o.source) == 0; };
  const auto cs = CandidateResources (leader_history, window, grid, options.threshold_dbm, now, keep);
  const auto all = WindowResources (window, grid, now);
  const auto rsrp = ProjectRsrp (leader_history, window, grid, now, keep);

  auto rsrpOf = [&] (ResourceId r) {
    const std::size_t i = static_cast<std::size_t> (r.slot - (now + window.t1)) * grid.n_subchannels + r.subchannel;
    return rsrp[i];
  };

  // Random tie-break among equal-RSRP resources, then stable ordering.
  std::vector<ResourceId> ranked = cs.resources;
  std::shuffle (ranked.begin (), ranked.end (), rng);
  std::stable_sort (ranked.begin (), ranked.end (),
                    [&] (ResourceId a, ResourceId b) { return rsrpOf (a) < rsrpOf (b); });
  std::vector<ResourceId> rest;
  for (const auto &r : all)
    {
      if (std::find (cs.resources.begin (), cs.resources.end (), r) == cs.resources.end ())
        {
          rest.push_back (r);
        }
    }
  std::stable_sort (rest.begin (), rest.end (), [&] (ResourceId a, ResourceId b) { return rsrpOf (a) < rsrpOf (b); });
  ranked.insert (ranked.end (), rest.begin (), rest.end ());

  std::set<ResourceId> taken;
  std::map<Slot, int> perSlot;
  leader.assignment.clear ();
  const int counter = DrawReselectionCounter (rng);
  std::map<UeId, AllocationDecision> out;
  for (UeId ue : members)
    {
      const ResourceId *best = nullptr;
      int bestLoad = std::numeric_limits<int>::max ();
      for (const auto &r : ranked)
        {
          if (taken.count (r))
            {
              continue;
            }
          const int load = options.spread_slots ? perSlot[r.slot] : 0;
          if (load < bestLoad)
            {
              best = &r;
              bestLoad = load;
              if (load == 0)
                {
                  break;
                }
            }
        }
      if (best == nullptr)
        {
          // More members than window resources.
          out[ue] = SelectRandom (ue, grid, window, now, rng, Origin::FallbackRandom);
          continue;
        }
      taken.insert (*best);
      ++perSlot[best->slot];
      leader.assignment[ue] = *best;

      if (ue == leader.leader_id || !assignment_delivered || assignment_delivered (ue))
        {
          AllocationDecision d;
          d.ue = ue;
          d.resource = *best;
          d.reselection_counter = counter;
          d.origin = Origin::Cooperative;
          out[ue] = d;
        }
      else
        {
          out[ue] = SelectRandom (ue, grid, window, now, rng, Origin::FallbackRandom);
        }
    }
  return out;
}

} // namespace agvsl
