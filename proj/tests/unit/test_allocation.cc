#include "agvsl/allocation.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

using namespace agvsl;

namespace {

const ResourceGrid kGrid;
// Upper 1 % point of the chi-square distribution with 29 degrees of freedom.
constexpr double kChi2Crit29 = 49.588;

double
ChiSquare (const std::map<ResourceId, int> &counts, int cells, int n)
{
  const double expected = static_cast<double> (n) / cells;
  double chi2 = 0.0;
  int seen = 0;
  for (const auto &[r, k] : counts)
    {
      chi2 += (k - expected) * (k - expected) / expected;
      ++seen;
    }
  chi2 += (cells - seen) * expected;
  return chi2;
}

SensingHistory
HotSubchannel (int sub, const SelectionWindow &w, Slot now)
{
  SensingHistory h (0, 100);
  for (const auto &r : WindowResources (w, kGrid, now))
    {
      h.Record (r, r.subchannel == sub ? -60.0 : -120.0, now);
    }
  return h;
}

} // namespace

TEST_CASE ("reselection counter range")
{
  Rng rng (1);
  int lo = 1000, hi = -1;
  for (int i = 0; i < 20000; ++i)
    {
      const int c = DrawReselectionCounter (rng);
      lo = std::min (lo, c);
      hi = std::max (hi, c);
    }
  CHECK (lo == kMinReselectionCounter);
  CHECK (hi == kMaxReselectionCounter);
}

TEST_CASE ("random selection: one-resource window")
{
  ResourceGrid one;
  one.n_subchannels = 1;
  Rng rng (3);
  for (int i = 0; i < 100; ++i)
    {
      CHECK (SelectRandom (0, one, {1, 1}, 40, rng).resource == ResourceId{41, 0});
    }
}

TEST_CASE ("random selection is uniform over the window (chi-square)")
{
  Rng rng (2025);
  const int n = 100000;
  std::map<ResourceId, int> counts;
  for (int i = 0; i < n; ++i)
    {
      ++counts[SelectRandom (0, kGrid, {1, 3}, 0, rng).resource];
    }
  CHECK (counts.size () == 30u);
  CHECK (ChiSquare (counts, 30, n) < kChi2Crit29);
  // Per-cell binomial band. Thirty cells are checked at once, so the band
  // is widened to 4 sigma to keep the family-wise false alarm rate near 0.2 %.
  const double p = 1.0 / 30.0;
  const double sigma = std::sqrt (n * p * (1 - p));
  for (const auto &[r, k] : counts)
    {
      CHECK (std::abs (k - n * p) <= 4.0 * sigma);
    }
}

TEST_CASE ("two UEs with separate streams collide about once in 30")
{
  Rng a (11), b (12);
  const int n = 100000;
  int same = 0;
  for (int i = 0; i < n; ++i)
    {
      same += SelectRandom (0, kGrid, {1, 3}, 0, a).resource == SelectRandom (1, kGrid, {1, 3}, 0, b).resource;
    }
  const double p = 1.0 / 30.0;
  CHECK (std::abs (same - n * p) <= 3.0 * std::sqrt (n * p * (1 - p)));
}

TEST_CASE ("mode 2 with an empty history falls back to random selection")
{
  SensingHistory empty (0, 100);
  Rng r1 (5), r2 (5);
  for (int i = 0; i < 200; ++i)
    {
      const auto m = SelectMode2 (0, empty, {1, 10}, kGrid, 0, r1);
      const auto ref = SelectRandom (0, kGrid, {1, 10}, 0, r2);
      CHECK (m.origin == Origin::FallbackRandom);
      CHECK (m.resource == ref.resource);
      CHECK (m.reselection_counter == ref.reselection_counter);
    }
}

TEST_CASE ("mode 2 never picks the excluded subchannel")
{
  const SelectionWindow w{1, 3};
  const auto h = HotSubchannel (6, w, 0);
  Rng rng (9);
  for (int i = 0; i < 5000; ++i)
    {
      const auto d = SelectMode2 (0, h, w, kGrid, 0, rng);
      REQUIRE (d.resource.subchannel != 6);
      CHECK (d.origin == Origin::Mode2);
    }
}

TEST_CASE ("mode 2 with an all-cold history is uniform over the window")
{
  const SelectionWindow w{1, 3};
  SensingHistory h (0, 100);
  for (const auto &r : WindowResources (w, kGrid, 0))
    {
      h.Record (r, -130.0, 0);
    }
  Rng rng (21);
  const int n = 60000;
  std::map<ResourceId, int> counts;
  for (int i = 0; i < n; ++i)
    {
      ++counts[SelectMode2 (0, h, w, kGrid, 0, rng).resource];
    }
  CHECK (ChiSquare (counts, 30, n) < kChi2Crit29);
}

TEST_CASE ("re-evaluation")
{
  const SelectionWindow w{1, 3};
  Rng rng (4);
  AllocationDecision d;
  d.ue = 0;
  d.resource = {2, 6};
  d.reselection_counter = 30;
  d.origin = Origin::Mode2;

  SUBCASE ("still a candidate: unchanged")
  {
    SensingHistory cold (0, 100);
    const auto after = ReevaluateSelection (d, cold, w, kGrid, 0, rng);
    CHECK (after.resource == d.resource);
    CHECK (after.reselection_counter == 30);
  }
  SUBCASE ("newly excluded: moves to a current candidate")
  {
    SensingHistory h (0, 100);
    h.Record (d.resource, -50.0, 0);
    const auto cs = CandidateResources (h, w, kGrid, -110.0, 0);
    REQUIRE (std::find (cs.resources.begin (), cs.resources.end (), d.resource) == cs.resources.end ());
    for (int i = 0; i < 200; ++i)
      {
        const auto after = ReevaluateSelection (d, h, w, kGrid, 0, rng);
        CHECK (after.resource != d.resource);
        CHECK (std::find (cs.resources.begin (), cs.resources.end (), after.resource) != cs.resources.end ());
        CHECK (after.reselection_counter == 30);
      }
  }
  SUBCASE ("entire window hot: escalation restores the full window")
  {
    SensingHistory h (0, 100);
    for (const auto &r : WindowResources (w, kGrid, 0))
      {
        h.Record (r, -60.0, 0);
      }
    const auto after = ReevaluateSelection (d, h, w, kGrid, 0, rng);
    CHECK (after.resource == d.resource);
  }
}

TEST_CASE ("HARQ retransmission resource")
{
  Rng rng (8);
  const SelectionWindow w{2, 4};
  const std::vector<ResourceId> cands{{3, 1}, {4, 7}, {9, 0}};
  std::set<ResourceId> seen;
  for (int i = 0; i < 500; ++i)
    {
      const auto r = SelectRetxResource (cands, w, kGrid, 0, rng);
      REQUIRE (r);
      seen.insert (*r);
    }
  // Candidates outside the window are ignored.
  CHECK (seen == std::set<ResourceId>{{3, 1}, {4, 7}});

  const auto fallback = SelectRetxResource ({}, w, kGrid, 0, rng);
  REQUIRE (fallback);
  CHECK (fallback->slot >= 2);
  CHECK (fallback->slot <= 4);
  CHECK_FALSE (SelectRetxResource (cands, {3, 2}, kGrid, 0, rng));
}

TEST_CASE ("mode 1: orthogonal grants")
{
  Mode1Scheduler gnb (kGrid);
  Rng rng (2);
  const std::vector<UeId> req{0, 1, 2, 3};
  const auto m = gnb.AssignMode1 (req, {1, 3}, 0, rng);
  std::set<ResourceId> used;
  for (const auto &[ue, d] : m)
    {
      used.insert (d.resource);
      CHECK (d.origin == Origin::Mode1);
    }
  CHECK (used.size () == 4u);
  // Slot-first spreading: consecutive requesters change slot.
  for (std::size_t i = 0; i + 1 < req.size (); ++i)
    {
      CHECK (m.at (req[i]).resource.slot != m.at (req[i + 1]).resource.slot);
    }
}

TEST_CASE ("mode 1: grants are stable within an epoch")
{
  Mode1Scheduler gnb (kGrid);
  Rng rng (2);
  const std::vector<UeId> req{0, 1, 2, 3};
  const auto a = gnb.AssignMode1 (req, {1, 3}, 0, rng);
  gnb.TickPeriod ();
  const auto b = gnb.AssignMode1 (req, {1, 3}, 10, rng);
  REQUIRE (a.size () == b.size ());
  for (const auto &[ue, d] : a)
    {
      CHECK (b.at (ue).resource == d.resource);
    }
}

TEST_CASE ("mode 1: 31 requesters on 30 resources leave exactly one fallback")
{
  Mode1Scheduler gnb (kGrid);
  Rng rng (6);
  std::vector<UeId> req;
  for (UeId u = 0; u < 31; ++u)
    req.push_back (u);
  const auto m = gnb.AssignMode1 (req, {1, 3}, 0, rng);
  int fallback = 0;
  std::set<ResourceId> granted;
  for (const auto &[ue, d] : m)
    {
      if (d.origin == Origin::FallbackRandom)
        ++fallback;
      else
        granted.insert (d.resource);
    }
  CHECK (fallback == 1);
  CHECK (granted.size () == 30u);
}

TEST_CASE ("cooperative round: all delivered gives distinct resources")
{
  LeaderState leader;
  SensingHistory h (0, 100);
  const std::vector<UeId> members{0, 1, 2, 3};
  std::vector<Sci3Message> msgs;
  for (UeId u = 1; u < 4; ++u)
    msgs.push_back ({u, {{5, u}}, 0, true});
  Rng rng (1);
  const auto out = CooperativeRound (leader, msgs, members, h, kGrid, {1, 3}, 0, rng, nullptr);
  std::set<ResourceId> used;
  for (const auto &[ue, d] : out)
    {
      CHECK (d.origin == Origin::Cooperative);
      used.insert (d.resource);
    }
  CHECK (used.size () == 4u);
  CHECK (leader.declared.size () == 3u);
}

TEST_CASE ("cooperative round: a lost assignment forces random selection")
{
  LeaderState leader;
  SensingHistory h (0, 100);
  const std::vector<UeId> members{0, 1, 2, 3};
  Rng rng (1);
  const auto out =
      CooperativeRound (leader, {}, members, h, kGrid, {1, 3}, 0, rng, [] (UeId u) { return u != 3; });
  CHECK (out.at (3).origin == Origin::FallbackRandom);
  for (UeId u = 0; u < 3; ++u)
    {
      CHECK (out.at (u).origin == Origin::Cooperative);
    }
}

TEST_CASE ("cooperative round: eight members get the eight quietest resources")
{
  const SelectionWindow w{1, 3};
  SensingHistory h (0, 100);
  Rng shuffle (99);
  auto all = WindowResources (w, kGrid, 0);
  std::shuffle (all.begin (), all.end (), shuffle);
  std::map<ResourceId, double> power;
  for (std::size_t i = 0; i < all.size (); ++i)
    {
      power[all[i]] = -125.0 + 0.5 * static_cast<double> (i); // strictly ordered, all below -110
      h.Record (Observation{all[i], power[all[i]], 50, 0, -std::numeric_limits<double>::infinity (), 0}, 0);
    }
  // Greedy oracle: the eight lowest-RSRP resources.
  std::vector<ResourceId> ranked = all;
  std::sort (ranked.begin (), ranked.end (), [&] (ResourceId a, ResourceId b) { return power[a] < power[b]; });
  const std::set<ResourceId> want (ranked.begin (), ranked.begin () + 8);

  LeaderState leader;
  std::vector<UeId> members;
  for (UeId u = 0; u < 8; ++u)
    members.push_back (u);
  CooperativeOptions opts;
  opts.spread_slots = false;
  Rng rng (3);
  const auto out = CooperativeRound (leader, {}, members, h, kGrid, w, 0, rng, nullptr, opts);
  std::set<ResourceId> got;
  for (const auto &[ue, d] : out)
    got.insert (d.resource);
  CHECK (got == want);
}

TEST_CASE ("cooperative round: slot spreading keeps half-duplex members apart")
{
  LeaderState leader;
  SensingHistory h (0, 100);
  const std::vector<UeId> members{0, 1, 2, 3};
  Rng rng (17);
  const auto out = CooperativeRound (leader, {}, members, h, kGrid, {1, 10}, 0, rng, nullptr);
  std::set<Slot> slots;
  for (const auto &[ue, d] : out)
    slots.insert (d.resource.slot);
  CHECK (slots.size () == 4u);
}
