#include "agvsl/radio_resources.h"
#include "agvsl/rng.h"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

using namespace agvsl;

namespace {

const ResourceGrid kGrid;

// Exhaustive oracle for one-shot observations inside the window: per
// resource maximum RSRP, then the smallest 3 dB escalation reaching 20 %.
std::vector<ResourceId>
BruteForceCandidates (const std::vector<std::pair<ResourceId, double>> &obs, const SelectionWindow &w, Slot now,
                      double threshold)
{
  std::map<ResourceId, double> power;
  for (const auto &[r, p] : obs)
    {
      auto it = power.find (r);
      power[r] = it == power.end () ? p : std::max (it->second, p);
    }
  std::vector<ResourceId> all;
  for (Slot s = now + w.t1; s <= now + w.t2; ++s)
    for (int c = 0; c < kGrid.n_subchannels; ++c)
      all.push_back ({s, c});
  const std::size_t need = (all.size () * 2 + 9) / 10; // ceil(0.2 n)
  for (int k = 0;; ++k)
    {
      const double t = threshold + 3.0 * k;
      std::vector<ResourceId> out;
      for (const auto &r : all)
        {
          auto it = power.find (r);
          if (it == power.end () || it->second <= t)
            out.push_back (r);
        }
      if (out.size () >= need)
        return out;
    }
}

} // namespace

TEST_CASE ("resource index pairing")
{
  CHECK (ResourceIndex ({0, 0}, kGrid) == 0);
  CHECK (ResourceFromIndex (0, kGrid) == ResourceId{0, 0});
  CHECK (ResourceIndex ({5, 3}, kGrid) == 53);
  CHECK (ResourceFromIndex (53, kGrid) == ResourceId{5, 3});
  CHECK_THROWS_AS (ResourceIndex ({4, kGrid.n_subchannels}, kGrid), std::domain_error);
  CHECK_THROWS_AS (ResourceIndex ({4, -1}, kGrid), std::domain_error);
  for (std::int64_t i = 0; i < 500; ++i)
    {
      CHECK (ResourceIndex (ResourceFromIndex (i, kGrid), kGrid) == i);
    }
}

TEST_CASE ("default grid fits the carrier")
{
  CHECK_NOTHROW (kGrid.Validate ());
  CHECK (kGrid.SubchannelBandwidthHz () == doctest::Approx (1.8e6));
  ResourceGrid wide;
  wide.n_subchannels = 12;
  CHECK_THROWS_AS (wide.Validate (), std::domain_error);
}

TEST_CASE ("sensing history")
{
  SensingHistory h (0, 100);
  SUBCASE ("one record")
  {
    CHECK (h.Record ({10, 2}, -90.0, 10));
    CHECK (h.Size () == 1u);
  }
  SUBCASE ("records older than the window are evicted")
  {
    h.Record ({10, 2}, -90.0, 10);
    h.Evict (10 + 100);
    CHECK (h.Size () == 1u);
    h.Evict (10 + 100 + 1);
    CHECK (h.Empty ());
  }
  SUBCASE ("nothing is stored for a slot the owner transmitted in")
  {
    h.MarkTransmitted (12);
    CHECK_FALSE (h.Record ({12, 4}, -80.0, 12));
    CHECK (h.Empty ());
    CHECK (h.Record ({13, 4}, -80.0, 13));
  }
  SUBCASE ("full duplex has no sensing gaps")
  {
    SensingHistory fd (0, 100, true);
    fd.MarkTransmitted (12);
    CHECK (fd.Record ({12, 4}, -80.0, 12));
  }
}

TEST_CASE ("selection window contract")
{
  CHECK_NOTHROW ((SelectionWindow{1, 10}).Validate ());
  CHECK_NOTHROW ((SelectionWindow{1, 1}).Validate ());
  CHECK_THROWS_AS ((SelectionWindow{0, 10}).Validate (), std::domain_error);
  CHECK_THROWS_AS ((SelectionWindow{5, 4}).Validate (), std::domain_error);
  CHECK (WindowResources ({1, 3}, kGrid, 100).size () == 30u);
  CHECK (WindowResources ({1, 3}, kGrid, 100).front () == ResourceId{101, 0});
}

TEST_CASE ("candidate set: empty history keeps the whole window")
{
  SensingHistory h (0, 100);
  const auto cs = CandidateResources (h, {1, 3}, kGrid, -110.0, 100);
  CHECK (cs.resources == WindowResources ({1, 3}, kGrid, 100));
  CHECK (cs.iterations == 1);
}

TEST_CASE ("candidate set: every resource at -60 dBm needs 18 passes")
{
  SensingHistory h (0, 100);
  const SelectionWindow w{1, 3};
  for (const auto &r : WindowResources (w, kGrid, 100))
    {
      h.Record (r, -60.0, 100);
    }
  const auto cs = CandidateResources (h, w, kGrid, -110.0, 100);
  CHECK (cs.iterations == static_cast<int> (std::ceil ((-60.0 - -110.0) / 3.0)) + 1);
  CHECK (cs.iterations == 18);
  CHECK (cs.resources.size () == 30u);
  CHECK (cs.final_threshold_dbm >= -60.0);
}

TEST_CASE ("candidate set: one hot subchannel leaves 27 of 30")
{
  SensingHistory h (0, 100);
  const SelectionWindow w{1, 3};
  std::vector<std::pair<ResourceId, double>> obs;
  for (const auto &r : WindowResources (w, kGrid, 100))
    {
      obs.push_back ({r, r.subchannel == 4 ? -60.0 : -120.0});
    }
  for (const auto &[r, p] : obs)
    {
      h.Record (r, p, 100);
    }
  const auto cs = CandidateResources (h, w, kGrid, -110.0, 100);
  CHECK (cs.resources.size () == 27u);
  CHECK (cs.resources == BruteForceCandidates (obs, w, 100, -110.0));
  CHECK (std::none_of (cs.resources.begin (), cs.resources.end (),
                       [] (const ResourceId &r) { return r.subchannel == 4; }));
}

TEST_CASE ("candidate set matches exhaustive enumeration on random small windows")
{
  Rng rng (77);
  for (int trial = 0; trial < 300; ++trial)
    {
      const Slot now = 50;
      const int t2 = static_cast<int> (UniformInt (rng, 1, 3));
      const SelectionWindow w{1, t2};
      SensingHistory h (0, 100);
      std::vector<std::pair<ResourceId, double>> obs;
      const int n = static_cast<int> (UniformInt (rng, 0, 40));
      const auto all = WindowResources (w, kGrid, now);
      for (int i = 0; i < n; ++i)
        {
          const ResourceId r = all[static_cast<std::size_t> (UniformInt (rng, 0, all.size () - 1))];
          const double p = -130.0 + 80.0 * Uniform01 (rng);
          obs.push_back ({r, p});
          h.Record (r, p, now);
        }
      const double thr = -110.0;
      const auto cs = CandidateResources (h, w, kGrid, thr, now);
      REQUIRE (cs.resources == BruteForceCandidates (obs, w, now, thr));
      REQUIRE (cs.resources.size () * 5 >= all.size ());
    }
}

TEST_CASE ("periodic observations project forward while recent")
{
  const SelectionWindow w{1, 10};
  SensingHistory h (0, 100);
  // Sighted at slot 95 with a 10-slot reservation: occupies 105 in the window.
  h.Record (Observation{{95, 3}, -70.0, 1, 10, -std::numeric_limits<double>::infinity (), 95}, 100);
  auto rsrp = ProjectRsrp (h, w, kGrid, 100);
  CHECK (rsrp[(105 - 101) * 10 + 3] == -70.0);
  CHECK (std::isinf (rsrp[(105 - 101) * 10 + 2]));

  // The same sighting is stale once more than a period has passed.
  rsrp = ProjectRsrp (h, w, kGrid, 106);
  CHECK (std::all_of (rsrp.begin (), rsrp.end (), [] (double v) { return std::isinf (v); }));
}

TEST_CASE ("in-band emission leaks onto the other subchannels of the slot")
{
  const SelectionWindow w{1, 2};
  SensingHistory h (0, 100);
  h.Record (Observation{{101, 0}, -50.0, 1, 0, -40.0, 100}, 100);
  const auto rsrp = ProjectRsrp (h, w, kGrid, 100);
  CHECK (rsrp[0] == -50.0);
  for (int c = 1; c < 10; ++c)
    {
      CHECK (rsrp[c] == doctest::Approx (-90.0));
    }
  CHECK (std::isinf (rsrp[10]));
}

TEST_CASE ("observation filter drops selected sources")
{
  const SelectionWindow w{1, 2};
  SensingHistory h (0, 100);
  h.Record (Observation{{101, 0}, -50.0, 7, 0, -std::numeric_limits<double>::infinity (), 100}, 100);
  const auto cs = CandidateResources (h, w, kGrid, -110.0, 100, [] (const Observation &o) { return o.source != 7; });
  CHECK (cs.resources.size () == 20u);
}
