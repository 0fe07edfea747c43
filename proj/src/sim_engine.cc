#include "agvsl/sim_engine.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace agvsl {

std::string_view
ToString (Phase p)
{
  switch (p)
    {
    case Phase::ChannelUpdate:
      return "channel_update";
    case Phase::Generate:
      return "generate";
    case Phase::Select:
      return "select";
    case Phase::Transmit:
      return "transmit";
    case Phase::Receive:
      return "receive";
    case Phase::Feedback:
      return "feedback";
    case Phase::Kpi:
      return "kpi";
    }
  return "?";
}

struct SimEngine::World
{
  World (const ScenarioConfig &config, const RngStreams &streams)
      : mobility (config, streams), channel (config, mobility.Ues (), streams.Stream ("shadowing"))
  {
  }

  Mobility mobility;
  ChannelModel channel;
  std::unordered_map<std::uint64_t, std::size_t> packetIndex;
};

namespace {

ScenarioConfig
Checked (const ScenarioConfig &config)
{
  Validate (config);
  return config;
}

} // namespace

SimEngine::SimEngine (const ScenarioConfig &config)
    : m_config (Checked (config)), m_streams (config.seed), m_gnbRng (m_streams.Stream ("gnb")),
      m_mode1 (ResourceGrid{})
{
  m_grid.carrier_bw_mhz = m_config.bandwidth_mhz;
  m_grid.Validate ();
  m_mode1 = Mode1Scheduler (m_grid);

  m_world = std::make_unique<World> (m_config, m_streams);
  const auto &ues = m_world->mobility.Ues ();
  const std::size_t n = ues.size ();

  Rng phase = m_streams.Stream ("traffic-phase");
  m_sources = MakeTrafficSources (m_config, phase);
  m_queues.resize (n);
  m_decisions.resize (n);
  m_pending.resize (n);
  for (std::size_t u = 0; u < n; ++u)
    {
      m_histories.emplace_back (static_cast<UeId> (u), m_config.sensing_window_ms,
                                m_config.duplex == DuplexMode::Full);
      m_selectRng.push_back (m_streams.Stream ("selection", u));
    }

  const double bw = m_grid.SubchannelBandwidthHz ();
  m_noiseMw = DbmToMw (NoisePowerDbm (bw, m_config.noise_figure_db));
  m_txPowerMw = DbmToMw (m_config.tx_power_dbm);
  m_gammaA2a = SinrThreshold (m_config.packet_size_a2a_bits, bw, m_grid.SlotSeconds ());
  m_gammaA2i = SinrThreshold (m_config.packet_size_a2i_bits, bw, m_grid.SlotSeconds ());
  m_gammaCtrl = SinrThreshold (m_config.ctrl_payload_bits, bw, m_grid.SlotSeconds ());

  m_horizon = m_config.HorizonSlots ();
  m_warmup = m_config.sensing_window_ms;
  m_updateSlots = static_cast<int> (std::lround (m_config.position_update_s * 1000.0));
  m_leader.leader_id = 0;
  m_report.config = m_config;

  // Sensing results are unavailable at start-up: everyone begins random.
  for (const auto &s : m_sources)
    {
      const SelectionWindow w{s.phase_slot + 1, s.phase_slot + s.period_slots};
      SetDecision (s.ue, SelectRandom (s.ue, m_grid, w, 0, m_selectRng[s.ue], Origin::RandomInit));
    }
}

SimEngine::~SimEngine () = default;
SimEngine::SimEngine (SimEngine &&) noexcept = default;

const std::vector<UeState> &
SimEngine::Ues () const
{
  return m_world->mobility.Ues ();
}

const ChannelGainMap &
SimEngine::Gains () const
{
  return m_world->channel.Gains ();
}

void
SimEngine::Emit (Phase p)
{
  if (m_hook)
    {
      m_hook (m_now, p);
    }
}

void
SimEngine::StepSlot ()
{
  if (Done ())
    {
      return;
    }
  m_slotTx.clear ();
  m_slotRx.clear ();
  if (m_now > 0 && m_now % m_updateSlots == 0)
    {
      PhaseChannel ();
      Emit (Phase::ChannelUpdate);
    }
  PhaseGenerate ();
  Emit (Phase::Generate);
  PhaseSelect ();
  Emit (Phase::Select);
  PhaseTransmit ();
  Emit (Phase::Transmit);
  PhaseReceive ();
  Emit (Phase::Receive);
  PhaseFeedback ();
  Emit (Phase::Feedback);
  PhaseKpi ();
  Emit (Phase::Kpi);
  ++m_now;
  ++m_report.slots_run;
}

void
SimEngine::PhaseChannel ()
{
  const auto moved = m_world->mobility.Advance (m_updateSlots * m_grid.SlotSeconds ());
  m_world->channel.Refresh (m_world->mobility.Ues (), moved);
}

bool
SimEngine::Counted (const Packet &p) const
{
  return p.gen_slot >= m_warmup && p.deadline_slot < m_horizon;
}

void
SimEngine::PhaseGenerate ()
{
  for (const Packet &p : GenerateTraffic (m_now, m_sources, m_nextPacketId))
    {
      m_queues[p.src].push_back (p);
      if (Counted (p))
        {
          (p.kind == PacketKind::A2aCam ? m_report.a2a : m_report.a2i).generated++;
        }
      if (m_config.record_events)
        {
          m_world->packetIndex[p.id] = m_report.packets.size ();
          m_report.packets.push_back ({p.id, p.src, p.kind, p.gen_slot, p.deadline_slot, Counted (p), 0, 0, 0});
        }
    }
}

SelectionWindow
SimEngine::PacketWindow (Slot gen) const
{
  const int p = m_config.PeriodSlots ();
  return SelectionWindow{static_cast<int> (std::max<Slot> (1, gen + 1 - m_now)), static_cast<int> (gen + p - m_now)};
}

SensingSelectOptions
SimEngine::SelectOptions () const
{
  SensingSelectOptions o;
  o.threshold_dbm = m_config.rsrp_threshold_dbm;
  o.own_period_slots = m_config.duplex == DuplexMode::Half ? m_config.PeriodSlots () : 0;
  return o;
}

bool
SimEngine::IsSensingMode () const
{
  return m_config.alloc_mode == AllocMode::Mode2 || m_config.alloc_mode == AllocMode::Mode2NoReeval;
}

void
SimEngine::SetDecision (UeId ue, AllocationDecision d)
{
  const int p = m_config.PeriodSlots ();
  d.ue = ue;
  while (d.resource.slot <= m_now)
    {
      d.resource.slot += p;
    }
  m_decisions[ue] = d;
}

void
SimEngine::Place (UeId ue, AllocationDecision d)
{
  // Periodic decisions are defined modulo the period: move the new one into
  // the window of the oldest packet the current decision has yet to serve,
  // so a hand-over never strands an already generated packet.
  const Slot p = m_config.PeriodSlots ();
  const TrafficSource &src = m_sources[ue];
  const Slot g = m_decisions[ue] ? ServedGenerationSlot (m_decisions[ue]->resource.slot, src)
                                 : ServedGenerationSlot (m_now + 1, src);
  const Slot lo = g + 1;
  Slot shift = lo + (((d.resource.slot - lo) % p) + p) % p - d.resource.slot;
  const bool immediate = d.resource.slot + shift > m_now;
  if (!immediate)
    {
      shift += p;
    }
  d.ue = ue;
  d.resource.slot += shift;
  if (immediate)
    {
      m_pending[ue].reset ();
      m_decisions[ue] = d;
    }
  else
    {
      m_pending[ue] = PendingDecision{d, g + p};
    }
}

void
SimEngine::ApplyPending ()
{
  for (std::size_t u = 0; u < m_pending.size (); ++u)
    {
      if (m_pending[u] && m_now >= m_pending[u]->apply_at)
        {
          SetDecision (static_cast<UeId> (u), m_pending[u]->decision);
          m_pending[u].reset ();
        }
    }
}

void
SimEngine::ScheduleGnb ()
{
  std::vector<UeId> requesters;
  const int k = m_config.n_group_agvs;
  for (int m = 0; m < m_config.n_a2i_links; ++m)
    {
      requesters.push_back (k + m);
    }
  if (m_config.alloc_mode == AllocMode::Mode1)
    {
      for (int u = 0; u < k; ++u)
        {
          requesters.push_back (u);
        }
    }
  const SelectionWindow w{1, m_config.PeriodSlots ()};
  for (auto &[ue, d] : m_mode1.AssignMode1 (requesters, w, m_now, m_gnbRng))
    {
      Place (ue, d);
    }
}

bool
SimEngine::ControlDelivered (UeId from, UeId to) const
{
  const double sinr = m_txPowerMw * Gains ().Gain (from, to) / m_noiseMw;
  return sinr >= m_gammaCtrl.gamma_star_linear;
}

void
SimEngine::CooperativeRoundNow ()
{
  const int k = m_config.n_group_agvs;
  const UeId leader = m_leader.leader_id;
  std::vector<UeId> members;
  std::vector<Sci3Message> msgs;
  for (UeId u = 0; u < k; ++u)
    {
      members.push_back (u);
      if (u != leader && m_decisions[u])
        {
          msgs.push_back ({u, {m_decisions[u]->resource}, m_now, ControlDelivered (u, leader)});
        }
    }
  CooperativeOptions opts;
  opts.threshold_dbm = m_config.rsrp_threshold_dbm;
  opts.spread_slots = m_config.duplex == DuplexMode::Half;
  const SelectionWindow w{1, m_config.PeriodSlots ()};
  auto delivered = [this, leader] (UeId u) { return ControlDelivered (leader, u); };
  auto out = CooperativeRound (m_leader, msgs, members, m_histories[leader], m_grid, w, m_now,
                               m_selectRng[leader], delivered, opts);
  ++m_report.cooperative_rounds;
  for (auto &[ue, d] : out)
    {
      Place (ue, d);
    }
  m_leaderCounter = out.at (leader).reselection_counter;
}

void
SimEngine::PhaseSelect ()
{
  const int p = m_config.PeriodSlots ();
  const bool boundary = m_now % p == 0 && m_now > 0;

  if (boundary)
    {
      m_mode1.TickPeriod ();
      if (m_mode1.EpochExpired ())
        {
          ScheduleGnb ();
        }
      if (m_config.alloc_mode == AllocMode::Cooperative && --m_leaderCounter <= 0)
        {
          CooperativeRoundNow ();
        }
    }

  const int k = m_config.n_group_agvs;
  const auto opts = SelectOptions ();
  const bool selfSelect = m_config.alloc_mode == AllocMode::Random || IsSensingMode ();
  if (selfSelect)
    {
      for (UeId u = 0; u < k; ++u)
        {
          auto &cur = m_decisions[u];
          if (m_pending[u] || !cur || cur->resource.slot != m_now || cur->reselection_counter > 1)
            {
              continue;
            }
          // Last use of the current reservation: pick the next one now, for
          // the packet after the one this occurrence serves.
          const Slot gen = ServedGenerationSlot (m_now, m_sources[u]) + m_config.PeriodSlots ();
          const SelectionWindow w = PacketWindow (gen);
          AllocationDecision d =
              m_config.alloc_mode == AllocMode::Random
                  ? SelectRandom (u, m_grid, w, m_now, m_selectRng[u], Origin::RandomInit)
                  : SelectMode2 (u, m_histories[u], w, m_grid, m_now, m_selectRng[u], opts);
          d.ue = u;
          m_pending[u] = PendingDecision{d, gen};
        }
    }

  if (m_config.alloc_mode == AllocMode::Mode2)
    {
      for (UeId u = 0; u < k; ++u)
        {
          // The upcoming use may belong to a reservation that has not taken
          // over yet.
          AllocationDecision *target = nullptr;
          if (m_pending[u] && m_pending[u]->decision.resource.slot == m_now + kReevaluationLeadSlots)
            {
              target = &m_pending[u]->decision;
            }
          else if (m_decisions[u] && m_decisions[u]->resource.slot == m_now + kReevaluationLeadSlots)
            {
              target = &*m_decisions[u];
            }
          if (target == nullptr)
            {
              continue;
            }
          const Slot gen = ServedGenerationSlot (target->resource.slot, m_sources[u]);
          const SelectionWindow w = PacketWindow (gen);
          if (w.t1 > w.t2)
            {
              continue;
            }
          ++m_report.reevaluations;
          AllocationDecision after = ReevaluateSelection (*target, m_histories[u], w, m_grid, m_now, m_selectRng[u], opts);
          if (after.resource != target->resource)
            {
              ++m_report.reevaluation_reselections;
              *target = after;
            }
        }
    }
}

void
SimEngine::PhaseTransmit ()
{
  m_expired.clear ();
  m_slotTx = TransmitSlot (m_now, m_decisions, m_queues, m_harq, m_config.PeriodSlots (), m_expired);
  ApplyPending ();
  for (const Packet &p : m_expired)
    {
      FinalizeUntransmitted (p);
    }
  // HARQ processes whose retransmission never came.
  for (auto it = m_harq.begin (); it != m_harq.end ();)
    {
      if (it->second.packet.deadline_slot < m_now)
        {
          Finalize (it->second);
          it = m_harq.erase (it);
        }
      else
        {
          ++it;
        }
    }
  for (const auto &t : m_slotTx)
    {
      m_histories[t.tx].MarkTransmitted (m_now);
      if (t.attempt > 1)
        {
          ++m_report.retransmissions;
        }
      if (m_config.record_events)
        {
          m_report.transmissions.push_back ({m_now, t.tx, t.resource, t.packet.id, t.attempt});
        }
    }
}

void
SimEngine::PhaseReceive ()
{
  ReceptionContext ctx;
  ctx.gains = &Gains ();
  ctx.ues = Ues ();
  ctx.noise_mw = m_noiseMw;
  ctx.tx_power_mw = m_txPowerMw;
  ctx.gnb = m_world->mobility.GnbId ();
  ctx.group_size = m_config.n_group_agvs;
  ctx.duplex = m_config.duplex;
  ctx.residual_si_db = m_config.residual_si_db;
  ctx.gamma_a2a = m_gammaA2a.gamma_star_linear;
  ctx.gamma_a2i = m_gammaA2i.gamma_star_linear;
  ctx.harq_enabled = m_config.harq_enabled;
  m_slotRx = ReceiveSlot (m_now, m_slotTx, ctx, m_harq);
  if (m_config.record_events)
    {
      m_report.receptions.insert (m_report.receptions.end (), m_slotRx.begin (), m_slotRx.end ());
    }

  // SL-RSRP sensing by the group members.
  const int p = m_config.PeriodSlots ();
  for (UeId u = 0; u < m_config.n_group_agvs; ++u)
    {
      SensingHistory &h = m_histories[u];
      h.Evict (m_now);
      for (const auto &t : m_slotTx)
        {
          if (t.tx == u)
            {
              continue;
            }
          const double rsrp = m_config.tx_power_dbm + LinearToDb (Gains ().Gain (t.tx, u));
          Observation o{t.resource, rsrp, t.tx, t.attempt == 1 ? p : 0, m_config.inband_emission_db, m_now};
          if (!h.Record (o, m_now))
            {
              break; // unmonitored slot
            }
        }
    }
}

std::optional<ResourceId>
SimEngine::PickRetx (UeId ue, Slot deadline)
{
  const SelectionWindow w{kHarqGapSlots, static_cast<int> (deadline - m_now)};
  if (w.t1 > w.t2)
    {
      return std::nullopt;
    }
  // Own periodic occurrences are excluded: one transmission per UE and slot.
  auto ownSlot = [this, ue] (Slot s) {
    return (m_decisions[ue] && m_decisions[ue]->resource.slot == s) ||
           (m_pending[ue] && m_pending[ue]->decision.resource.slot == s);
  };
  std::vector<ResourceId> pool;
  if (m_config.alloc_mode != AllocMode::Random)
    {
      pool = CandidateResources (m_histories[ue], w, m_grid, m_config.rsrp_threshold_dbm, m_now).resources;
    }
  else
    {
      pool = WindowResources (w, m_grid, m_now);
    }
  std::erase_if (pool, [&] (const ResourceId &r) { return ownSlot (r.slot); });
  if (pool.empty ())
    {
      pool = WindowResources (w, m_grid, m_now);
      std::erase_if (pool, [&] (const ResourceId &r) { return ownSlot (r.slot); });
    }
  if (pool.empty ())
    {
      return std::nullopt;
    }
  return SelectRetxResource (pool, w, m_grid, m_now, m_selectRng[ue]);
}

void
SimEngine::PhaseFeedback ()
{
  const auto &ues = Ues ();
  for (const auto &t : m_slotTx)
    {
      auto it = m_harq.find (t.packet.id);
      if (it == m_harq.end ())
        {
          continue;
        }
      HarqProcess &proc = it->second;
      bool done = true;
      if (proc.packet.kind == PacketKind::A2aCam && !proc.AllDecoded () && m_config.harq_enabled &&
          m_config.alloc_mode != AllocMode::Mode1 && t.attempt < kMaxAttempts &&
          HarqDecision (proc, m_config.harq_feedback, m_config.NackRangeM (), ues))
        {
          proc.retx_resource = PickRetx (t.tx, proc.packet.deadline_slot);
          done = !proc.retx_resource;
        }
      if (done)
        {
          proc.state = proc.AllDecoded () ? HarqState::Acked : HarqState::Failed;
          Finalize (proc);
          m_harq.erase (it);
        }
    }
}

void
SimEngine::PhaseKpi ()
{
  // Accounting happens as packets finalize; nothing is deferred to here.
}

void
SimEngine::Account (const Packet &p, int receivers, int successes, int attempts)
{
  m_report.max_attempts = std::max (m_report.max_attempts, attempts);
  if (m_config.record_events)
    {
      auto it = m_world->packetIndex.find (p.id);
      if (it != m_world->packetIndex.end ())
        {
          PacketRecord &r = m_report.packets[it->second];
          r.receivers = receivers;
          r.successes = successes;
          r.attempts = attempts;
        }
    }
  if (!Counted (p))
    {
      return;
    }
  ClassCounters &c = p.kind == PacketKind::A2aCam ? m_report.a2a : m_report.a2i;
  c.receptions_intended += receivers;
  c.receptions_success += successes;
  if (successes == receivers && receivers > 0)
    {
      c.delivered_all++;
    }
  else if (successes > 0)
    {
      c.partial++;
    }
  else
    {
      c.expired++;
    }
  if (successes > 0)
    {
      c.bits_delivered += p.size_bits;
    }
}

void
SimEngine::Finalize (const HarqProcess &proc)
{
  Account (proc.packet, static_cast<int> (proc.receivers.size ()), proc.Successes (), proc.attempts);
}

void
SimEngine::FinalizeUntransmitted (const Packet &p)
{
  Account (p, static_cast<int> (IntendedReceivers (p, m_config.n_group_agvs, m_world->mobility.GnbId ()).size ()), 0,
           0);
}

std::optional<AllocationDecision>
SimEngine::Pending (UeId ue) const
{
  const auto &p = m_pending.at (ue);
  return p ? std::optional<AllocationDecision> (p->decision) : std::nullopt;
}

RunReport
SimEngine::Finish ()
{
  const auto start = std::chrono::steady_clock::now ();
  while (!Done ())
    {
      StepSlot ();
    }
  for (auto &q : m_queues)
    {
      for (const Packet &p : q)
        {
          FinalizeUntransmitted (p);
        }
      q.clear ();
    }
  for (auto &[id, proc] : m_harq)
    {
      Finalize (proc);
    }
  m_harq.clear ();
  m_report.counted_seconds = std::max<Slot> (0, m_horizon - m_warmup) * m_grid.SlotSeconds ();
  m_report.wall_time_s += std::chrono::duration<double> (std::chrono::steady_clock::now () - start).count ();
  return m_report;
}

RunReport
Run (const ScenarioConfig &config)
{
  SimEngine engine (config);
  return engine.Finish ();
}

} // namespace agvsl
