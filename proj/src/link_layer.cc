#include "agvsl/link_layer.h"

#include <algorithm>

namespace agvsl {

std::vector<TrafficSource>
MakeTrafficSources (const ScenarioConfig &config, Rng &phase_rng)
{
  const int period = config.PeriodSlots ();
  std::vector<TrafficSource> out;
  for (int i = 0; i < config.n_group_agvs; ++i)
    {
      out.push_back ({i, PacketKind::A2aCam, period, static_cast<int> (UniformInt (phase_rng, 0, period - 1)),
                      config.packet_size_a2a_bits});
    }
  for (int m = 0; m < config.n_a2i_links; ++m)
    {
      out.push_back ({config.n_group_agvs + m, PacketKind::A2iData, period,
                      static_cast<int> (UniformInt (phase_rng, 0, period - 1)), config.packet_size_a2i_bits});
    }
  return out;
}

std::vector<Packet>
GenerateTraffic (Slot now, std::span<const TrafficSource> sources, std::uint64_t &next_id)
{
  std::vector<Packet> out;
  for (const auto &s : sources)
    {
      if (now >= s.phase_slot && (now - s.phase_slot) % s.period_slots == 0)
        {
          out.push_back ({next_id++, s.ue, now, s.size_bits, now + s.period_slots, s.kind});
        }
    }
  return out;
}

Slot
ServedGenerationSlot (Slot tx_slot, const TrafficSource &source)
{
  const Slot p = source.period_slots;
  const Slot rel = tx_slot - 1 - source.phase_slot;
  const Slot m = ((rel % p) + p) % p;
  return tx_slot - 1 - m;
}

int
HarqProcess::Successes () const
{
  return static_cast<int> (std::count (decoded.begin (), decoded.end (), true));
}

bool
HarqProcess::AllDecoded () const
{
  return std::all_of (decoded.begin (), decoded.end (), [] (bool b) { return b; });
}

std::vector<Transmission>
TransmitSlot (Slot now, DecisionTable &decisions, TxQueues &queues, HarqTable &harq, int period_slots,
              std::vector<Packet> &expired)
{
  std::vector<Transmission> out;
  for (std::size_t ue = 0; ue < queues.size (); ++ue)
    {
      auto &q = queues[ue];
      while (!q.empty () && q.front ().deadline_slot < now)
        {
          expired.push_back (q.front ());
          q.pop_front ();
        }
      if (ue >= decisions.size () || !decisions[ue])
        {
          continue;
        }
      AllocationDecision &d = *decisions[ue];
      if (d.resource.slot == now)
        {
          if (d.reselection_counter > 0)
            {
              --d.reselection_counter;
            }
          if (!q.empty ())
            {
              out.push_back ({static_cast<UeId> (ue), d.resource, q.front (), 1});
              q.pop_front ();
            }
          d.resource.slot += period_slots;
        }
    }
  for (auto &[id, p] : harq)
    {
      if (p.retx_resource && p.retx_resource->slot == now)
        {
          if (p.attempts < kMaxAttempts && now <= p.packet.deadline_slot)
            {
              out.push_back ({p.packet.src, *p.retx_resource, p.packet, p.attempts + 1});
            }
          p.retx_resource.reset ();
        }
    }
  return out;
}

std::vector<UeId>
IntendedReceivers (const Packet &p, int group_size, UeId gnb)
{
  std::vector<UeId> out;
  if (p.kind == PacketKind::A2iData)
    {
      out.push_back (gnb);
      return out;
    }
  for (UeId r = 0; r < group_size; ++r)
    {
      if (r != p.src)
        {
          out.push_back (r);
        }
    }
  return out;
}

std::vector<ReceptionOutcome>
ReceiveSlot (Slot now, std::span<const Transmission> txs, const ReceptionContext &ctx, HarqTable &harq)
{
  std::vector<ActiveTx> active;
  active.reserve (txs.size ());
  for (const auto &t : txs)
    {
      active.push_back ({t.tx, t.resource, ctx.tx_power_mw});
    }
  auto transmitting = [&] (UeId u) {
    return std::any_of (txs.begin (), txs.end (), [u] (const Transmission &t) { return t.tx == u; });
  };

  std::vector<ReceptionOutcome> out;
  for (const auto &t : txs)
    {
      auto it = harq.find (t.packet.id);
      if (it == harq.end ())
        {
          HarqProcess p;
          p.packet = t.packet;
          p.receivers = IntendedReceivers (t.packet, ctx.group_size, ctx.gnb);
          p.accumulated_sinr.assign (p.receivers.size (), 0.0);
          p.decoded.assign (p.receivers.size (), false);
          it = harq.emplace (t.packet.id, std::move (p)).first;
        }
      HarqProcess &proc = it->second;
      proc.attempts = std::max (proc.attempts, t.attempt);
      proc.last_tx_slot = now;

      const bool a2a = t.packet.kind == PacketKind::A2aCam;
      const double gamma = a2a ? ctx.gamma_a2a : ctx.gamma_a2i;
      const bool combine = ctx.harq_enabled && a2a;
      for (std::size_t i = 0; i < proc.receivers.size (); ++i)
        {
          if (proc.decoded[i])
            {
              continue;
            }
          const UeId rx = proc.receivers[i];
          ReceptionOutcome o{t.packet.id, t.tx, rx, now, t.attempt, 0.0, 0.0, false, false};
          const bool rxBusy = transmitting (rx);
          if (rxBusy && ctx.duplex == DuplexMode::Half)
            {
              o.missed = true;
            }
          else
            {
              double si = 0.0;
              if (rxBusy && ctx.residual_si_db)
                {
                  si = ctx.tx_power_mw * DbToLinear (-std::abs (*ctx.residual_si_db));
                }
              o.sinr = SinrOnResource (rx, t.tx, t.resource, *ctx.gains, active, ctx.noise_mw, si);
            }
          o.effective_sinr = combine ? proc.accumulated_sinr[i] + o.sinr : o.sinr;
          o.success = !o.missed && o.effective_sinr >= gamma;
          if (combine)
            {
              proc.accumulated_sinr[i] = o.effective_sinr;
            }
          if (o.success)
            {
              proc.decoded[i] = true;
            }
          out.push_back (o);
        }
      if (proc.AllDecoded ())
        {
          proc.state = HarqState::Acked;
        }
    }
  return out;
}

std::vector<FeedbackEvent>
HarqFeedback (const HarqProcess &process, FeedbackMode mode, double min_range_m, std::span<const UeState> ues,
              Slot slot)
{
  std::vector<FeedbackEvent> out;
  const Vec2 src = ues[process.packet.src].position;
  for (std::size_t i = 0; i < process.receivers.size (); ++i)
    {
      const UeId rx = process.receivers[i];
      const bool ok = process.decoded[i];
      if (mode == FeedbackMode::AckNack)
        {
          out.push_back ({process.packet.id, rx, ok ? Verdict::Ack : Verdict::Nack, slot});
        }
      else if (!ok && Distance (ues[rx].position, src) <= min_range_m)
        {
          out.push_back ({process.packet.id, rx, Verdict::Nack, slot});
        }
    }
  return out;
}

bool
HarqDecision (const HarqProcess &process, FeedbackMode mode, double min_range_m, std::span<const UeState> ues)
{
  if (process.attempts >= kMaxAttempts)
    {
      return false;
    }
  const auto fb = HarqFeedback (process, mode, min_range_m, ues, process.last_tx_slot + 1);
  return std::any_of (fb.begin (), fb.end (), [] (const FeedbackEvent &e) { return e.verdict == Verdict::Nack; });
}

} // namespace agvsl
