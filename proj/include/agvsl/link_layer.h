#pragma once

#include "agvsl/allocation.h"
#include "agvsl/channel.h"
#include "agvsl/scenario.h"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace agvsl {

enum class PacketKind { A2aCam, A2iData };

struct Packet
{
  std::uint64_t id{0};
  UeId src{-1};
  Slot gen_slot{0};
  int size_bits{0};
  Slot deadline_slot{0};
  PacketKind kind{PacketKind::A2aCam};
};

/// Periodic source: one packet every `period_slots`, first at `phase_slot`.
struct TrafficSource
{
  UeId ue{-1};
  PacketKind kind{PacketKind::A2aCam};
  int period_slots{10};
  int phase_slot{0};
  int size_bits{0};
};

/// One source per group AGV and per A2I AGV, phases drawn uniformly within a
/// period from `phase_rng`.
std::vector<TrafficSource> MakeTrafficSources (const ScenarioConfig &config, Rng &phase_rng);

std::vector<Packet> GenerateTraffic (Slot now, std::span<const TrafficSource> sources, std::uint64_t &next_id);

/// Generation slot of the packet served by a periodic transmission at
/// `tx_slot`: the latest generation instant strictly before it.
Slot ServedGenerationSlot (Slot tx_slot, const TrafficSource &source);

enum class HarqState { Pending, Acked, Failed };

/// Per-packet reception state shared by every intended receiver. Without
/// HARQ it simply records the single attempt.
struct HarqProcess
{
  Packet packet;
  std::vector<UeId> receivers;
  std::vector<double> accumulated_sinr;
  std::vector<bool> decoded;
  int attempts{0};
  HarqState state{HarqState::Pending};
  Slot last_tx_slot{0};
  /// Resource picked on demand after a NACK; cleared once used.
  std::optional<ResourceId> retx_resource;

  int Successes () const;
  bool AllDecoded () const;
};

constexpr int kMaxAttempts = 2;

struct Transmission
{
  UeId tx{-1};
  ResourceId resource;
  Packet packet;
  int attempt{1};
};

using TxQueues = std::vector<std::deque<Packet>>;
using HarqTable = std::map<std::uint64_t, HarqProcess>;
using DecisionTable = std::vector<std::optional<AllocationDecision>>;

/// Evicts packets past their deadline into `expired`, then emits every
/// transmission scheduled for `now`: head-of-queue packets on initial
/// resources and pending HARQ retransmissions on retransmission resources.
/// Consumed occurrences advance by one period; reselection counters tick
/// once per initial occurrence.
std::vector<Transmission> TransmitSlot (Slot now, DecisionTable &decisions, TxQueues &queues, HarqTable &harq,
                                        int period_slots, std::vector<Packet> &expired);

struct ReceptionContext
{
  const ChannelGainMap *gains{nullptr};
  std::span<const UeState> ues;
  double noise_mw{0.0};
  double tx_power_mw{0.0};
  UeId gnb{-1};
  int group_size{0};
  DuplexMode duplex{DuplexMode::Half};
  std::optional<double> residual_si_db;
  double gamma_a2a{0.0};
  double gamma_a2i{0.0};
  bool harq_enabled{false};
};

struct ReceptionOutcome
{
  std::uint64_t packet_id{0};
  UeId tx{-1};
  UeId rx{-1};
  Slot slot{0};
  int attempt{1};
  double sinr{0.0};
  double effective_sinr{0.0};
  bool missed{false};
  bool success{false};
};

/// Intended receivers: every other group member for A2A, the gNB for A2I.
std::vector<UeId> IntendedReceivers (const Packet &p, int group_size, UeId gnb);

/// Evaluates every (transmission, intended receiver) pair. Half-duplex
/// receivers that transmit in this slot miss the packet. With HARQ, A2A
/// receptions are chase-combined: decoded iff accumulated + current SINR
/// reaches the threshold.
std::vector<ReceptionOutcome> ReceiveSlot (Slot now, std::span<const Transmission> txs, const ReceptionContext &ctx,
                                           HarqTable &harq);

enum class Verdict { Ack, Nack };

struct FeedbackEvent
{
  std::uint64_t packet_id{0};
  UeId receiver{-1};
  Verdict verdict{Verdict::Nack};
  Slot slot{0};
};

/// One-bit PSFCH reports for a process after an attempt. NACK-only emits
/// NACKs from failed receivers within `min_range_m` of the sender only.
std::vector<FeedbackEvent> HarqFeedback (const HarqProcess &process, FeedbackMode mode, double min_range_m,
                                         std::span<const UeState> ues, Slot slot);

/// Retransmit iff an eligible receiver reports failure and the attempt
/// budget allows it.
bool HarqDecision (const HarqProcess &process, FeedbackMode mode, double min_range_m, std::span<const UeState> ues);

} // namespace agvsl
