#pragma once

#include "agvsl/allocation.h"
#include "agvsl/channel.h"
#include "agvsl/link_layer.h"
#include "agvsl/radio_resources.h"
#include "agvsl/scenario.h"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace agvsl {

enum class Phase { ChannelUpdate, Generate, Select, Transmit, Receive, Feedback, Kpi };

std::string_view ToString (Phase p);

/// Packet counters for one traffic class. Every counted packet ends in
/// exactly one of delivered_all / partial / expired.
struct ClassCounters
{
  std::int64_t generated{0};
  std::int64_t delivered_all{0};
  std::int64_t partial{0};
  std::int64_t expired{0};
  std::int64_t receptions_intended{0};
  std::int64_t receptions_success{0};
  std::int64_t bits_delivered{0};

  std::int64_t DeliveredAny () const { return delivered_all + partial; }
};

struct PacketRecord
{
  std::uint64_t id{0};
  UeId src{-1};
  PacketKind kind{PacketKind::A2aCam};
  Slot gen_slot{0};
  Slot deadline_slot{0};
  bool counted{false};
  int receivers{0};
  int successes{0};
  int attempts{0};
};

struct TxRecord
{
  Slot slot{0};
  UeId tx{-1};
  ResourceId resource;
  std::uint64_t packet_id{0};
  int attempt{1};
};

struct RunReport
{
  ScenarioConfig config;
  ClassCounters a2a;
  ClassCounters a2i;
  double counted_seconds{0.0};
  double wall_time_s{0.0};
  std::int64_t slots_run{0};
  std::int64_t reevaluations{0};
  std::int64_t reevaluation_reselections{0};
  std::int64_t retransmissions{0};
  std::int64_t cooperative_rounds{0};
  int max_attempts{0};

  // Filled only with config.record_events.
  std::vector<PacketRecord> packets;
  std::vector<TxRecord> transmissions;
  std::vector<ReceptionOutcome> receptions;
};

/// Slot-level simulator state. Phase order within a slot is fixed:
/// channel update (every position_update_s) -> generate -> select ->
/// transmit -> receive -> feedback -> kpi.
class SimEngine
{
public:
  using PhaseHook = std::function<void (Slot, Phase)>;

  /// Throws ConfigError for an invalid configuration before any state is built.
  explicit SimEngine (const ScenarioConfig &config);
  ~SimEngine ();
  SimEngine (SimEngine &&) noexcept;

  void SetPhaseHook (PhaseHook hook) { m_hook = std::move (hook); }

  /// Processes one slot and advances the clock by one.
  void StepSlot ();
  bool Done () const { return m_now >= m_horizon; }
  Slot Now () const { return m_now; }

  /// Runs the remaining slots and finalizes everything still in flight.
  RunReport Finish ();

  const std::vector<UeState> &Ues () const;
  const ChannelGainMap &Gains () const;
  const DecisionTable &Decisions () const { return m_decisions; }
  /// Replacement decision waiting to take over from the current one.
  std::optional<AllocationDecision> Pending (UeId ue) const;
  const SensingHistory &History (UeId ue) const { return m_histories.at (ue); }
  const RunReport &Report () const { return m_report; }
  const ResourceGrid &Grid () const { return m_grid; }
  int UpdateSlots () const { return m_updateSlots; }

private:
  void Emit (Phase p);
  void PhaseChannel ();
  void PhaseGenerate ();
  void PhaseSelect ();
  void PhaseTransmit ();
  void PhaseReceive ();
  void PhaseFeedback ();
  void PhaseKpi ();

  void SetDecision (UeId ue, AllocationDecision d);
  void Place (UeId ue, AllocationDecision d);
  void ApplyPending ();
  /// On-demand HARQ retransmission resource for a packet of `ue`.
  std::optional<ResourceId> PickRetx (UeId ue, Slot deadline);
  SelectionWindow PacketWindow (Slot gen) const;
  SensingSelectOptions SelectOptions () const;
  bool IsSensingMode () const;
  void ScheduleGnb ();
  void CooperativeRoundNow ();
  bool ControlDelivered (UeId from, UeId to) const;
  void Finalize (const HarqProcess &proc);
  void FinalizeUntransmitted (const Packet &p);
  void Account (const Packet &p, int receivers, int successes, int attempts);
  bool Counted (const Packet &p) const;

  ScenarioConfig m_config;
  ResourceGrid m_grid;
  RngStreams m_streams;
  struct World;
  std::unique_ptr<World> m_world;

  std::vector<TrafficSource> m_sources;
  TxQueues m_queues;
  HarqTable m_harq;
  DecisionTable m_decisions;
  /// Replacement decisions that take over once the packet served by the
  /// current one is past its deadline.
  struct PendingDecision
  {
    AllocationDecision decision;
    Slot apply_at{0};
  };
  std::vector<std::optional<PendingDecision>> m_pending;
  std::vector<SensingHistory> m_histories;
  std::vector<Rng> m_selectRng;
  Rng m_gnbRng;
  Mode1Scheduler m_mode1;
  LeaderState m_leader;
  int m_leaderCounter{0};

  std::vector<Transmission> m_slotTx;
  std::vector<ReceptionOutcome> m_slotRx;
  std::vector<Packet> m_expired;
  std::vector<std::uint64_t> m_finalizedThisSlot;

  double m_noiseMw{0.0};
  double m_txPowerMw{0.0};
  McsThreshold m_gammaA2a;
  McsThreshold m_gammaA2i;
  McsThreshold m_gammaCtrl;

  Slot m_now{0};
  Slot m_horizon{0};
  Slot m_warmup{0};
  int m_updateSlots{100};
  std::uint64_t m_nextPacketId{0};
  RunReport m_report;
  PhaseHook m_hook;
};

/// Single run from configuration to report; deterministic in the config.
RunReport Run (const ScenarioConfig &config);

} // namespace agvsl
