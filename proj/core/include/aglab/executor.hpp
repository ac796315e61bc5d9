#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aglab/core.hpp"

namespace aglab {

/// The p receive buffers of a group, p slots each. Payload bytes are kept
/// contiguously per rank so large groups do not allocate per block.
class GatherState {
 public:
  GatherState() = default;
  GatherState(std::uint32_t p, std::size_t block_size);

  [[nodiscard]] std::uint32_t size() const noexcept { return p_; }
  [[nodiscard]] std::size_t block_size() const noexcept { return block_size_; }

  [[nodiscard]] bool filled(Rank rank, Slot slot) const;
  /// Origin of the block held in the slot, if any.
  [[nodiscard]] std::optional<Rank> origin(Rank rank, Slot slot) const;
  [[nodiscard]] std::span<const std::byte> payload(Rank rank, Slot slot) const;
  [[nodiscard]] std::optional<Block> block(Rank rank, Slot slot) const;

  /// Steps completed by the rank.
  [[nodiscard]] std::size_t cursor(Rank rank) const { return cursor_.at(rank.value()); }

  /// True if every rank holds every origin at its own slot.
  [[nodiscard]] bool complete() const;

  friend bool operator==(const GatherState&, const GatherState&) = default;

 private:
  friend class StateWriter;

  [[nodiscard]] std::size_t index(Rank rank, Slot slot) const;

  std::uint32_t p_ = 0;
  std::size_t block_size_ = 0;
  std::vector<std::int64_t> origin_;  // -1 when empty
  std::vector<std::byte> bytes_;
  std::vector<std::size_t> cursor_;
};

struct Delivery {
  std::size_t step = 0;
  Rank sender;
  Rank receiver;
  /// Origin rank of the delivered block (its final, origin-indexed slot).
  Slot origin_slot = 0;
  std::size_t bytes = 0;

  friend bool operator==(const Delivery&, const Delivery&) = default;
};

struct ExecutionTrace {
  std::vector<std::vector<Delivery>> steps;
  std::vector<std::size_t> sent_blocks;
  std::vector<std::size_t> received_blocks;
  /// Writes of identical content into an already filled slot.
  std::size_t double_writes = 0;
};

/// One line per delivered block: `step,sender,receiver,origin_slot,bytes`.
void write_trace_csv(std::ostream& out, const ExecutionTrace& trace);

class ExecutionError : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t {
    InvalidSchedule,
    SendFromEmptySlot,
    DoubleWrite,
    MisplacedBlock,
    Timeout,
  };

  ExecutionError(Kind kind, std::optional<std::size_t> step, Rank rank, const std::string& what);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<std::size_t> step() const noexcept { return step_; }
  [[nodiscard]] Rank rank() const noexcept { return rank_; }

 private:
  Kind kind_;
  std::optional<std::size_t> step_;
  Rank rank_;
};

struct ExecuteOptions {
  /// Reject schedules with validate_schedule() violations before running.
  /// Disabled for deliberately malformed schedules (the no-ignore Sparbit
  /// experiment receives more than p - 1 blocks per rank).
  bool validate = true;
  /// Keep per-block deliveries in the trace. Counters are always kept.
  bool record_deliveries = true;
  /// Concurrent executor only: how long a receive may wait for its message.
  std::chrono::milliseconds receive_timeout{10000};
};

struct Execution {
  GatherState state;
  ExecutionTrace trace;
};

/// Step-synchronous reference run: every send of a step reads the state as
/// of the step's start and receives commit afterwards. Throws ExecutionError.
Execution execute(const CommSchedule& schedule, ExecuteOptions options = {});

/// One worker thread per rank exchanging over in-memory point-to-point links
/// with a barrier per step. Final state equals execute(); deliveries within a
/// step are reported in rank order. Throws ExecutionError (Timeout when a
/// receive never arrives).
Execution execute_concurrent(const CommSchedule& schedule, ExecuteOptions options = {});

/// Ground truth: every rank holds the block of origin i in slot i.
GatherState oracle_allgather(const ProcessGroup& group);

/// Compares against the oracle without materialising it.
[[nodiscard]] bool matches_oracle(const GatherState& state, const ProcessGroup& group);

}  // namespace aglab
