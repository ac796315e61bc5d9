#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aglab {

/// A process rank in [0, p).
class Rank {
 public:
  constexpr Rank() noexcept = default;
  constexpr explicit Rank(std::uint32_t value) noexcept : value_(value) {}

  [[nodiscard]] constexpr std::uint32_t value() const noexcept { return value_; }

  friend constexpr auto operator<=>(Rank, Rank) noexcept = default;

 private:
  std::uint32_t value_ = 0;
};

/// Buffer slot index, in block units. Byte offset is slot * block_size.
using Slot = std::uint32_t;

/// Number of processes, bytes per block, and the seed of the payload
/// generator. Construct through make_group().
struct ProcessGroup {
  std::uint32_t p = 1;
  std::size_t block_size = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const ProcessGroup&, const ProcessGroup&) = default;
};

/// Throws std::invalid_argument when p or block_size is zero.
ProcessGroup make_group(std::uint32_t p, std::size_t block_size, std::uint64_t seed = 0);

/// Fills `out` with the deterministic payload of the block contributed by
/// `origin`. Any corruption of a copied block is detectable by regenerating.
void fill_payload(std::span<std::byte> out, Rank origin, std::uint64_t seed);

struct Block {
  Rank origin;
  std::vector<std::byte> payload;

  friend bool operator==(const Block&, const Block&) = default;
};

Block make_block(const ProcessGroup& group, Rank origin);

enum class AlgorithmId : std::uint8_t {
  Ring,
  NeighborExchange,
  RecursiveDoubling,
  Bruck,
  Sparbit,
  BinomialBroadcast,
};

/// Lower-case identifier used on the command line and in CSV files.
std::string_view algorithm_name(AlgorithmId id) noexcept;
std::optional<AlgorithmId> parse_algorithm(std::string_view name) noexcept;

/// The five Allgather algorithms, sorted by algorithm_name(). This order is
/// the tie-breaking order everywhere a winner is picked.
std::span<const AlgorithmId> allgather_algorithms() noexcept;

enum class Direction : std::uint8_t { Send, Receive };

/// One point-to-point message issued by a rank within a step. Every slot in
/// `slots` moves exactly one block; for a receive, the k-th slot receives the
/// k-th slot of the matching send.
struct MessageAction {
  Direction direction = Direction::Send;
  Rank peer;
  std::vector<Slot> slots;

  friend bool operator==(const MessageAction&, const MessageAction&) = default;
};

/// Concurrent actions of one step, indexed by rank.
struct Step {
  std::vector<std::vector<MessageAction>> actions_per_rank;

  friend bool operator==(const Step&, const Step&) = default;
};

struct CommSchedule {
  AlgorithmId algorithm = AlgorithmId::Ring;
  ProcessGroup group;
  std::vector<Step> steps;

  /// Slot where each rank's own block sits before step 0. Empty means the
  /// origin-indexed layout (rank r starts with its block in slot r).
  std::vector<Slot> own_slot;

  /// Local permutation applied after the last step. Empty means none;
  /// otherwise epilogue[r][final_slot] is the working slot moved there.
  std::vector<std::vector<Slot>> epilogue;

  /// Root of a broadcast schedule; unset for Allgather schedules.
  std::optional<Rank> root;

  [[nodiscard]] std::uint32_t size() const noexcept { return group.p; }
  [[nodiscard]] std::size_t step_count() const noexcept { return steps.size(); }
  [[nodiscard]] Slot initial_slot(Rank r) const noexcept {
    return own_slot.empty() ? r.value() : own_slot[r.value()];
  }

  /// Blocks the rank sends (or receives) summed over every step.
  [[nodiscard]] std::size_t blocks_sent(Rank r) const;
  [[nodiscard]] std::size_t blocks_received(Rank r) const;
  /// Blocks the rank sends in one step.
  [[nodiscard]] std::size_t blocks_sent(Rank r, std::size_t step) const;

  /// Blocks every rank must receive in total: p - 1 for an Allgather,
  /// 1 for each non-root rank of a broadcast.
  [[nodiscard]] std::size_t expected_receives(Rank r) const;
};

struct Violation {
  enum class Kind : std::uint8_t {
    Shape,
    BadPeer,
    SlotOutOfRange,
    DuplicateSlot,
    UnmatchedSend,
    UnmatchedReceive,
    CountMismatch,
    ReceiveTotal,
    BadLayout,
  };

  Kind kind;
  std::optional<std::size_t> step;
  Rank rank;
  std::string message;
};

std::string_view violation_kind_name(Violation::Kind kind) noexcept;

/// Structural check of a schedule. An empty result means every step pairs
/// sends and receives exactly and every rank receives its expected total.
std::vector<Violation> validate_schedule(const CommSchedule& schedule);

/// Circular distance between two ranks in a ring of p ranks.
[[nodiscard]] constexpr std::uint32_t ring_distance(std::uint32_t a, std::uint32_t b,
                                                    std::uint32_t p) noexcept {
  const std::uint32_t fwd = a >= b ? a - b : b - a;
  return fwd < p - fwd ? fwd : p - fwd;
}

/// Mathematical modulo: result always in [0, p).
[[nodiscard]] constexpr std::uint32_t wrap(std::int64_t value, std::uint32_t p) noexcept {
  const auto m = static_cast<std::int64_t>(p);
  const std::int64_t r = value % m;
  return static_cast<std::uint32_t>(r < 0 ? r + m : r);
}

}  // namespace aglab
