#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aglab/core.hpp"

namespace aglab {

/// Raised when an algorithm cannot run on the requested process count.
class RestrictionError : public std::domain_error {
 public:
  enum class Kind : std::uint8_t { OddProcessCount, NonPowerOfTwo };

  RestrictionError(Kind kind, AlgorithmId algorithm, std::uint32_t p);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] AlgorithmId algorithm() const noexcept { return algorithm_; }

 private:
  Kind kind_;
  AlgorithmId algorithm_;
};

[[nodiscard]] constexpr bool is_power_of_two(std::uint64_t x) noexcept {
  return x != 0 && (x & (x - 1)) == 0;
}

/// ceil(log2 x) for x >= 1.
[[nodiscard]] std::uint32_t ceil_log2(std::uint64_t x) noexcept;
/// floor(log2 x) for x >= 1.
[[nodiscard]] std::uint32_t floor_log2(std::uint64_t x) noexcept;

/// True if `algorithm` accepts p processes.
[[nodiscard]] bool supports(AlgorithmId algorithm, std::uint32_t p) noexcept;

CommSchedule ring_schedule(const ProcessGroup& group);

/// Throws RestrictionError(OddProcessCount) for odd p.
CommSchedule neighbor_exchange_schedule(const ProcessGroup& group);

/// Throws RestrictionError(NonPowerOfTwo) unless p is a power of two.
CommSchedule recursive_doubling_schedule(const ProcessGroup& group);

/// Runs over the rotated layout (slot i of rank r holds origin (r + i) mod p)
/// and ends with a per-rank rotation epilogue back to origin order.
CommSchedule bruck_schedule(const ProcessGroup& group);

/// One-to-all broadcast of `root`'s block along a binomial tree whose
/// distances halve every step; sends past the last rank are dropped.
CommSchedule binomial_broadcast_schedule(const ProcessGroup& group, Rank root);

struct SparbitStepPlan {
  std::uint32_t distance = 0;
  std::uint32_t blocks_to_send = 0;
  std::uint32_t data_after = 0;
  bool ignore = false;

  friend bool operator==(const SparbitStepPlan&, const SparbitStepPlan&) = default;
};

struct SparbitPlan {
  std::uint32_t p = 1;
  std::uint32_t num_steps = 0;
  /// Bit d set: the block received as a leaf is withheld on the step with distance d.
  std::uint64_t ignore_steps = 0;
  std::vector<SparbitStepPlan> steps;
};

/// Mask of the step distances on which each rank withholds one block.
[[nodiscard]] std::uint64_t sparbit_ignore_steps(std::uint32_t p) noexcept;

struct SparbitOptions {
  /// Debug switch: drop the ignore mask, so every held block is forwarded.
  /// Produces double writes for any p that is not a power of two.
  bool force_no_ignore = false;
};

[[nodiscard]] SparbitPlan sparbit_plan(std::uint32_t p, SparbitOptions options = {});

CommSchedule sparbit_schedule(const ProcessGroup& group, SparbitOptions options = {});

/// Dispatches to the builder for `algorithm`. BinomialBroadcast uses root 0.
CommSchedule build_schedule(AlgorithmId algorithm, const ProcessGroup& group,
                            SparbitOptions sparbit = {});

/// Number of message steps the algorithm takes on p processes.
[[nodiscard]] std::uint32_t expected_step_count(AlgorithmId algorithm, std::uint32_t p);

}  // namespace aglab
