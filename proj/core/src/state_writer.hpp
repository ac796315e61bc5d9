#pragma once

#include <algorithm>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "aglab/core.hpp"
#include "aglab/executor.hpp"

namespace aglab {

/// Mutating access to GatherState shared by the two executors. Every method
/// touches only the rows of the rank it is given, so workers owning distinct
/// ranks may call it concurrently.
class StateWriter {
 public:
  enum class WriteResult : std::uint8_t { Written, Identical, Conflict };

  static std::span<std::byte> row_payload(GatherState& s, Rank rank, Slot slot) {
    return {s.bytes_.data() + s.index(rank, slot) * s.block_size_, s.block_size_};
  }

  static WriteResult write(GatherState& s, Rank rank, Slot slot, Rank origin,
                           std::span<const std::byte> payload) {
    const std::size_t i = s.index(rank, slot);
    std::byte* dst = s.bytes_.data() + i * s.block_size_;
    if (s.origin_[i] >= 0) {
      const bool same = s.origin_[i] == origin.value() &&
                        std::memcmp(dst, payload.data(), s.block_size_) == 0;
      return same ? WriteResult::Identical : WriteResult::Conflict;
    }
    s.origin_[i] = origin.value();
    std::memcpy(dst, payload.data(), s.block_size_);
    return WriteResult::Written;
  }

  static void advance(GatherState& s, Rank rank) { ++s.cursor_[rank.value()]; }

  /// Own blocks at their initial slots, everything else empty.
  static GatherState initial(const CommSchedule& schedule) {
    const ProcessGroup& g = schedule.group;
    GatherState s(g.p, g.block_size);
    for (std::uint32_t r = 0; r < g.p; ++r) {
      const Slot slot = schedule.initial_slot(Rank{r});
      const std::size_t i = s.index(Rank{r}, slot);
      s.origin_[i] = r;
      fill_payload({s.bytes_.data() + i * g.block_size, g.block_size}, Rank{r}, g.seed);
    }
    return s;
  }

  /// Applies the rank's epilogue permutation, then checks that every filled
  /// slot holds the block of the matching origin.
  static void finish_rank(GatherState& s, const CommSchedule& schedule, Rank rank) {
    const std::uint32_t p = s.p_;
    const std::size_t bs = s.block_size_;
    const std::size_t base = s.index(rank, 0);
    if (!schedule.epilogue.empty()) {
      const auto& perm = schedule.epilogue[rank.value()];
      std::vector<std::int64_t> origins(p);
      std::vector<std::byte> bytes(p * bs);
      for (Slot dst = 0; dst < p; ++dst) {
        const std::size_t src = base + perm[dst];
        origins[dst] = s.origin_[src];
        std::memcpy(bytes.data() + dst * bs, s.bytes_.data() + src * bs, bs);
      }
      std::copy(origins.begin(), origins.end(), s.origin_.begin() + static_cast<std::ptrdiff_t>(base));
      std::memcpy(s.bytes_.data() + base * bs, bytes.data(), p * bs);
    }
    for (Slot slot = 0; slot < p; ++slot) {
      const std::int64_t o = s.origin_[base + slot];
      if (o >= 0 && o != slot) {
        throw ExecutionError(ExecutionError::Kind::MisplacedBlock, std::nullopt, rank,
                             "rank " + std::to_string(rank.value()) + " holds origin " +
                                 std::to_string(o) + " in slot " + std::to_string(slot));
      }
    }
  }
};

}  // namespace aglab
