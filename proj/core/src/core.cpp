#include "aglab/core.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <stdexcept>
#include <utility>

namespace aglab {

ProcessGroup make_group(std::uint32_t p, std::size_t block_size, std::uint64_t seed) {
  if (p == 0) {
    throw std::invalid_argument("process count must be at least 1");
  }
  if (block_size == 0) {
    throw std::invalid_argument("block size must be at least 1 byte");
  }
  return ProcessGroup{p, block_size, seed};
}

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void fill_payload(std::span<std::byte> out, Rank origin, std::uint64_t seed) {
  std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (std::uint64_t{origin.value()} + 1));
  std::size_t i = 0;
  while (i < out.size()) {
    const std::uint64_t word = splitmix64(state);
    const std::size_t n = std::min<std::size_t>(8, out.size() - i);
    std::memcpy(out.data() + i, &word, n);
    i += n;
  }
}

Block make_block(const ProcessGroup& group, Rank origin) {
  Block block{origin, std::vector<std::byte>(group.block_size)};
  fill_payload(block.payload, origin, group.seed);
  return block;
}

namespace {

constexpr std::array<std::pair<AlgorithmId, std::string_view>, 6> kAlgorithmNames{{
    {AlgorithmId::Ring, "ring"},
    {AlgorithmId::NeighborExchange, "neighbor_exchange"},
    {AlgorithmId::RecursiveDoubling, "recursive_doubling"},
    {AlgorithmId::Bruck, "bruck"},
    {AlgorithmId::Sparbit, "sparbit"},
    {AlgorithmId::BinomialBroadcast, "binomial_broadcast"},
}};

constexpr std::array<AlgorithmId, 5> kAllgatherByName{
    AlgorithmId::Bruck, AlgorithmId::NeighborExchange, AlgorithmId::RecursiveDoubling,
    AlgorithmId::Ring, AlgorithmId::Sparbit,
};

}  // namespace

std::string_view algorithm_name(AlgorithmId id) noexcept {
  for (const auto& [algo, name] : kAlgorithmNames) {
    if (algo == id) return name;
  }
  return "unknown";
}

std::optional<AlgorithmId> parse_algorithm(std::string_view name) noexcept {
  for (const auto& [algo, n] : kAlgorithmNames) {
    if (n == name) return algo;
  }
  return std::nullopt;
}

std::span<const AlgorithmId> allgather_algorithms() noexcept { return kAllgatherByName; }

std::size_t CommSchedule::blocks_sent(Rank r, std::size_t step) const {
  std::size_t n = 0;
  for (const auto& action : steps.at(step).actions_per_rank.at(r.value())) {
    if (action.direction == Direction::Send) n += action.slots.size();
  }
  return n;
}

std::size_t CommSchedule::blocks_sent(Rank r) const {
  std::size_t n = 0;
  for (std::size_t s = 0; s < steps.size(); ++s) n += blocks_sent(r, s);
  return n;
}

std::size_t CommSchedule::blocks_received(Rank r) const {
  std::size_t n = 0;
  for (const auto& step : steps) {
    for (const auto& action : step.actions_per_rank.at(r.value())) {
      if (action.direction == Direction::Receive) n += action.slots.size();
    }
  }
  return n;
}

std::size_t CommSchedule::expected_receives(Rank r) const {
  if (root) return *root == r ? 0 : 1;
  return group.p - 1;
}

std::string_view violation_kind_name(Violation::Kind kind) noexcept {
  switch (kind) {
    case Violation::Kind::Shape: return "shape";
    case Violation::Kind::BadPeer: return "bad_peer";
    case Violation::Kind::SlotOutOfRange: return "slot_out_of_range";
    case Violation::Kind::DuplicateSlot: return "duplicate_slot";
    case Violation::Kind::UnmatchedSend: return "unmatched_send";
    case Violation::Kind::UnmatchedReceive: return "unmatched_receive";
    case Violation::Kind::CountMismatch: return "count_mismatch";
    case Violation::Kind::ReceiveTotal: return "receive_total";
    case Violation::Kind::BadLayout: return "bad_layout";
  }
  return "unknown";
}

namespace {

bool is_permutation_of_slots(const std::vector<Slot>& perm, std::uint32_t p) {
  if (perm.size() != p) return false;
  std::vector<bool> seen(p, false);
  for (Slot s : perm) {
    if (s >= p || seen[s]) return false;
    seen[s] = true;
  }
  return true;
}

void check_layout(const CommSchedule& s, std::vector<Violation>& out) {
  const std::uint32_t p = s.group.p;
  if (!s.own_slot.empty()) {
    if (s.own_slot.size() != p) {
      out.push_back({Violation::Kind::BadLayout, std::nullopt, Rank{0},
                     "own_slot must list one slot per rank"});
    } else {
      for (std::uint32_t r = 0; r < p; ++r) {
        if (s.own_slot[r] >= p) {
          out.push_back({Violation::Kind::BadLayout, std::nullopt, Rank{r},
                         "own_slot outside [0, p)"});
        }
      }
    }
  }
  if (!s.epilogue.empty()) {
    if (s.epilogue.size() != p) {
      out.push_back({Violation::Kind::BadLayout, std::nullopt, Rank{0},
                     "epilogue must list one permutation per rank"});
      return;
    }
    for (std::uint32_t r = 0; r < p; ++r) {
      if (!is_permutation_of_slots(s.epilogue[r], p)) {
        out.push_back({Violation::Kind::BadLayout, std::nullopt, Rank{r},
                       "epilogue entry is not a permutation of [0, p)"});
      }
    }
  }
  if (s.root && s.root->value() >= p) {
    out.push_back({Violation::Kind::BadLayout, std::nullopt, *s.root, "root outside [0, p)"});
  }
}

}  // namespace

std::vector<Violation> validate_schedule(const CommSchedule& schedule) {
  std::vector<Violation> out;
  const std::uint32_t p = schedule.group.p;
  check_layout(schedule, out);

  std::vector<std::size_t> received(p, 0);
  for (std::size_t si = 0; si < schedule.steps.size(); ++si) {
    const Step& step = schedule.steps[si];
    if (step.actions_per_rank.size() != p) {
      out.push_back({Violation::Kind::Shape, si, Rank{0},
                     "step must carry an action list for every rank"});
      continue;
    }

    // (sender, receiver) -> block counts, in issue order.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> sends;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> recvs;

    for (std::uint32_t r = 0; r < p; ++r) {
      for (const MessageAction& a : step.actions_per_rank[r]) {
        const std::uint32_t peer = a.peer.value();
        if (peer >= p || peer == r) {
          out.push_back({Violation::Kind::BadPeer, si, Rank{r},
                         "peer " + std::to_string(peer) + " is invalid"});
          continue;
        }
        if (a.slots.empty()) {
          out.push_back({Violation::Kind::Shape, si, Rank{r}, "message carries no blocks"});
          continue;
        }
        std::vector<Slot> sorted = a.slots;
        std::sort(sorted.begin(), sorted.end());
        if (sorted.back() >= p) {
          out.push_back({Violation::Kind::SlotOutOfRange, si, Rank{r},
                         "slot " + std::to_string(sorted.back()) + " outside [0, p)"});
        }
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
          out.push_back({Violation::Kind::DuplicateSlot, si, Rank{r},
                         "message lists the same slot twice"});
        }
        if (a.direction == Direction::Send) {
          sends[{r, peer}].push_back(a.slots.size());
        } else {
          recvs[{peer, r}].push_back(a.slots.size());
          received[r] += a.slots.size();
        }
      }
    }

    for (const auto& [key, counts] : sends) {
      const auto it = recvs.find(key);
      const std::size_t matched = it == recvs.end() ? 0 : std::min(counts.size(), it->second.size());
      for (std::size_t k = 0; k < matched; ++k) {
        if (counts[k] != it->second[k]) {
          out.push_back({Violation::Kind::CountMismatch, si, Rank{key.first},
                         "send to " + std::to_string(key.second) + " carries " +
                             std::to_string(counts[k]) + " blocks, receive expects " +
                             std::to_string(it->second[k])});
        }
      }
      for (std::size_t k = matched; k < counts.size(); ++k) {
        out.push_back({Violation::Kind::UnmatchedSend, si, Rank{key.first},
                       "send to " + std::to_string(key.second) + " has no matching receive"});
      }
    }
    for (const auto& [key, counts] : recvs) {
      const auto it = sends.find(key);
      const std::size_t have = it == sends.end() ? 0 : it->second.size();
      for (std::size_t k = have; k < counts.size(); ++k) {
        out.push_back({Violation::Kind::UnmatchedReceive, si, Rank{key.second},
                       "receive from " + std::to_string(key.first) + " has no matching send"});
      }
    }
  }

  for (std::uint32_t r = 0; r < p; ++r) {
    const std::size_t expected = schedule.expected_receives(Rank{r});
    if (received[r] != expected) {
      out.push_back({Violation::Kind::ReceiveTotal, std::nullopt, Rank{r},
                     "receives " + std::to_string(received[r]) + " blocks, expected " +
                         std::to_string(expected)});
    }
  }
  return out;
}

}  // namespace aglab
