#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aglab/core.hpp"

namespace aglab {

/// Hockney message cost: alpha + bytes * beta.
struct HockneyParams {
  double alpha = 0.0;
  double beta = 0.0;

  friend bool operator==(const HockneyParams&, const HockneyParams&) = default;
};

/// Parameters of the default uniform topology.
inline constexpr HockneyParams kDefaultUniformParams{1.0, 0.001};
inline constexpr std::uint32_t kDefaultUniformSlots = 1U << 20;

struct TopologyLevel {
  std::string name;
  HockneyParams params;
};

/// Description of a topology subtree: a machine (leaf, `slots` > 0) or a
/// switch grouping its children.
struct TopologyNode {
  std::uint32_t slots = 0;
  std::vector<TopologyNode> children;

  static TopologyNode machine(std::uint32_t slots) { return {slots, {}}; }
  static TopologyNode group(std::vector<TopologyNode> children) { return {0, std::move(children)}; }
};

/// Hierarchical machine model. Level 0 prices messages between two slots of
/// the same machine; level k prices messages whose endpoints first meet at a
/// depth-k ancestor; the last level is the root (the core).
class Topology {
 public:
  /// Every machine must sit at depth levels.size() - 1 under `root`.
  /// Throws std::invalid_argument on malformed input.
  Topology(std::vector<TopologyLevel> levels, const TopologyNode& root);

  /// One machine, one level: every message costs alpha + bytes * beta.
  static Topology uniform(HockneyParams params, std::uint32_t slots);

  /// Two-tier tree: 5 and 11 machines of 8 cores under two leaf switches
  /// joined by a core switch. Alpha/beta values are illustrative placeholders,
  /// with the core priced 4x the leaf switch.
  static Topology yahoo();

  /// Flat: 5 machines of 32 cores on one switch. Placeholder alpha/beta.
  static Topology cervino();

  [[nodiscard]] std::size_t level_count() const noexcept { return levels_.size(); }
  [[nodiscard]] const TopologyLevel& level(std::size_t i) const { return levels_.at(i); }
  [[nodiscard]] const std::vector<TopologyLevel>& levels() const noexcept { return levels_; }

  [[nodiscard]] std::size_t machine_count() const noexcept { return slots_.size(); }
  [[nodiscard]] std::uint32_t slots(std::size_t machine) const { return slots_.at(machine); }
  [[nodiscard]] std::uint64_t total_slots() const noexcept;

  /// Level of the deepest common ancestor of two machines (0 if equal).
  [[nodiscard]] std::size_t common_level(std::size_t a, std::size_t b) const;

  /// Index of the machine's ancestor at `level` (level 0 is the machine itself).
  [[nodiscard]] std::size_t ancestor(std::size_t machine, std::size_t level) const;

 private:
  std::vector<TopologyLevel> levels_;
  std::vector<std::uint32_t> slots_;
  // ancestors_[machine][level]
  std::vector<std::vector<std::size_t>> ancestors_;
};

enum class MappingKind : std::uint8_t { Sequential, Cyclic, Explicit };

std::string_view mapping_name(MappingKind kind) noexcept;
/// Accepts "sequential" and "cyclic".
std::optional<MappingKind> parse_mapping(std::string_view name) noexcept;

struct Placement {
  std::size_t machine = 0;
  std::uint32_t slot = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct RankMapping {
  MappingKind kind = MappingKind::Sequential;
  std::vector<Placement> placement;  // indexed by rank

  [[nodiscard]] std::uint32_t size() const noexcept {
    return static_cast<std::uint32_t>(placement.size());
  }
  [[nodiscard]] std::size_t machine_of(Rank r) const { return placement.at(r.value()).machine; }
};

class InsufficientSlots : public std::invalid_argument {
 public:
  InsufficientSlots(std::uint32_t p, std::uint64_t slots);
};

/// Sequential fills each machine before moving to the next; Cyclic deals
/// ranks round-robin over the machines that still have free slots.
/// Throws InsufficientSlots when the topology has fewer than p slots.
RankMapping make_mapping(MappingKind kind, std::uint32_t p, const Topology& topology);

/// Rank r goes to machine machines[r], next free slot. Throws
/// InsufficientSlots when a machine is over-subscribed.
RankMapping make_explicit_mapping(const std::vector<std::size_t>& machines,
                                  const Topology& topology);

struct StepCost {
  std::size_t step = 0;
  double time = 0.0;
  /// Largest circular rank-space distance of any message in the step.
  std::uint32_t max_distance = 0;
  /// Topology level of the message that sets the step time.
  std::size_t level = 0;
};

struct CostReport {
  /// Sum of the step times plus the epilogue charge. Computed per level from
  /// integer message and byte counts, so it matches the closed forms exactly.
  double total_time = 0.0;
  std::vector<StepCost> per_step;
  /// Bytes whose endpoints first meet at each level.
  std::vector<std::uint64_t> per_level_traffic;
  double epilogue_time = 0.0;

  /// Bytes crossing the topmost level.
  [[nodiscard]] std::uint64_t core_bytes() const noexcept {
    return per_level_traffic.empty() ? 0 : per_level_traffic.back();
  }
};

struct SimulateOptions {
  /// Cost per byte of the local epilogue permutation (Bruck's final
  /// rotation). Zero by default; nothing is charged unless set.
  double epilogue_beta = 0.0;
};

/// Topology-aware Hockney cost of a schedule: each message costs the
/// (alpha, beta) of the level where its endpoints meet, a step costs its most
/// expensive message, and the total is the sum of step costs.
/// `total_bytes` is m; each block carries m / p bytes (m must be a multiple of p).
/// Throws InsufficientSlots if the mapping does not cover the schedule's ranks.
CostReport simulate_cost(const CommSchedule& schedule, const Topology& topology,
                         const RankMapping& mapping, std::uint64_t total_bytes,
                         SimulateOptions options = {});

/// Textbook Hockney cost of the algorithm. For BinomialBroadcast, m is the
/// size of the broadcast message. Throws RestrictionError when the algorithm
/// does not support p.
double closed_form_cost(AlgorithmId algorithm, std::uint32_t p, std::uint64_t total_bytes,
                        HockneyParams params);

struct LocalityStep {
  std::size_t step = 0;
  /// Sum over all messages of circular distance x blocks.
  std::uint64_t weighted_distance = 0;
  std::uint32_t max_distance = 0;
  /// Largest circular distance x blocks of a single message.
  std::uint64_t max_message_weight = 0;

  /// Weighted distance averaged over the p ranks.
  [[nodiscard]] double per_rank(std::uint32_t p) const noexcept {
    return static_cast<double>(weighted_distance) / p;
  }
};

std::vector<LocalityStep> locality_profile(const CommSchedule& schedule);

}  // namespace aglab
