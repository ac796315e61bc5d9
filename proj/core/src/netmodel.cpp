#include "aglab/netmodel.hpp"

#include "aglab/schedules.hpp"

namespace aglab {

namespace {

/// alpha count and byte count charged at each level; the total is formed
/// from these integers so equal counts give bit-identical doubles.
struct LevelCharges {
  std::vector<std::uint64_t> messages;
  std::vector<std::uint64_t> bytes;

  explicit LevelCharges(std::size_t levels) : messages(levels, 0), bytes(levels, 0) {}

  [[nodiscard]] double total(const std::vector<TopologyLevel>& levels) const {
    double t = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      if (messages[l] == 0 && bytes[l] == 0) continue;
      t += static_cast<double>(messages[l]) * levels[l].params.alpha +
           static_cast<double>(bytes[l]) * levels[l].params.beta;
    }
    return t;
  }
};

double hockney(std::uint64_t messages, std::uint64_t bytes, HockneyParams h) {
  return static_cast<double>(messages) * h.alpha + static_cast<double>(bytes) * h.beta;
}

}  // namespace

CostReport simulate_cost(const CommSchedule& schedule, const Topology& topology,
                         const RankMapping& mapping, std::uint64_t total_bytes,
                         SimulateOptions options) {
  const std::uint32_t p = schedule.group.p;
  if (mapping.size() < p) throw InsufficientSlots(p, mapping.size());
  std::uint64_t block_bytes = total_bytes;
  if (!schedule.root) {
    if (total_bytes % p != 0) {
      throw std::invalid_argument("total bytes must be a multiple of the process count");
    }
    block_bytes = total_bytes / p;
  }

  const auto& levels = topology.levels();
  CostReport report;
  report.per_level_traffic.assign(levels.size(), 0);
  LevelCharges charges(levels.size());

  for (std::size_t si = 0; si < schedule.steps.size(); ++si) {
    const Step& step = schedule.steps[si];
    StepCost cost{si, 0.0, 0, 0};
    std::uint64_t step_bytes = 0;
    bool any = false;
    for (std::uint32_t r = 0; r < p; ++r) {
      const std::size_t src = mapping.machine_of(Rank{r});
      for (const MessageAction& a : step.actions_per_rank[r]) {
        if (a.direction != Direction::Send) continue;
        const std::size_t level = topology.common_level(src, mapping.machine_of(a.peer));
        const std::uint64_t bytes = a.slots.size() * block_bytes;
        const double t = hockney(1, bytes, levels[level].params);
        report.per_level_traffic[level] += bytes;
        cost.max_distance = std::max(cost.max_distance, ring_distance(r, a.peer.value(), p));
        if (!any || t > cost.time) {
          cost.time = t;
          cost.level = level;
          step_bytes = bytes;
          any = true;
        }
      }
    }
    if (any) {
      ++charges.messages[cost.level];
      charges.bytes[cost.level] += step_bytes;
    }
    report.per_step.push_back(cost);
  }

  report.total_time = charges.total(levels);
  if (!schedule.epilogue.empty() && options.epilogue_beta > 0.0) {
    report.epilogue_time = static_cast<double>(std::uint64_t{p} * block_bytes) * options.epilogue_beta;
    report.total_time += report.epilogue_time;
  }
  return report;
}

double closed_form_cost(AlgorithmId algorithm, std::uint32_t p, std::uint64_t total_bytes,
                        HockneyParams params) {
  const std::uint32_t steps = expected_step_count(algorithm, p);
  if (algorithm == AlgorithmId::BinomialBroadcast) {
    // ceil(log2 p) (alpha + m beta)
    return hockney(steps, std::uint64_t{steps} * total_bytes, params);
  }
  // Every Allgather moves (p - 1) m/p bytes per rank; they differ in the
  // number of alpha terms: p - 1, p/2, log2 p, or ceil(log2 p).
  if (total_bytes % p == 0) {
    return hockney(steps, std::uint64_t{p - 1} * (total_bytes / p), params);
  }
  return static_cast<double>(steps) * params.alpha +
         static_cast<double>(p - 1) * (static_cast<double>(total_bytes) / p) * params.beta;
}

std::vector<LocalityStep> locality_profile(const CommSchedule& schedule) {
  const std::uint32_t p = schedule.group.p;
  std::vector<LocalityStep> profile;
  profile.reserve(schedule.steps.size());
  for (std::size_t si = 0; si < schedule.steps.size(); ++si) {
    LocalityStep entry{si, 0, 0, 0};
    const Step& step = schedule.steps[si];
    for (std::uint32_t r = 0; r < p; ++r) {
      for (const MessageAction& a : step.actions_per_rank[r]) {
        if (a.direction != Direction::Send) continue;
        const std::uint32_t distance = ring_distance(r, a.peer.value(), p);
        const std::uint64_t weight = std::uint64_t{distance} * a.slots.size();
        entry.weighted_distance += weight;
        entry.max_distance = std::max(entry.max_distance, distance);
        entry.max_message_weight = std::max(entry.max_message_weight, weight);
      }
    }
    profile.push_back(entry);
  }
  return profile;
}

}  // namespace aglab
