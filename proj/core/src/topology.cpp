#include <numeric>
#include <stdexcept>

#include "aglab/netmodel.hpp"

namespace aglab {

namespace {

struct Walker {
  std::size_t depth_limit;
  std::vector<std::size_t> next_id;  // per level
  std::vector<std::size_t> path;     // ancestor ids, indexed by level
  std::vector<std::uint32_t>& slots;
  std::vector<std::vector<std::size_t>>& ancestors;

  void visit(const TopologyNode& node, std::size_t depth) {
    const std::size_t level = depth_limit - depth;
    path[level] = next_id[level]++;
    if (node.children.empty()) {
      if (depth != depth_limit) {
        throw std::invalid_argument("every machine must sit at depth " +
                                    std::to_string(depth_limit) + " (found one at depth " +
                                    std::to_string(depth) + ")");
      }
      if (node.slots == 0) throw std::invalid_argument("machines need at least one slot");
      slots.push_back(node.slots);
      ancestors.push_back(path);
      return;
    }
    if (node.slots != 0) throw std::invalid_argument("switches cannot carry slots");
    if (depth == depth_limit) {
      throw std::invalid_argument("tree is deeper than the number of levels");
    }
    for (const TopologyNode& child : node.children) visit(child, depth + 1);
  }
};

}  // namespace

Topology::Topology(std::vector<TopologyLevel> levels, const TopologyNode& root)
    : levels_(std::move(levels)) {
  if (levels_.empty()) throw std::invalid_argument("topology needs at least one level");
  for (const auto& level : levels_) {
    if (!(level.params.alpha >= 0.0) || !(level.params.beta >= 0.0)) {
      throw std::invalid_argument("level '" + level.name + "' has a negative alpha or beta");
    }
  }
  const std::size_t depth_limit = levels_.size() - 1;
  Walker walker{depth_limit, std::vector<std::size_t>(levels_.size(), 0),
                std::vector<std::size_t>(levels_.size(), 0), slots_, ancestors_};
  walker.visit(root, 0);
}

Topology Topology::uniform(HockneyParams params, std::uint32_t slots) {
  return Topology({{"uniform", params}}, TopologyNode::machine(slots));
}

Topology Topology::yahoo() {
  auto leaf_switch = [](std::size_t machines) {
    return TopologyNode::group(std::vector<TopologyNode>(machines, TopologyNode::machine(8)));
  };
  return Topology(
      {
          {"node", {0.5, 0.0002}},
          {"leaf", {5.0, 0.008}},
          {"core", {20.0, 0.032}},
      },
      TopologyNode::group({leaf_switch(5), leaf_switch(11)}));
}

Topology Topology::cervino() {
  return Topology(
      {
          {"node", {0.5, 0.0002}},
          {"switch", {3.0, 0.0002}},
      },
      TopologyNode::group(std::vector<TopologyNode>(5, TopologyNode::machine(32))));
}

std::uint64_t Topology::total_slots() const noexcept {
  return std::accumulate(slots_.begin(), slots_.end(), std::uint64_t{0});
}

std::size_t Topology::ancestor(std::size_t machine, std::size_t level) const {
  return ancestors_.at(machine).at(level);
}

std::size_t Topology::common_level(std::size_t a, std::size_t b) const {
  const auto& pa = ancestors_.at(a);
  const auto& pb = ancestors_.at(b);
  for (std::size_t level = 0; level < levels_.size(); ++level) {
    if (pa[level] == pb[level]) return level;
  }
  return levels_.size() - 1;
}

std::string_view mapping_name(MappingKind kind) noexcept {
  switch (kind) {
    case MappingKind::Sequential: return "sequential";
    case MappingKind::Cyclic: return "cyclic";
    case MappingKind::Explicit: return "explicit";
  }
  return "unknown";
}

std::optional<MappingKind> parse_mapping(std::string_view name) noexcept {
  if (name == "sequential") return MappingKind::Sequential;
  if (name == "cyclic") return MappingKind::Cyclic;
  return std::nullopt;
}

InsufficientSlots::InsufficientSlots(std::uint32_t p, std::uint64_t slots)
    : std::invalid_argument("topology offers " + std::to_string(slots) + " slots for " +
                            std::to_string(p) + " processes") {}

RankMapping make_mapping(MappingKind kind, std::uint32_t p, const Topology& topology) {
  if (topology.total_slots() < p) throw InsufficientSlots(p, topology.total_slots());
  if (kind == MappingKind::Explicit) {
    throw std::invalid_argument("explicit mappings are built with make_explicit_mapping");
  }
  RankMapping mapping{kind, {}};
  mapping.placement.reserve(p);
  const std::size_t machines = topology.machine_count();

  if (kind == MappingKind::Sequential) {
    std::size_t machine = 0;
    std::uint32_t slot = 0;
    for (std::uint32_t r = 0; r < p; ++r) {
      while (slot == topology.slots(machine)) {
        ++machine;
        slot = 0;
      }
      mapping.placement.push_back({machine, slot++});
    }
    return mapping;
  }

  std::vector<std::uint32_t> used(machines, 0);
  std::size_t machine = 0;
  for (std::uint32_t r = 0; r < p; ++r) {
    while (used[machine] == topology.slots(machine)) machine = (machine + 1) % machines;
    mapping.placement.push_back({machine, used[machine]++});
    machine = (machine + 1) % machines;
  }
  return mapping;
}

RankMapping make_explicit_mapping(const std::vector<std::size_t>& machines,
                                  const Topology& topology) {
  RankMapping mapping{MappingKind::Explicit, {}};
  std::vector<std::uint32_t> used(topology.machine_count(), 0);
  for (std::size_t machine : machines) {
    if (machine >= topology.machine_count()) {
      throw std::invalid_argument("explicit mapping names machine " + std::to_string(machine) +
                                  " but the topology has " +
                                  std::to_string(topology.machine_count()));
    }
    if (used[machine] == topology.slots(machine)) {
      throw InsufficientSlots(static_cast<std::uint32_t>(machines.size()), topology.total_slots());
    }
    mapping.placement.push_back({machine, used[machine]++});
  }
  return mapping;
}

}  // namespace aglab
