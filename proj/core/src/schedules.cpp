#include "aglab/schedules.hpp"

#include <bit>
#include <utility>

namespace aglab {

namespace {

std::string restriction_message(RestrictionError::Kind kind, AlgorithmId algorithm,
                                std::uint32_t p) {
  std::string msg{algorithm_name(algorithm)};
  msg += kind == RestrictionError::Kind::OddProcessCount
             ? " requires an even number of processes, got p="
             : " requires a power-of-two number of processes, got p=";
  msg += std::to_string(p);
  return msg;
}

CommSchedule empty_schedule(AlgorithmId algorithm, const ProcessGroup& group) {
  CommSchedule s;
  s.algorithm = algorithm;
  s.group = group;
  return s;
}

Step make_step(std::uint32_t p) {
  Step step;
  step.actions_per_rank.resize(p);
  return step;
}

/// Adds a send from `from` and the matching receive at `to`. In the
/// origin-indexed layout the receiver stores each block in the same slot.
void add_transfer(Step& step, std::uint32_t from, std::uint32_t to, std::vector<Slot> send_slots,
                  std::vector<Slot> recv_slots) {
  step.actions_per_rank[from].push_back({Direction::Send, Rank{to}, std::move(send_slots)});
  step.actions_per_rank[to].push_back({Direction::Receive, Rank{from}, std::move(recv_slots)});
}

}  // namespace

RestrictionError::RestrictionError(Kind kind, AlgorithmId algorithm, std::uint32_t p)
    : std::domain_error(restriction_message(kind, algorithm, p)),
      kind_(kind),
      algorithm_(algorithm) {}

std::uint32_t ceil_log2(std::uint64_t x) noexcept {
  return x <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(x - 1));
}

std::uint32_t floor_log2(std::uint64_t x) noexcept {
  return x == 0 ? 0 : static_cast<std::uint32_t>(std::bit_width(x) - 1);
}

bool supports(AlgorithmId algorithm, std::uint32_t p) noexcept {
  if (p == 0) return false;
  if (p == 1) return true;
  switch (algorithm) {
    case AlgorithmId::NeighborExchange: return p % 2 == 0;
    case AlgorithmId::RecursiveDoubling: return is_power_of_two(p);
    default: return true;
  }
}

CommSchedule ring_schedule(const ProcessGroup& group) {
  const std::uint32_t p = group.p;
  CommSchedule s = empty_schedule(AlgorithmId::Ring, group);
  for (std::uint32_t k = 0; k + 1 < p; ++k) {
    Step step = make_step(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      // Forward the block received on the previous step (own block on step 0).
      const Slot slot = wrap(std::int64_t{r} - k, p);
      add_transfer(step, r, (r + 1) % p, {slot}, {slot});
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

CommSchedule neighbor_exchange_schedule(const ProcessGroup& group) {
  const std::uint32_t p = group.p;
  if (p == 1) return empty_schedule(AlgorithmId::NeighborExchange, group);
  if (p % 2 != 0) {
    throw RestrictionError(RestrictionError::Kind::OddProcessCount, AlgorithmId::NeighborExchange,
                           p);
  }
  CommSchedule s = empty_schedule(AlgorithmId::NeighborExchange, group);

  auto neighbor = [p](std::uint32_t r, std::uint32_t step) {
    const bool forward = (r % 2 == 0) == (step % 2 == 0);
    return forward ? (r + 1) % p : (r + p - 1) % p;
  };

  // Blocks each rank forwards on the current step.
  std::vector<std::vector<Slot>> outgoing(p);
  for (std::uint32_t r = 0; r < p; ++r) outgoing[r] = {r};

  for (std::uint32_t k = 0; k < p / 2; ++k) {
    Step step = make_step(p);
    std::vector<std::vector<Slot>> received(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      const std::uint32_t peer = neighbor(r, k);
      received[peer] = outgoing[r];
      add_transfer(step, r, peer, outgoing[r], outgoing[r]);
    }
    for (std::uint32_t r = 0; r < p; ++r) {
      if (k == 0) {
        // Step 1 forwards the aligned pair {own, first receipt}.
        outgoing[r] = {std::min(r, received[r][0]), std::max(r, received[r][0])};
      } else {
        outgoing[r] = std::move(received[r]);
      }
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

CommSchedule recursive_doubling_schedule(const ProcessGroup& group) {
  const std::uint32_t p = group.p;
  if (!is_power_of_two(p)) {
    throw RestrictionError(RestrictionError::Kind::NonPowerOfTwo, AlgorithmId::RecursiveDoubling,
                           p);
  }
  CommSchedule s = empty_schedule(AlgorithmId::RecursiveDoubling, group);
  const std::uint32_t steps = floor_log2(p);
  for (std::uint32_t k = 0; k < steps; ++k) {
    const std::uint32_t width = 1U << k;
    Step step = make_step(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      // The aligned group of size 2^k containing r, which r holds entirely.
      const std::uint32_t base = (r >> k) << k;
      std::vector<Slot> slots(width);
      for (std::uint32_t i = 0; i < width; ++i) slots[i] = base + i;
      add_transfer(step, r, r ^ width, slots, slots);
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

CommSchedule bruck_schedule(const ProcessGroup& group) {
  const std::uint32_t p = group.p;
  CommSchedule s = empty_schedule(AlgorithmId::Bruck, group);
  if (p == 1) return s;

  s.own_slot.assign(p, 0);
  auto doubling_step = [&](std::uint32_t distance, std::uint32_t count) {
    Step step = make_step(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      std::vector<Slot> send(count);
      std::vector<Slot> recv(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        send[i] = i;
        recv[i] = distance + i;
      }
      // Receiver sits `distance` below the sender in rank space.
      const std::uint32_t to = wrap(std::int64_t{r} - distance, p);
      add_transfer(step, r, to, std::move(send), std::move(recv));
    }
    s.steps.push_back(std::move(step));
  };

  const std::uint32_t full = floor_log2(p);
  for (std::uint32_t k = 0; k < full; ++k) doubling_step(1U << k, 1U << k);
  const std::uint32_t covered = 1U << full;
  if (covered < p) doubling_step(covered, p - covered);

  s.epilogue.resize(p);
  for (std::uint32_t r = 0; r < p; ++r) {
    s.epilogue[r].resize(p);
    for (std::uint32_t o = 0; o < p; ++o) s.epilogue[r][o] = wrap(std::int64_t{o} - r, p);
  }
  return s;
}

CommSchedule binomial_broadcast_schedule(const ProcessGroup& group, Rank root) {
  const std::uint32_t p = group.p;
  if (root.value() >= p) throw std::invalid_argument("broadcast root outside [0, p)");
  CommSchedule s = empty_schedule(AlgorithmId::BinomialBroadcast, group);
  s.root = root;

  const std::uint32_t steps = ceil_log2(p);
  for (std::uint32_t k = 0; k < steps; ++k) {
    const std::uint32_t d = 1U << (steps - 1 - k);
    Step step = make_step(p);
    // Holders at this point are the relative ranks that are multiples of 2d.
    for (std::uint64_t rel = 0; rel < p; rel += 2ULL * d) {
      if (rel + d >= p) continue;
      const std::uint32_t from = (static_cast<std::uint32_t>(rel) + root.value()) % p;
      const std::uint32_t to = (static_cast<std::uint32_t>(rel) + d + root.value()) % p;
      add_transfer(step, from, to, {root.value()}, {root.value()});
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

std::uint64_t sparbit_ignore_steps(std::uint32_t p) noexcept {
  if (p <= 1) return 0;
  const std::uint64_t value = p;
  const int tz = std::countr_zero(value);
  const std::uint64_t mask = ((~(value >> tz)) | 1ULL) << tz;
  const std::uint32_t bits = ceil_log2(p);
  return mask & ((1ULL << bits) - 1);
}

SparbitPlan sparbit_plan(std::uint32_t p, SparbitOptions options) {
  SparbitPlan plan;
  plan.p = p;
  plan.num_steps = ceil_log2(p);
  plan.ignore_steps = options.force_no_ignore ? 0 : sparbit_ignore_steps(p);

  std::uint32_t data = 1;
  for (std::uint32_t i = 0; i < plan.num_steps; ++i) {
    const std::uint32_t d = 1U << (plan.num_steps - 1 - i);
    const std::uint32_t ignore = (d & plan.ignore_steps) != 0 ? 1 : 0;
    const std::uint32_t send = data - ignore;
    data = (data << 1) - ignore;
    plan.steps.push_back({d, send, data, ignore != 0});
  }
  return plan;
}

CommSchedule sparbit_schedule(const ProcessGroup& group, SparbitOptions options) {
  const std::uint32_t p = group.p;
  CommSchedule s = empty_schedule(AlgorithmId::Sparbit, group);
  const SparbitPlan plan = sparbit_plan(p, options);

  for (const SparbitStepPlan& sp : plan.steps) {
    const std::int64_t d = sp.distance;
    Step step = make_step(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      std::vector<Slot> send(sp.blocks_to_send);
      std::vector<Slot> recv(sp.blocks_to_send);
      for (std::uint32_t j = 0; j < sp.blocks_to_send; ++j) {
        send[j] = wrap(r - 2 * std::int64_t{j} * d, p);
        recv[j] = wrap(r - (2 * std::int64_t{j} + 1) * d, p);
      }
      const std::uint32_t to = wrap(r + d, p);
      const std::uint32_t from = wrap(r - d, p);
      step.actions_per_rank[r].push_back({Direction::Send, Rank{to}, std::move(send)});
      step.actions_per_rank[r].push_back({Direction::Receive, Rank{from}, std::move(recv)});
    }
    s.steps.push_back(std::move(step));
  }
  return s;
}

CommSchedule build_schedule(AlgorithmId algorithm, const ProcessGroup& group,
                            SparbitOptions sparbit) {
  switch (algorithm) {
    case AlgorithmId::Ring: return ring_schedule(group);
    case AlgorithmId::NeighborExchange: return neighbor_exchange_schedule(group);
    case AlgorithmId::RecursiveDoubling: return recursive_doubling_schedule(group);
    case AlgorithmId::Bruck: return bruck_schedule(group);
    case AlgorithmId::Sparbit: return sparbit_schedule(group, sparbit);
    case AlgorithmId::BinomialBroadcast: return binomial_broadcast_schedule(group, Rank{0});
  }
  throw std::invalid_argument("unknown algorithm");
}

std::uint32_t expected_step_count(AlgorithmId algorithm, std::uint32_t p) {
  if (!supports(algorithm, p)) {
    throw RestrictionError(algorithm == AlgorithmId::NeighborExchange
                               ? RestrictionError::Kind::OddProcessCount
                               : RestrictionError::Kind::NonPowerOfTwo,
                           algorithm, p);
  }
  switch (algorithm) {
    case AlgorithmId::Ring: return p - 1;
    case AlgorithmId::NeighborExchange: return p / 2;
    case AlgorithmId::RecursiveDoubling: return floor_log2(p);
    case AlgorithmId::Bruck:
    case AlgorithmId::Sparbit:
    case AlgorithmId::BinomialBroadcast: return ceil_log2(p);
  }
  return 0;
}

}  // namespace aglab
