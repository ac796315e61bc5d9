#include "aglab/executor.hpp"

#include <deque>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "state_writer.hpp"

namespace aglab {

GatherState::GatherState(std::uint32_t p, std::size_t block_size)
    : p_(p),
      block_size_(block_size),
      origin_(std::size_t{p} * p, -1),
      bytes_(std::size_t{p} * p * block_size),
      cursor_(p, 0) {}

std::size_t GatherState::index(Rank rank, Slot slot) const {
  if (rank.value() >= p_ || slot >= p_) throw std::out_of_range("rank or slot outside [0, p)");
  return std::size_t{rank.value()} * p_ + slot;
}

bool GatherState::filled(Rank rank, Slot slot) const { return origin_[index(rank, slot)] >= 0; }

std::optional<Rank> GatherState::origin(Rank rank, Slot slot) const {
  const std::int64_t o = origin_[index(rank, slot)];
  if (o < 0) return std::nullopt;
  return Rank{static_cast<std::uint32_t>(o)};
}

std::span<const std::byte> GatherState::payload(Rank rank, Slot slot) const {
  return {bytes_.data() + index(rank, slot) * block_size_, block_size_};
}

std::optional<Block> GatherState::block(Rank rank, Slot slot) const {
  const auto o = origin(rank, slot);
  if (!o) return std::nullopt;
  const auto bytes = payload(rank, slot);
  return Block{*o, {bytes.begin(), bytes.end()}};
}

bool GatherState::complete() const {
  for (std::size_t i = 0; i < origin_.size(); ++i) {
    if (origin_[i] != static_cast<std::int64_t>(i % p_)) return false;
  }
  return true;
}

ExecutionError::ExecutionError(Kind kind, std::optional<std::size_t> step, Rank rank,
                               const std::string& what)
    : std::runtime_error(what), kind_(kind), step_(step), rank_(rank) {}

void write_trace_csv(std::ostream& out, const ExecutionTrace& trace) {
  out << "step,sender,receiver,origin_slot,bytes\n";
  for (const auto& step : trace.steps) {
    for (const Delivery& d : step) {
      out << d.step << ',' << d.sender.value() << ',' << d.receiver.value() << ','
          << d.origin_slot << ',' << d.bytes << '\n';
    }
  }
}

GatherState oracle_allgather(const ProcessGroup& group) {
  CommSchedule trivial;
  trivial.group = group;
  GatherState state = StateWriter::initial(trivial);
  std::vector<std::byte> payload(group.block_size);
  for (std::uint32_t o = 0; o < group.p; ++o) {
    fill_payload(payload, Rank{o}, group.seed);
    for (std::uint32_t r = 0; r < group.p; ++r) {
      if (r != o) StateWriter::write(state, Rank{r}, o, Rank{o}, payload);
    }
  }
  return state;
}

bool matches_oracle(const GatherState& state, const ProcessGroup& group) {
  if (state.size() != group.p || state.block_size() != group.block_size) return false;
  std::vector<std::byte> expected(group.block_size);
  for (std::uint32_t o = 0; o < group.p; ++o) {
    fill_payload(expected, Rank{o}, group.seed);
    for (std::uint32_t r = 0; r < group.p; ++r) {
      const auto origin = state.origin(Rank{r}, o);
      if (!origin || origin->value() != o) return false;
      const auto got = state.payload(Rank{r}, o);
      if (!std::equal(got.begin(), got.end(), expected.begin())) return false;
    }
  }
  return true;
}

namespace {

std::string describe(const char* what, std::size_t step, std::uint32_t rank, std::uint32_t slot) {
  return std::string(what) + " at step " + std::to_string(step) + ", rank " +
         std::to_string(rank) + ", slot " + std::to_string(slot);
}

struct Transfer {
  std::uint32_t sender;
  std::uint32_t receiver;
  const MessageAction* send;
  const MessageAction* recv;
};

std::vector<Transfer> pair_step(const Step& step, std::size_t step_index, std::uint32_t p) {
  if (step.actions_per_rank.size() != p) {
    throw ExecutionError(ExecutionError::Kind::InvalidSchedule, step_index, Rank{0},
                         "step does not list actions for every rank");
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::deque<const MessageAction*>> recvs;
  for (std::uint32_t r = 0; r < p; ++r) {
    for (const MessageAction& a : step.actions_per_rank[r]) {
      if (a.direction == Direction::Receive) recvs[{a.peer.value(), r}].push_back(&a);
    }
  }
  std::vector<Transfer> transfers;
  for (std::uint32_t r = 0; r < p; ++r) {
    for (const MessageAction& a : step.actions_per_rank[r]) {
      if (a.direction != Direction::Send) continue;
      auto& queue = recvs[{r, a.peer.value()}];
      if (queue.empty() || queue.front()->slots.size() != a.slots.size()) {
        throw ExecutionError(ExecutionError::Kind::InvalidSchedule, step_index, Rank{r},
                             "send at step " + std::to_string(step_index) + " from rank " +
                                 std::to_string(r) + " has no matching receive");
      }
      transfers.push_back({r, a.peer.value(), &a, queue.front()});
      queue.pop_front();
    }
  }
  for (const auto& [key, queue] : recvs) {
    if (!queue.empty()) {
      throw ExecutionError(ExecutionError::Kind::InvalidSchedule, step_index, Rank{key.second},
                           "receive at step " + std::to_string(step_index) + " on rank " +
                               std::to_string(key.second) + " has no matching send");
    }
  }
  return transfers;
}

void require_valid(const CommSchedule& schedule) {
  const auto violations = validate_schedule(schedule);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw ExecutionError(ExecutionError::Kind::InvalidSchedule, v.step, v.rank,
                         "invalid schedule: " + v.message);
  }
}

}  // namespace

Execution execute(const CommSchedule& schedule, ExecuteOptions options) {
  if (options.validate) require_valid(schedule);
  const std::uint32_t p = schedule.group.p;
  const std::size_t bs = schedule.group.block_size;

  Execution run{StateWriter::initial(schedule), {}};
  ExecutionTrace& trace = run.trace;
  trace.sent_blocks.assign(p, 0);
  trace.received_blocks.assign(p, 0);
  trace.steps.resize(schedule.steps.size());

  for (std::size_t si = 0; si < schedule.steps.size(); ++si) {
    const std::vector<Transfer> transfers = pair_step(schedule.steps[si], si, p);

    // Every send reads the state as of the step's start.
    for (const Transfer& t : transfers) {
      for (Slot slot : t.send->slots) {
        if (slot >= p || !run.state.filled(Rank{t.sender}, slot)) {
          throw ExecutionError(ExecutionError::Kind::SendFromEmptySlot, si, Rank{t.sender},
                               describe("send from empty slot", si, t.sender, slot));
        }
      }
    }
    // Commit. A slot written here was empty at the step's start (otherwise
    // the write is identical or rejected), so no send above read it.
    for (const Transfer& t : transfers) {
      for (std::size_t j = 0; j < t.send->slots.size(); ++j) {
        const Slot from = t.send->slots[j];
        const Slot to = t.recv->slots[j];
        const Rank origin = *run.state.origin(Rank{t.sender}, from);
        const auto result = StateWriter::write(run.state, Rank{t.receiver}, to, origin,
                                               run.state.payload(Rank{t.sender}, from));
        if (result == StateWriter::WriteResult::Conflict) {
          throw ExecutionError(ExecutionError::Kind::DoubleWrite, si, Rank{t.receiver},
                               describe("conflicting double write", si, t.receiver, to));
        }
        if (result == StateWriter::WriteResult::Identical) ++trace.double_writes;
        if (options.record_deliveries) {
          trace.steps[si].push_back({si, Rank{t.sender}, Rank{t.receiver}, origin.value(), bs});
        }
      }
      trace.sent_blocks[t.sender] += t.send->slots.size();
      trace.received_blocks[t.receiver] += t.recv->slots.size();
    }
    for (std::uint32_t r = 0; r < p; ++r) StateWriter::advance(run.state, Rank{r});
  }

  for (std::uint32_t r = 0; r < p; ++r) StateWriter::finish_rank(run.state, schedule, Rank{r});
  return run;
}

}  // namespace aglab
