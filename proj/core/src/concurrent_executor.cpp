#include <algorithm>
#include <atomic>
#include <barrier>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include "aglab/executor.hpp"
#include "state_writer.hpp"

namespace aglab {

namespace {

struct Message {
  std::size_t step = 0;
  std::vector<Rank> origins;
  std::vector<std::byte> payload;
};

/// Single-producer single-consumer channel between one ordered pair of ranks.
class Link {
 public:
  void push(Message msg) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(msg));
    }
    cv_.notify_one();
  }

  /// Waits until a message arrives, the deadline passes, or `abort` is set.
  std::optional<Message> pop(std::chrono::steady_clock::time_point deadline,
                             const std::atomic<bool>& abort) {
    std::unique_lock lock(mutex_);
    while (queue_.empty()) {
      if (abort.load(std::memory_order_relaxed)) return std::nullopt;
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      cv_.wait_until(lock, std::min(deadline, now + std::chrono::milliseconds(20)));
    }
    Message msg = std::move(queue_.front());
    queue_.pop_front();
    return msg;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
};

constexpr std::uint64_t link_key(std::uint32_t from, std::uint32_t to) noexcept {
  return (std::uint64_t{from} << 32) | to;
}

class Network {
 public:
  explicit Network(const CommSchedule& schedule) {
    for (const Step& step : schedule.steps) {
      for (std::uint32_t r = 0; r < step.actions_per_rank.size(); ++r) {
        for (const MessageAction& a : step.actions_per_rank[r]) {
          const auto key = a.direction == Direction::Send ? link_key(r, a.peer.value())
                                                          : link_key(a.peer.value(), r);
          if (!links_.contains(key)) links_.emplace(key, std::make_unique<Link>());
        }
      }
    }
  }

  Link& link(std::uint32_t from, std::uint32_t to) { return *links_.at(link_key(from, to)); }

 private:
  // Built before the workers start and read-only afterwards.
  std::unordered_map<std::uint64_t, std::unique_ptr<Link>> links_;
};

struct WorkerLog {
  std::vector<std::vector<Delivery>> steps;
  std::size_t sent = 0;
  std::size_t received = 0;
  std::size_t double_writes = 0;
};

class Run {
 public:
  Run(const CommSchedule& schedule, ExecuteOptions options)
      : schedule_(schedule),
        options_(options),
        state_(StateWriter::initial(schedule)),
        network_(schedule),
        logs_(schedule.group.p),
        barrier_(static_cast<std::ptrdiff_t>(schedule.group.p)) {
    for (auto& log : logs_) log.steps.resize(schedule.steps.size());
  }

  Execution go() {
    const std::uint32_t p = schedule_.group.p;
    {
      std::vector<std::jthread> workers;
      workers.reserve(p);
      for (std::uint32_t r = 0; r < p; ++r) {
        workers.emplace_back([this, r] { work(Rank{r}); });
      }
    }
    if (error_) throw *error_;

    Execution run{std::move(state_), {}};
    run.trace.steps.resize(schedule_.steps.size());
    run.trace.sent_blocks.resize(p);
    run.trace.received_blocks.resize(p);
    for (std::uint32_t r = 0; r < p; ++r) {
      WorkerLog& log = logs_[r];
      run.trace.sent_blocks[r] = log.sent;
      run.trace.received_blocks[r] = log.received;
      run.trace.double_writes += log.double_writes;
      for (std::size_t s = 0; s < log.steps.size(); ++s) {
        auto& dst = run.trace.steps[s];
        dst.insert(dst.end(), log.steps[s].begin(), log.steps[s].end());
      }
    }
    // Workers log on receipt; report in sender order like the sequential executor.
    for (auto& step : run.trace.steps) {
      std::stable_sort(step.begin(), step.end(), [](const Delivery& a, const Delivery& b) {
        return a.sender.value() < b.sender.value();
      });
    }
    return run;
  }

 private:
  void fail(ExecutionError err) {
    std::lock_guard lock(error_mutex_);
    if (!error_) error_ = std::move(err);
    failed_.store(true);
  }

  void work(Rank self) {
    for (std::size_t si = 0; si < schedule_.steps.size(); ++si) {
      if (!failed_.load()) {
        try {
          run_step(self, si);
        } catch (const ExecutionError& e) {
          fail(e);
        } catch (const std::exception& e) {
          fail(ExecutionError(ExecutionError::Kind::InvalidSchedule, si, self, e.what()));
        }
      }
      barrier_.arrive_and_wait();
    }
    if (!failed_.load()) {
      try {
        StateWriter::finish_rank(state_, schedule_, self);
      } catch (const ExecutionError& e) {
        fail(e);
      }
    }
  }

  void run_step(Rank self, std::size_t si) {
    const std::uint32_t r = self.value();
    const std::uint32_t p = schedule_.group.p;
    const std::size_t bs = schedule_.group.block_size;
    const auto& actions = schedule_.steps[si].actions_per_rank.at(r);
    WorkerLog& log = logs_[r];

    // Sends first: they read this rank's buffer before any receive of the step.
    for (const MessageAction& a : actions) {
      if (a.direction != Direction::Send) continue;
      Message msg;
      msg.step = si;
      msg.payload.resize(a.slots.size() * bs);
      for (std::size_t j = 0; j < a.slots.size(); ++j) {
        const Slot slot = a.slots[j];
        const auto origin = slot < p ? state_.origin(self, slot) : std::nullopt;
        if (!origin) {
          throw ExecutionError(ExecutionError::Kind::SendFromEmptySlot, si, self,
                               "send from empty slot at step " + std::to_string(si) + ", rank " +
                                   std::to_string(r) + ", slot " + std::to_string(slot));
        }
        msg.origins.push_back(*origin);
        const auto bytes = state_.payload(self, slot);
        std::copy(bytes.begin(), bytes.end(), msg.payload.begin() + static_cast<std::ptrdiff_t>(j * bs));
      }
      log.sent += a.slots.size();
      network_.link(r, a.peer.value()).push(std::move(msg));
    }

    const auto deadline = std::chrono::steady_clock::now() + options_.receive_timeout;
    for (const MessageAction& a : actions) {
      if (a.direction != Direction::Receive) continue;
      const std::uint32_t from = a.peer.value();
      auto msg = network_.link(from, r).pop(deadline, failed_);
      if (!msg) {
        if (failed_.load()) return;
        throw ExecutionError(ExecutionError::Kind::Timeout, si, self,
                             "rank " + std::to_string(r) + " timed out at step " +
                                 std::to_string(si) + " waiting for rank " + std::to_string(from));
      }
      if (msg->step != si || msg->origins.size() != a.slots.size()) {
        throw ExecutionError(ExecutionError::Kind::InvalidSchedule, si, self,
                             "message from rank " + std::to_string(from) +
                                 " does not match the receive posted at step " + std::to_string(si));
      }
      for (std::size_t j = 0; j < a.slots.size(); ++j) {
        const std::span<const std::byte> bytes{msg->payload.data() + j * bs, bs};
        const auto result = StateWriter::write(state_, self, a.slots[j], msg->origins[j], bytes);
        if (result == StateWriter::WriteResult::Conflict) {
          throw ExecutionError(ExecutionError::Kind::DoubleWrite, si, self,
                               "conflicting double write at step " + std::to_string(si) +
                                   ", rank " + std::to_string(r) + ", slot " +
                                   std::to_string(a.slots[j]));
        }
        if (result == StateWriter::WriteResult::Identical) ++log.double_writes;
        if (options_.record_deliveries) {
          log.steps[si].push_back({si, Rank{from}, self, msg->origins[j].value(), bs});
        }
      }
      log.received += a.slots.size();
    }
    StateWriter::advance(state_, self);
  }

  const CommSchedule& schedule_;
  ExecuteOptions options_;
  GatherState state_;
  Network network_;
  std::vector<WorkerLog> logs_;
  std::barrier<> barrier_;
  std::atomic<bool> failed_{false};
  std::mutex error_mutex_;
  std::optional<ExecutionError> error_;
};

}  // namespace

Execution execute_concurrent(const CommSchedule& schedule, ExecuteOptions options) {
  if (options.validate) {
    const auto violations = validate_schedule(schedule);
    if (!violations.empty()) {
      const Violation& v = violations.front();
      throw ExecutionError(ExecutionError::Kind::InvalidSchedule, v.step, v.rank,
                           "invalid schedule: " + v.message);
    }
  }
  Run run(schedule, options);
  return run.go();
}

}  // namespace aglab
