#include <gtest/gtest.h>

#include <bit>
#include <set>

#include "aglab/schedules.hpp"

namespace aglab {
namespace {

/// Line-by-line transcription of the published Sparbit pseudocode; yields the
/// (distance, blocks sent) pairs of every step.
std::vector<std::pair<std::uint32_t, std::uint32_t>> sparbit_pseudocode(std::uint32_t p) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  if (p <= 1) return out;
  std::uint32_t steps = 0;
  while ((1ULL << steps) < p) ++steps;
  std::uint64_t data = 1;
  std::uint64_t ignore = 0;
  std::uint64_t d = 1ULL << (steps - 1);
  std::uint64_t last_ignore = 0;
  while (((p >> last_ignore) & 1U) == 0) ++last_ignore;
  const std::uint64_t ignore_steps = (~(std::uint64_t{p} >> last_ignore) | 1) << last_ignore;
  for (std::uint32_t i = 0; i < steps; ++i) {
    if (d & ignore_steps) ignore = 1;
    out.emplace_back(static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(data - ignore));
    d >>= 1;
    data = (data << 1) - ignore;
    ignore = 0;
  }
  return out;
}

std::vector<std::uint32_t> plan_sends(std::uint32_t p) {
  std::vector<std::uint32_t> out;
  for (const auto& s : sparbit_plan(p).steps) out.push_back(s.blocks_to_send);
  return out;
}

const MessageAction& action(const CommSchedule& s, std::size_t step, std::uint32_t rank, Direction dir) {
  for (const MessageAction& a : s.steps[step].actions_per_rank[rank]) {
    if (a.direction == dir) return a;
  }
  throw std::logic_error("no such action");
}

TEST(Log2, Helpers) {
  EXPECT_EQ(ceil_log2(1), 0U);
  EXPECT_EQ(ceil_log2(2), 1U);
  EXPECT_EQ(ceil_log2(5), 3U);
  EXPECT_EQ(ceil_log2(256), 8U);
  EXPECT_EQ(ceil_log2(257), 9U);
  EXPECT_EQ(floor_log2(1), 0U);
  EXPECT_EQ(floor_log2(255), 7U);
  EXPECT_TRUE(is_power_of_two(64));
  EXPECT_FALSE(is_power_of_two(0));
  EXPECT_FALSE(is_power_of_two(96));
}

TEST(SparbitPlan, SpotValues) {
  EXPECT_EQ(plan_sends(5), (std::vector<std::uint32_t>{1, 1, 2}));
  EXPECT_EQ(plan_sends(21), (std::vector<std::uint32_t>{1, 1, 3, 5, 10}));
  EXPECT_EQ(plan_sends(12), (std::vector<std::uint32_t>{1, 1, 3, 6}));
  EXPECT_EQ(plan_sends(8), (std::vector<std::uint32_t>{1, 2, 4}));
  EXPECT_TRUE(plan_sends(1).empty());
}

TEST(SparbitPlan, IgnoreMasks) {
  EXPECT_EQ(sparbit_ignore_steps(5), 0b011U);
  EXPECT_EQ(sparbit_ignore_steps(21), 0b01011U);
  EXPECT_EQ(sparbit_ignore_steps(12), 0b0100U);
  EXPECT_EQ(sparbit_ignore_steps(6), 0b010U);
  for (std::uint32_t k = 0; k <= 12; ++k) EXPECT_EQ(sparbit_ignore_steps(1U << k), 0U);
}

TEST(SparbitPlan, MatchesPseudocode) {
  for (std::uint32_t p = 1; p <= 1024; ++p) {
    const SparbitPlan plan = sparbit_plan(p);
    const auto ref = sparbit_pseudocode(p);
    ASSERT_EQ(plan.steps.size(), ref.size()) << p;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_EQ(plan.steps[i].distance, ref[i].first) << "p=" << p << " step " << i;
      EXPECT_EQ(plan.steps[i].blocks_to_send, ref[i].second) << "p=" << p << " step " << i;
      total += ref[i].second;
    }
    EXPECT_EQ(total, p - 1U) << p;
    if (!plan.steps.empty()) {
      EXPECT_EQ(plan.steps.back().data_after, p);
    }
  }
}

TEST(SparbitPlan, ForceNoIgnoreDoubles) {
  const SparbitPlan plan = sparbit_plan(5, {true});
  EXPECT_EQ(plan.ignore_steps, 0U);
  EXPECT_EQ(plan.steps.back().data_after, 8U);
}

TEST(SparbitSchedule, FollowsPseudocodeMessages) {
  for (std::uint32_t p : {2U, 3U, 5U, 7U, 12U, 21U, 32U, 100U}) {
    const CommSchedule s = sparbit_schedule(make_group(p, 1));
    const auto ref = sparbit_pseudocode(p);
    ASSERT_EQ(s.step_count(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const auto [d, n] = ref[i];
      for (std::uint32_t r = 0; r < p; ++r) {
        const MessageAction& snd = action(s, i, r, Direction::Send);
        const MessageAction& rcv = action(s, i, r, Direction::Receive);
        EXPECT_EQ(snd.peer.value(), (r + d) % p);
        EXPECT_EQ(rcv.peer.value(), (r + p - d % p) % p);
        ASSERT_EQ(snd.slots.size(), n);
        ASSERT_EQ(rcv.slots.size(), n);
        for (std::uint32_t j = 0; j < n; ++j) {
          EXPECT_EQ(snd.slots[j], wrap(std::int64_t{r} - 2LL * j * d, p));
          EXPECT_EQ(rcv.slots[j], wrap(std::int64_t{r} - (2LL * j + 1) * d, p));
        }
      }
    }
  }
}

TEST(SparbitSchedule, FivesHandUnrolled) {
  // p=5: distances 4, 2, 1; rank 0 forwards only its own block until the last step.
  const CommSchedule s = sparbit_schedule(make_group(5, 1));
  ASSERT_EQ(s.step_count(), 3U);
  EXPECT_EQ(action(s, 0, 0, Direction::Send).peer, Rank{4});
  EXPECT_EQ(action(s, 0, 0, Direction::Send).slots, std::vector<Slot>{0});
  EXPECT_EQ(action(s, 0, 0, Direction::Receive).peer, Rank{1});
  EXPECT_EQ(action(s, 0, 0, Direction::Receive).slots, std::vector<Slot>{1});
  EXPECT_EQ(action(s, 1, 0, Direction::Send).slots, std::vector<Slot>{0});
  EXPECT_EQ(action(s, 1, 0, Direction::Receive).slots, std::vector<Slot>{3});
  EXPECT_EQ(action(s, 2, 0, Direction::Send).slots, (std::vector<Slot>{0, 3}));
  EXPECT_EQ(action(s, 2, 0, Direction::Receive).slots, (std::vector<Slot>{4, 2}));
}

TEST(RingSchedule, HandUnrolled) {
  const CommSchedule s = ring_schedule(make_group(4, 1));
  ASSERT_EQ(s.step_count(), 3U);
  // Step k: rank r forwards origin r - k to r + 1.
  EXPECT_EQ(action(s, 0, 2, Direction::Send).slots, std::vector<Slot>{2});
  EXPECT_EQ(action(s, 1, 2, Direction::Send).slots, std::vector<Slot>{1});
  EXPECT_EQ(action(s, 2, 0, Direction::Send).slots, std::vector<Slot>{2});
  EXPECT_EQ(action(s, 2, 0, Direction::Send).peer, Rank{1});
  EXPECT_EQ(action(s, 2, 0, Direction::Receive).slots, std::vector<Slot>{1});
  EXPECT_EQ(action(s, 2, 0, Direction::Receive).peer, Rank{3});
}

TEST(NeighborExchange, HandUnrolled) {
  const CommSchedule s = neighbor_exchange_schedule(make_group(6, 1));
  ASSERT_EQ(s.step_count(), 3U);
  // Step 0 pairs (0,1), (2,3), (4,5); later steps alternate neighbours.
  EXPECT_EQ(action(s, 0, 0, Direction::Send).peer, Rank{1});
  EXPECT_EQ(action(s, 0, 0, Direction::Send).slots, std::vector<Slot>{0});
  EXPECT_EQ(action(s, 1, 0, Direction::Send).peer, Rank{5});
  EXPECT_EQ(action(s, 1, 0, Direction::Send).slots, (std::vector<Slot>{0, 1}));
  EXPECT_EQ(action(s, 1, 0, Direction::Receive).slots, (std::vector<Slot>{4, 5}));
  EXPECT_EQ(action(s, 2, 0, Direction::Send).peer, Rank{1});
  EXPECT_EQ(action(s, 2, 0, Direction::Send).slots, (std::vector<Slot>{4, 5}));
  EXPECT_EQ(action(s, 2, 0, Direction::Receive).slots, (std::vector<Slot>{2, 3}));
}

TEST(NeighborExchange, Restrictions) {
  EXPECT_THROW((void)neighbor_exchange_schedule(make_group(5, 1)), RestrictionError);
  try {
    (void)neighbor_exchange_schedule(make_group(7, 1));
  } catch (const RestrictionError& e) {
    EXPECT_EQ(e.kind(), RestrictionError::Kind::OddProcessCount);
    EXPECT_EQ(e.algorithm(), AlgorithmId::NeighborExchange);
  }
  EXPECT_TRUE(neighbor_exchange_schedule(make_group(1, 1)).steps.empty());
}

TEST(RecursiveDoubling, HandUnrolledAndRestriction) {
  const CommSchedule s = recursive_doubling_schedule(make_group(8, 1));
  ASSERT_EQ(s.step_count(), 3U);
  EXPECT_EQ(action(s, 0, 5, Direction::Send).peer, Rank{4});
  EXPECT_EQ(action(s, 1, 5, Direction::Send).peer, Rank{7});
  EXPECT_EQ(action(s, 1, 5, Direction::Send).slots, (std::vector<Slot>{4, 5}));
  EXPECT_EQ(action(s, 2, 5, Direction::Send).peer, Rank{1});
  EXPECT_EQ(action(s, 2, 5, Direction::Send).slots, (std::vector<Slot>{4, 5, 6, 7}));
  EXPECT_THROW((void)recursive_doubling_schedule(make_group(12, 1)), RestrictionError);
}

TEST(Bruck, HandUnrolledLayout) {
  const CommSchedule s = bruck_schedule(make_group(5, 1));
  ASSERT_EQ(s.step_count(), 3U);
  EXPECT_EQ(s.own_slot, std::vector<Slot>(5, 0));
  EXPECT_EQ(action(s, 0, 2, Direction::Send).peer, Rank{1});
  EXPECT_EQ(action(s, 1, 2, Direction::Send).peer, Rank{0});
  EXPECT_EQ(action(s, 1, 2, Direction::Send).slots, (std::vector<Slot>{0, 1}));
  EXPECT_EQ(action(s, 1, 2, Direction::Receive).slots, (std::vector<Slot>{2, 3}));
  // Partial last step: one block over distance 4.
  EXPECT_EQ(action(s, 2, 2, Direction::Send).peer, Rank{3});
  EXPECT_EQ(action(s, 2, 2, Direction::Send).slots, std::vector<Slot>{0});
  EXPECT_EQ(action(s, 2, 2, Direction::Receive).slots, std::vector<Slot>{4});
  // Working slot i of rank r holds origin r + i.
  EXPECT_EQ(s.epilogue[2], (std::vector<Slot>{3, 4, 0, 1, 2}));
}

TEST(BinomialBroadcast, Tree) {
  const CommSchedule s = binomial_broadcast_schedule(make_group(5, 1), Rank{0});
  ASSERT_EQ(s.step_count(), 3U);
  EXPECT_EQ(action(s, 0, 0, Direction::Send).peer, Rank{4});
  EXPECT_EQ(action(s, 1, 0, Direction::Send).peer, Rank{2});
  EXPECT_EQ(action(s, 2, 2, Direction::Send).peer, Rank{3});
  EXPECT_TRUE(s.steps[1].actions_per_rank[4].empty());
  EXPECT_THROW((void)binomial_broadcast_schedule(make_group(5, 1), Rank{5}), std::invalid_argument);
  for (std::uint32_t p = 1; p <= 40; ++p) {
    for (std::uint32_t root = 0; root < p; root += 3) {
      EXPECT_TRUE(validate_schedule(binomial_broadcast_schedule(make_group(p, 1), Rank{root})).empty());
    }
  }
}

TEST(Properties, StepCountsAndBlocksSent) {
  for (std::uint32_t p = 1; p <= 256; ++p) {
    const ProcessGroup g = make_group(p, 1);
    for (AlgorithmId id : allgather_algorithms()) {
      if (!supports(id, p)) {
        EXPECT_THROW((void)build_schedule(id, g), RestrictionError);
        continue;
      }
      const CommSchedule s = build_schedule(id, g);
      std::size_t want = 0;
      switch (id) {
        case AlgorithmId::Ring: want = p - 1; break;
        case AlgorithmId::NeighborExchange: want = p / 2; break;
        default: want = static_cast<std::size_t>(std::bit_width(p - 1U)); break;
      }
      if (p == 1) want = 0;
      EXPECT_EQ(s.step_count(), want) << algorithm_name(id) << " p=" << p;
      EXPECT_EQ(expected_step_count(id, p), want);
      for (std::uint32_t r = 0; r < p; ++r) {
        ASSERT_EQ(s.blocks_sent(Rank{r}), p - 1U) << algorithm_name(id) << " p=" << p << " r=" << r;
        ASSERT_EQ(s.blocks_received(Rank{r}), p - 1U);
      }
      EXPECT_TRUE(validate_schedule(s).empty()) << algorithm_name(id) << " p=" << p;
    }
  }
}

TEST(Properties, ScheduleIndependentOfBlockSize) {
  for (AlgorithmId id : allgather_algorithms()) {
    const CommSchedule a = build_schedule(id, make_group(16, 1));
    const CommSchedule b = build_schedule(id, make_group(16, 4096, 9));
    EXPECT_EQ(a.steps, b.steps);
  }
}

TEST(Properties, SupportsTable) {
  EXPECT_TRUE(supports(AlgorithmId::Ring, 7));
  EXPECT_FALSE(supports(AlgorithmId::NeighborExchange, 7));
  EXPECT_TRUE(supports(AlgorithmId::NeighborExchange, 12));
  EXPECT_FALSE(supports(AlgorithmId::RecursiveDoubling, 12));
  EXPECT_TRUE(supports(AlgorithmId::RecursiveDoubling, 1));
  EXPECT_FALSE(supports(AlgorithmId::Ring, 0));
}

}  // namespace
}  // namespace aglab
