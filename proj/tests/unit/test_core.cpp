#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "aglab/core.hpp"
#include "aglab/schedules.hpp"

namespace aglab {
namespace {

bool has_kind(const std::vector<Violation>& v, Violation::Kind kind) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; });
}

MessageAction* find_action(CommSchedule& s, std::size_t step, std::uint32_t rank, Direction dir) {
  for (MessageAction& a : s.steps[step].actions_per_rank[rank]) {
    if (a.direction == dir) return &a;
  }
  return nullptr;
}

TEST(Core, MakeGroupRejectsZero) {
  EXPECT_THROW((void)make_group(0, 8), std::invalid_argument);
  EXPECT_THROW((void)make_group(4, 0), std::invalid_argument);
  const ProcessGroup g = make_group(4, 16, 7);
  EXPECT_EQ(g.p, 4U);
  EXPECT_EQ(g.block_size, 16U);
  EXPECT_EQ(g.seed, 7U);
}

TEST(Core, PayloadDependsOnOriginAndSeed) {
  const ProcessGroup g = make_group(3, 64, 1);
  const Block a = make_block(g, Rank{0});
  EXPECT_EQ(a, make_block(g, Rank{0}));
  EXPECT_NE(a.payload, make_block(g, Rank{1}).payload);
  EXPECT_NE(a.payload, make_block(make_group(3, 64, 2), Rank{0}).payload);
  EXPECT_EQ(a.payload.size(), 64U);
}

TEST(Core, AlgorithmNamesRoundTrip) {
  for (AlgorithmId id : {AlgorithmId::Ring, AlgorithmId::NeighborExchange, AlgorithmId::RecursiveDoubling,
                         AlgorithmId::Bruck, AlgorithmId::Sparbit, AlgorithmId::BinomialBroadcast}) {
    EXPECT_EQ(parse_algorithm(algorithm_name(id)), id);
  }
  EXPECT_FALSE(parse_algorithm("Sparbit").has_value());
  EXPECT_FALSE(parse_algorithm("").has_value());
}

TEST(Core, AllgatherAlgorithmsSortedByName) {
  const auto algos = allgather_algorithms();
  ASSERT_EQ(algos.size(), 5U);
  EXPECT_TRUE(std::is_sorted(algos.begin(), algos.end(), [](AlgorithmId a, AlgorithmId b) {
    return algorithm_name(a) < algorithm_name(b);
  }));
  EXPECT_EQ(std::count(algos.begin(), algos.end(), AlgorithmId::BinomialBroadcast), 0);
}

TEST(Core, WrapAndRingDistance) {
  EXPECT_EQ(wrap(-1, 5), 4U);
  EXPECT_EQ(wrap(-10, 5), 0U);
  EXPECT_EQ(wrap(12, 5), 2U);
  EXPECT_EQ(ring_distance(0, 4, 5), 1U);
  EXPECT_EQ(ring_distance(0, 2, 5), 2U);
  EXPECT_EQ(ring_distance(1, 5, 8), 4U);
  EXPECT_EQ(ring_distance(3, 3, 8), 0U);
}

TEST(Core, BlockCounters) {
  const CommSchedule s = ring_schedule(make_group(6, 1));
  for (std::uint32_t r = 0; r < 6; ++r) {
    EXPECT_EQ(s.blocks_sent(Rank{r}), 5U);
    EXPECT_EQ(s.blocks_received(Rank{r}), 5U);
    EXPECT_EQ(s.blocks_sent(Rank{r}, 2), 1U);
    EXPECT_EQ(s.expected_receives(Rank{r}), 5U);
  }
  const CommSchedule b = binomial_broadcast_schedule(make_group(6, 1), Rank{2});
  EXPECT_EQ(b.expected_receives(Rank{2}), 0U);
  EXPECT_EQ(b.expected_receives(Rank{3}), 1U);
}

TEST(Validate, AcceptsBuiltSchedules) {
  for (std::uint32_t p = 1; p <= 40; ++p) {
    for (AlgorithmId id : allgather_algorithms()) {
      if (!supports(id, p)) continue;
      const auto v = validate_schedule(build_schedule(id, make_group(p, 1)));
      EXPECT_TRUE(v.empty()) << algorithm_name(id) << " p=" << p << ": " << v.front().message;
    }
  }
}

TEST(Validate, UnmatchedSend) {
  CommSchedule s = ring_schedule(make_group(4, 1));
  auto& acts = s.steps[1].actions_per_rank[2];
  acts.erase(std::remove_if(acts.begin(), acts.end(),
                            [](const MessageAction& a) { return a.direction == Direction::Receive; }),
             acts.end());
  const auto v = validate_schedule(s);
  EXPECT_TRUE(has_kind(v, Violation::Kind::UnmatchedSend));
  EXPECT_TRUE(has_kind(v, Violation::Kind::ReceiveTotal));
}

TEST(Validate, UnmatchedReceive) {
  CommSchedule s = ring_schedule(make_group(4, 1));
  auto& acts = s.steps[0].actions_per_rank[0];
  acts.erase(std::remove_if(acts.begin(), acts.end(),
                            [](const MessageAction& a) { return a.direction == Direction::Send; }),
             acts.end());
  EXPECT_TRUE(has_kind(validate_schedule(s), Violation::Kind::UnmatchedReceive));
}

TEST(Validate, BadPeerAndSlotRange) {
  CommSchedule s = ring_schedule(make_group(4, 1));
  find_action(s, 0, 0, Direction::Send)->peer = Rank{9};
  EXPECT_TRUE(has_kind(validate_schedule(s), Violation::Kind::BadPeer));

  CommSchedule t = ring_schedule(make_group(4, 1));
  find_action(t, 0, 0, Direction::Send)->slots = {4};
  EXPECT_TRUE(has_kind(validate_schedule(t), Violation::Kind::SlotOutOfRange));
}

TEST(Validate, DuplicateSlotAndCountMismatch) {
  CommSchedule s = sparbit_schedule(make_group(8, 1));
  MessageAction* recv = find_action(s, 2, 3, Direction::Receive);
  recv->slots[1] = recv->slots[0];
  EXPECT_TRUE(has_kind(validate_schedule(s), Violation::Kind::DuplicateSlot));

  CommSchedule t = sparbit_schedule(make_group(8, 1));
  find_action(t, 2, 3, Direction::Send)->slots.pop_back();
  EXPECT_TRUE(has_kind(validate_schedule(t), Violation::Kind::CountMismatch));
}

TEST(Validate, ShapeAndLayout) {
  CommSchedule s = ring_schedule(make_group(4, 1));
  s.steps[0].actions_per_rank.pop_back();
  EXPECT_TRUE(has_kind(validate_schedule(s), Violation::Kind::Shape));

  CommSchedule b = bruck_schedule(make_group(5, 1));
  b.own_slot.pop_back();
  EXPECT_TRUE(has_kind(validate_schedule(b), Violation::Kind::BadLayout));

  CommSchedule e = bruck_schedule(make_group(5, 1));
  e.epilogue[1][0] = e.epilogue[1][1];
  EXPECT_TRUE(has_kind(validate_schedule(e), Violation::Kind::BadLayout));
}

TEST(Validate, ViolationKindNamesDistinct) {
  std::set<std::string_view> names;
  for (int k = 0; k <= static_cast<int>(Violation::Kind::BadLayout); ++k) {
    names.insert(violation_kind_name(static_cast<Violation::Kind>(k)));
  }
  EXPECT_EQ(names.size(), 9U);
}

}  // namespace
}  // namespace aglab
