#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "aglab/config.hpp"

namespace aglab {
namespace {

using List = std::vector<std::uint64_t>;

ConfigError config_error(std::string_view text) {
  try {
    (void)parse_config(text, "cfg.json");
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "parse_config accepted: " << text;
  return ConfigError("", 0, 0, "");
}

TEST(CountList, Forms) {
  EXPECT_EQ(parse_count_list("8"), List{8});
  EXPECT_EQ(parse_count_list("3,1,2,3"), (List{1, 2, 3}));
  EXPECT_EQ(parse_count_list("1:4"), (List{1, 2, 3, 4}));
  EXPECT_EQ(parse_count_list("5:29:8"), (List{5, 13, 21, 29}));
  EXPECT_EQ(parse_count_list("5:30:8"), (List{5, 13, 21, 29}));
  EXPECT_EQ(parse_count_list("1:16:x2"), (List{1, 2, 4, 8, 16}));
  EXPECT_EQ(parse_count_list("1K, 2KiB,1M"), (List{1024, 2048, 1 << 20}));
  EXPECT_EQ(parse_count_list("5:13:8,8:16:8"), (List{5, 8, 13, 16}));
  EXPECT_EQ(parse_count_list("1:1M:x2").size(), 21U);
}

TEST(CountList, Errors) {
  EXPECT_THROW((void)parse_count_list(""), ConfigError);
  EXPECT_THROW((void)parse_count_list("abc"), ConfigError);
  EXPECT_THROW((void)parse_count_list("4:1"), ConfigError);
  EXPECT_THROW((void)parse_count_list("1:8:0"), ConfigError);
  EXPECT_THROW((void)parse_count_list("1:8:x1"), ConfigError);
  EXPECT_THROW((void)parse_count_list("1:2:3:4"), ConfigError);
  EXPECT_THROW((void)parse_count_list("1,,2"), ConfigError);
  EXPECT_THROW((void)parse_count_list("4Q"), ConfigError);
}

TEST(Config, SweepFields) {
  const LabConfig c = parse_config(R"({
    "topology": "yahoo",
    "mapping": "cyclic",
    "procs": "16:32:8",
    "sizes": [1, 1024, 64],
    "algorithms": ["sparbit", "bruck"],
    "seed": 42,
    "repetitions": 3
  })");
  ASSERT_TRUE(c.topology.has_value());
  EXPECT_EQ(c.topology->machine_count(), 16U);
  EXPECT_EQ(c.mapping, MappingKind::Cyclic);
  EXPECT_EQ(c.procs, (std::vector<std::uint32_t>{16, 24, 32}));
  EXPECT_EQ(c.sizes, (List{1, 64, 1024}));
  EXPECT_EQ(c.algorithms, (std::vector<AlgorithmId>{AlgorithmId::Sparbit, AlgorithmId::Bruck}));
  EXPECT_EQ(c.seed, 42U);
  EXPECT_EQ(c.repetitions, 3U);
}

TEST(Config, EmptyDocumentLeavesEverythingUnset) {
  const LabConfig c = parse_config("{}");
  EXPECT_FALSE(c.topology.has_value());
  EXPECT_FALSE(c.mapping.has_value());
  EXPECT_TRUE(c.procs.empty());
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, TopologyTree) {
  const LabConfig c = parse_config(R"({
    "topology": {
      "levels": [
        {"name": "node", "alpha": 0.5, "beta": 0.001},
        {"name": "rack", "alpha": 2, "beta": 0.004},
        {"name": "core", "alpha": 8, "beta": 0.016}
      ],
      "tree": {"children": [
        {"children": [{"slots": 4}, {"slots": 4}]},
        {"children": [{"slots": 2}]}
      ]}
    }
  })");
  const Topology& t = *c.topology;
  EXPECT_EQ(t.level_count(), 3U);
  EXPECT_EQ(t.level(1).name, "rack");
  EXPECT_EQ(t.level(2).params, (HockneyParams{8, 0.016}));
  EXPECT_EQ(t.machine_count(), 3U);
  EXPECT_EQ(t.total_slots(), 10U);
  EXPECT_EQ(t.common_level(0, 1), 1U);
  EXPECT_EQ(t.common_level(1, 2), 2U);
}

TEST(Config, TopologyAtTopLevelAndShorthands) {
  const LabConfig flat = parse_config(R"({
    "levels": [{"alpha": 1, "beta": 0}, {"alpha": 3, "beta": 0.5}],
    "machines": [8, {"slots": 8}]
  })");
  ASSERT_TRUE(flat.topology.has_value());
  EXPECT_EQ(flat.topology->machine_count(), 2U);
  EXPECT_EQ(flat.topology->level(0).name, "level0");

  const LabConfig uni = parse_config(R"({"topology": {"preset": "uniform", "alpha": 2, "slots": 16}})");
  EXPECT_EQ(uni.topology->level(0).params, (HockneyParams{2, kDefaultUniformParams.beta}));
  EXPECT_EQ(uni.topology->total_slots(), 16U);

  const LabConfig one = parse_config(R"({"levels": [{"alpha": 1, "beta": 2}], "slots": 12})");
  EXPECT_EQ(one.topology->total_slots(), 12U);
}

TEST(Config, MalformedJsonReportsLine) {
  const ConfigError e = config_error("{\n  \"procs\": \"8\",\n  \"sizes\": [1, 2,,]\n}\n");
  EXPECT_EQ(e.source(), "cfg.json");
  EXPECT_EQ(e.line(), 3U);
  EXPECT_GT(e.column(), 0U);
  EXPECT_NE(std::string(e.what()).find("cfg.json:3:"), std::string::npos);
}

TEST(Config, SemanticErrorsReportKeyLine) {
  EXPECT_EQ(config_error("{\n\"procs\": \"8\",\n\"mapping\": \"zigzag\"\n}").line(), 3U);
  EXPECT_EQ(config_error("{\n\n\"algorithms\": [\"ring\", \"bogus\"]\n}").line(), 3U);
  EXPECT_EQ(config_error("{\"algorithms\": [\"binomial_broadcast\"]}").line(), 1U);
  EXPECT_EQ(config_error("{\n\"sizes\": \"4:1\"}").line(), 2U);
  EXPECT_EQ(config_error("{\n\"procs\": [0]}").line(), 2U);
  EXPECT_EQ(config_error("{\n\"repetitions\": 0}").line(), 2U);
  EXPECT_EQ(config_error("{\"topology\": \"fat-tree\"}").line(), 1U);
  EXPECT_EQ(config_error("[1, 2]").line(), 0U);
}

TEST(Config, TopologyErrors) {
  // Missing beta on the second level.
  const ConfigError a = config_error(R"({
  "topology": {
    "levels": [{"alpha": 1, "beta": 0},
               {"alpha": 2}],
    "slots": 4
  }
})");
  EXPECT_NE(std::string(a.what()).find("beta"), std::string::npos);

  // Machines above the bottom of the tree.
  const ConfigError b = config_error(R"({
  "levels": [{"alpha": 1, "beta": 0}, {"alpha": 2, "beta": 0}, {"alpha": 3, "beta": 0}],
  "machines": [4, 4]
})");
  EXPECT_NE(std::string(b.what()).find("invalid topology"), std::string::npos);
  EXPECT_EQ(b.line(), 2U);

  (void)config_error(R"({"levels": [{"alpha": -1, "beta": 0}], "slots": 1})");
  (void)config_error(R"({"levels": [{"alpha": 1, "beta": 0}]})");
  (void)config_error(R"({"topology": {"preset": "nope"}})");
}

TEST(Config, LoadAndResolve) {
  const auto dir = std::filesystem::temp_directory_path() / "aglab_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "topo.json";
  {
    std::ofstream out(path);
    out << R"({"levels": [{"alpha": 1, "beta": 0.5}], "slots": 6})";
  }
  EXPECT_EQ(load_config(path).topology->total_slots(), 6U);
  EXPECT_EQ(resolve_topology(path.string()).total_slots(), 6U);
  EXPECT_EQ(resolve_topology("cervino").machine_count(), 5U);
  EXPECT_THROW((void)resolve_topology((dir / "missing.json").string()), ConfigError);
  EXPECT_THROW((void)load_config(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace aglab
