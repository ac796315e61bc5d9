#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aglab/core.hpp"
#include "aglab/netmodel.hpp"

namespace aglab {

/// Parse or validation failure in a configuration source. `line` and
/// `column` are 1-based and zero when the position is unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string source, std::size_t line, std::size_t column, const std::string& what);

  [[nodiscard]] const std::string& source() const noexcept { return source_; }
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] std::size_t column() const noexcept { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

/// Parses a comma-separated list of integers and ranges into a sorted,
/// duplicate-free list. Items: `N`, `N:M` (step 1), `N:M:S` (arithmetic),
/// `N:M:xF` (geometric). Numbers accept binary suffixes K, M, G (optionally
/// followed by "iB"). Throws ConfigError.
std::vector<std::uint64_t> parse_count_list(std::string_view text);

/// Everything a configuration file may set. Missing keys stay unset.
struct LabConfig {
  std::optional<Topology> topology;
  std::optional<MappingKind> mapping;
  std::vector<std::uint32_t> procs;
  std::vector<std::uint64_t> sizes;
  std::vector<AlgorithmId> algorithms;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> repetitions;
};

/// Parses JSON configuration text. The topology may be given under a
/// "topology" key or as the document itself (a document with "levels" or
/// "preset" at the top). Throws ConfigError with line diagnostics.
LabConfig parse_config(std::string_view text, std::string_view source = "<config>");

LabConfig load_config(const std::filesystem::path& path);

/// Built-in topology by name: "uniform", "yahoo" or "cervino".
std::optional<Topology> topology_preset(std::string_view name);

/// Resolves a preset name or a JSON file path to a topology.
Topology resolve_topology(const std::string& name_or_path);

}  // namespace aglab
