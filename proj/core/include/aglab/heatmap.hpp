#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "aglab/core.hpp"
#include "aglab/sweep.hpp"

namespace aglab {

struct HeatmapCell {
  std::uint32_t p = 0;
  std::uint64_t block_size = 0;
  AlgorithmId winner = AlgorithmId::Ring;
  /// (second best - best) / second best * 100; 0 with a single contender.
  double improvement_pct = 0.0;
  /// The winner tied with another algorithm and won on name order.
  bool tie_broken = false;
  /// Modeled time per algorithm column; unset where the algorithm was skipped.
  std::vector<std::optional<double>> times;
};

struct Heatmap {
  /// Column order of HeatmapCell::times, sorted by name.
  std::vector<AlgorithmId> algorithms;
  std::vector<std::uint32_t> procs;
  std::vector<std::uint64_t> sizes;
  /// Ordered by p, then block size.
  std::vector<HeatmapCell> cells;

  [[nodiscard]] const HeatmapCell& at(std::uint32_t p, std::uint64_t block_size) const;
};

/// Raised when some (p, block size) of the grid has no row at all.
class IncompleteGrid : public std::runtime_error {
 public:
  explicit IncompleteGrid(std::vector<std::pair<std::uint32_t, std::uint64_t>> missing);

  [[nodiscard]] const std::vector<std::pair<std::uint32_t, std::uint64_t>>& missing() const noexcept {
    return missing_;
  }

 private:
  std::vector<std::pair<std::uint32_t, std::uint64_t>> missing_;
};

/// Picks the argmin of the modeled times per cell; ties go to the
/// algorithm whose name sorts first.
Heatmap build_heatmap(const Dataset& data);

/// `p,block_size,winner,improvement_pct,<one time column per algorithm>`
void write_heatmap_csv(std::ostream& out, const Heatmap& map);

/// Standalone SVG: one row per block size, one column per process count.
/// Classical winners get a categorical colour; Sparbit wins are grey,
/// darker for a larger improvement over the runner-up.
void write_heatmap_svg(std::ostream& out, const Heatmap& map, std::string_view title = {});

}  // namespace aglab
