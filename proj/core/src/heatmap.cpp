#include "aglab/heatmap.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <ostream>
#include <sstream>

namespace aglab {

namespace {

std::string describe_missing(const std::vector<std::pair<std::uint32_t, std::uint64_t>>& missing) {
  std::ostringstream msg;
  msg << missing.size() << " heatmap cell(s) have no data:";
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
    msg << " (p=" << missing[i].first << ", block_size=" << missing[i].second << ")";
  }
  if (missing.size() > 20) msg << " ...";
  return msg.str();
}

}  // namespace

IncompleteGrid::IncompleteGrid(std::vector<std::pair<std::uint32_t, std::uint64_t>> missing)
    : std::runtime_error(describe_missing(missing)), missing_(std::move(missing)) {}

const HeatmapCell& Heatmap::at(std::uint32_t p, std::uint64_t block_size) const {
  const auto pi = std::lower_bound(procs.begin(), procs.end(), p);
  const auto si = std::lower_bound(sizes.begin(), sizes.end(), block_size);
  if (pi == procs.end() || *pi != p || si == sizes.end() || *si != block_size) {
    throw std::out_of_range("no heatmap cell for p=" + std::to_string(p) +
                            ", block_size=" + std::to_string(block_size));
  }
  return cells[static_cast<std::size_t>(pi - procs.begin()) * sizes.size() +
               static_cast<std::size_t>(si - sizes.begin())];
}

Heatmap build_heatmap(const Dataset& data) {
  Heatmap map;
  for (const SweepRow& row : data.rows) {
    map.procs.push_back(row.p);
    map.sizes.push_back(row.block_size);
    map.algorithms.push_back(row.algorithm);
  }
  auto unique_sorted = [](auto& v, auto less) {
    std::sort(v.begin(), v.end(), less);
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  unique_sorted(map.procs, std::less<>{});
  unique_sorted(map.sizes, std::less<>{});
  unique_sorted(map.algorithms,
                [](AlgorithmId a, AlgorithmId b) { return algorithm_name(a) < algorithm_name(b); });

  std::map<std::pair<std::uint32_t, std::uint64_t>, std::vector<std::optional<double>>> grid;
  for (const SweepRow& row : data.rows) {
    auto& times = grid[{row.p, row.block_size}];
    times.resize(map.algorithms.size());
    const auto col = std::find(map.algorithms.begin(), map.algorithms.end(), row.algorithm) -
                     map.algorithms.begin();
    times[static_cast<std::size_t>(col)] = row.modeled_time;
  }

  std::vector<std::pair<std::uint32_t, std::uint64_t>> missing;
  for (std::uint32_t p : map.procs) {
    for (std::uint64_t size : map.sizes) {
      const auto it = grid.find({p, size});
      if (it == grid.end()) {
        missing.emplace_back(p, size);
        continue;
      }
      HeatmapCell cell{p, size, AlgorithmId::Ring, 0.0, false, it->second};
      // Columns are in name order, so the first strict minimum wins ties.
      std::optional<std::size_t> best;
      std::optional<std::size_t> second;
      for (std::size_t c = 0; c < cell.times.size(); ++c) {
        if (!cell.times[c]) continue;
        const double t = *cell.times[c];
        if (!best || t < *cell.times[*best]) {
          second = best;
          best = c;
        } else if (!second || t < *cell.times[*second]) {
          second = c;
        }
      }
      cell.winner = map.algorithms[*best];
      if (second) {
        const double b = *cell.times[*best];
        const double s = *cell.times[*second];
        cell.tie_broken = b == s;
        cell.improvement_pct = s > 0.0 ? (s - b) / s * 100.0 : 0.0;
      }
      map.cells.push_back(std::move(cell));
    }
  }
  if (!missing.empty()) throw IncompleteGrid(std::move(missing));
  return map;
}

void write_heatmap_csv(std::ostream& out, const Heatmap& map) {
  out << "p,block_size,winner,improvement_pct";
  for (AlgorithmId a : map.algorithms) out << ',' << algorithm_name(a);
  out << '\n';
  for (const HeatmapCell& cell : map.cells) {
    out << cell.p << ',' << cell.block_size << ',' << algorithm_name(cell.winner) << ','
        << format_double(cell.improvement_pct);
    for (const auto& t : cell.times) {
      out << ',';
      if (t) out << format_double(*t);
    }
    out << '\n';
  }
}

namespace {

std::string_view category_colour(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::Bruck: return "#1f77b4";
    case AlgorithmId::RecursiveDoubling: return "#2ca02c";
    case AlgorithmId::Ring: return "#d62728";
    case AlgorithmId::NeighborExchange: return "#ff7f0e";
    default: return "#9467bd";
  }
}

/// 0% -> light grey, 100% -> near black.
std::string grey(double improvement_pct) {
  const double clamped = std::clamp(improvement_pct, 0.0, 100.0);
  const int level = static_cast<int>(225.0 - 2.0 * clamped);
  std::ostringstream s;
  s << "rgb(" << level << ',' << level << ',' << level << ')';
  return s.str();
}

std::string size_label(std::uint64_t bytes) {
  if (bytes >= (1ULL << 20) && bytes % (1ULL << 20) == 0) return std::to_string(bytes >> 20) + "MiB";
  if (bytes >= (1ULL << 10) && bytes % (1ULL << 10) == 0) return std::to_string(bytes >> 10) + "KiB";
  return std::to_string(bytes) + "B";
}

}  // namespace

void write_heatmap_svg(std::ostream& out, const Heatmap& map, std::string_view title) {
  constexpr int cell = 12;
  constexpr int left = 70;
  constexpr int top = 40;
  constexpr int legend_width = 190;
  const int cols = static_cast<int>(map.procs.size());
  const int rows = static_cast<int>(map.sizes.size());
  const int width = left + cols * cell + 20 + legend_width;
  const int height = std::max(top + rows * cell + 50, top + 200);

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"9\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << left << "\" y=\"18\" font-size=\"12\">" << title << "</text>\n";
  }

  // Largest block size on the top row.
  for (int si = 0; si < rows; ++si) {
    const int y = top + (rows - 1 - si) * cell;
    out << "<text x=\"" << left - 4 << "\" y=\"" << y + cell - 3 << "\" text-anchor=\"end\">"
        << size_label(map.sizes[static_cast<std::size_t>(si)]) << "</text>\n";
  }
  for (int pi = 0; pi < cols; ++pi) {
    const int x = left + pi * cell;
    out << "<text transform=\"translate(" << x + cell - 3 << ',' << top + rows * cell + 4
        << ") rotate(90)\">" << map.procs[static_cast<std::size_t>(pi)] << "</text>\n";
  }

  for (int pi = 0; pi < cols; ++pi) {
    for (int si = 0; si < rows; ++si) {
      const HeatmapCell& c =
          map.cells[static_cast<std::size_t>(pi) * map.sizes.size() + static_cast<std::size_t>(si)];
      const std::string fill = c.winner == AlgorithmId::Sparbit ? grey(c.improvement_pct)
                                                                : std::string(category_colour(c.winner));
      out << "<rect x=\"" << left + pi * cell << "\" y=\"" << top + (rows - 1 - si) * cell
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << fill
          << "\" stroke=\"white\" stroke-width=\"0.5\"><title>p=" << c.p << " block="
          << size_label(c.block_size) << " winner=" << algorithm_name(c.winner) << " +"
          << format_double(c.improvement_pct) << "%</title></rect>\n";
    }
  }

  const int lx = left + cols * cell + 20;
  int ly = top;
  for (AlgorithmId a : map.algorithms) {
    if (a == AlgorithmId::Sparbit) continue;
    out << "<rect x=\"" << lx << "\" y=\"" << ly << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"" << category_colour(a) << "\"/>\n"
        << "<text x=\"" << lx + cell + 6 << "\" y=\"" << ly + cell - 2 << "\">" << algorithm_name(a)
        << "</text>\n";
    ly += cell + 6;
  }
  if (std::find(map.algorithms.begin(), map.algorithms.end(), AlgorithmId::Sparbit) !=
      map.algorithms.end()) {
    ly += 6;
    out << "<text x=\"" << lx << "\" y=\"" << ly + 8 << "\">sparbit: improvement over 2nd best</text>\n";
    ly += 14;
    for (int k = 0; k <= 10; ++k) {
      out << "<rect x=\"" << lx + k * cell << "\" y=\"" << ly << "\" width=\"" << cell
          << "\" height=\"" << cell << "\" fill=\"" << grey(k * 10.0) << "\"/>\n";
    }
    out << "<text x=\"" << lx << "\" y=\"" << ly + cell + 10 << "\">0%</text>\n"
        << "<text x=\"" << lx + 11 * cell << "\" y=\"" << ly + cell + 10
        << "\" text-anchor=\"end\">100%</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace aglab
