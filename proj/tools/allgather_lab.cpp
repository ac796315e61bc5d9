// allgather_lab: sweep, heatmap and verify front end.
//
//   allgather_lab sweep   --procs 8:64:8 --sizes 1:1M:x2 --out results/
//   allgather_lab heatmap --in results/sweep.csv --out results/
//   allgather_lab verify  --procs 1:64 --sizes 1,64,4096
//
// Exit status: 0 success, 1 a correctness check failed, 2 bad input.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "aglab/config.hpp"
#include "aglab/executor.hpp"
#include "aglab/heatmap.hpp"
#include "aglab/schedules.hpp"
#include "aglab/sweep.hpp"

namespace fs = std::filesystem;
using namespace aglab;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;

struct CommonArgs {
  std::string config;
  std::string topology;
  std::string mapping;
  std::string procs;
  std::string sizes;
  std::string algos;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force_no_ignore = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON file with topology, mapping and sweep fields");
  cmd->add_option("--topology", args.topology, "uniform, yahoo, cervino or a JSON topology file");
  cmd->add_option("--mapping", args.mapping, "sequential or cyclic");
  cmd->add_option("--procs", args.procs, "process counts, e.g. 5:253:8,8:256:8");
  cmd->add_option("--sizes", args.sizes, "block sizes in bytes, e.g. 1:1M:x2");
  cmd->add_option("--algos", args.algos, "comma-separated algorithm names");
  cmd->add_option("--out", args.out, "output directory (default: stdout)");
  cmd->add_option("--seed", args.seed, "payload generator seed");
  cmd->add_flag("--force-no-ignore", args.force_no_ignore,
                "debug: run Sparbit without its ignore mask");
  cmd->add_option("--threads", args.threads,
                  "worker threads (default: ALLGATHER_LAB_THREADS or all cores)");
}

std::vector<AlgorithmId> parse_algorithms(const std::string& text) {
  std::vector<AlgorithmId> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string name = text.substr(start, comma - start);
    if (!name.empty()) {
      const auto id = parse_algorithm(name);
      if (!id) throw CLI::ValidationError("--algos", "unknown algorithm '" + name + "'");
      out.push_back(*id);
    }
    start = comma + 1;
  }
  if (out.empty()) throw CLI::ValidationError("--algos", "no algorithm given");
  return out;
}

std::vector<std::uint32_t> narrow_procs(const std::vector<std::uint64_t>& values) {
  std::vector<std::uint32_t> out;
  for (std::uint64_t v : values) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
      throw CLI::ValidationError("--procs", std::to_string(v) + " is out of range");
    }
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

/// Config file first, explicit flags on top.
SweepSpec build_spec(const CommonArgs& args, SweepSpec spec) {
  if (!args.config.empty()) {
    LabConfig cfg = load_config(args.config);
    if (cfg.topology) spec.topology = *cfg.topology;
    if (cfg.mapping) spec.mapping = *cfg.mapping;
    if (!cfg.procs.empty()) spec.procs = cfg.procs;
    if (!cfg.sizes.empty()) spec.sizes = cfg.sizes;
    if (!cfg.algorithms.empty()) spec.algorithms = cfg.algorithms;
    if (cfg.seed) spec.seed = *cfg.seed;
    if (cfg.repetitions) spec.repetitions = *cfg.repetitions;
  }
  if (!args.topology.empty()) spec.topology = resolve_topology(args.topology);
  if (!args.mapping.empty()) {
    const auto kind = parse_mapping(args.mapping);
    if (!kind || *kind == MappingKind::Explicit) {
      throw CLI::ValidationError("--mapping",
                                 "expected sequential or cyclic, got '" + args.mapping + "'");
    }
    spec.mapping = *kind;
  }
  if (!args.procs.empty()) spec.procs = narrow_procs(parse_count_list(args.procs));
  if (!args.sizes.empty()) spec.sizes = parse_count_list(args.sizes);
  if (!args.algos.empty()) spec.algorithms = parse_algorithms(args.algos);
  if (args.seed) spec.seed = *args.seed;
  spec.force_no_ignore = args.force_no_ignore;
  spec.threads = args.threads;
  validate_spec(spec);
  return spec;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int run_sweep_cmd(const CommonArgs& args, bool wallclock, std::optional<std::uint32_t> repetitions) {
  SweepSpec spec = build_spec(args, default_sweep_spec());
  if (repetitions) spec.repetitions = *repetitions;
  const Dataset data = run_sweep(spec);

  if (args.out.empty()) {
    write_sweep_csv(std::cout, data);
  } else {
    fs::create_directories(args.out);
    auto csv = open_output(fs::path(args.out) / "sweep.csv");
    write_sweep_csv(csv, data);
    auto skips = open_output(fs::path(args.out) / "skips.csv");
    write_skips_csv(skips, data);
  }
  for (const SkipRecord& s : data.skips) {
    std::cerr << "skip: p=" << s.p << ' ' << algorithm_name(s.algorithm) << ": " << s.reason << '\n';
  }

  if (wallclock) {
    const auto rows = run_wallclock(spec);
    if (args.out.empty()) {
      write_wallclock_csv(std::cout, rows);
    } else {
      auto csv = open_output(fs::path(args.out) / "wallclock.csv");
      write_wallclock_csv(csv, rows);
    }
  }

  std::size_t bad = 0;
  for (const SweepRow& row : data.rows) {
    if (!row.correct) {
      ++bad;
      std::cerr << "incorrect: p=" << row.p << " block_size=" << row.block_size << ' '
                << algorithm_name(row.algorithm) << '\n';
    }
  }
  std::cerr << data.rows.size() << " rows, " << data.skips.size() << " skipped, " << bad
            << " incorrect\n";
  return bad == 0 ? 0 : kExitCheckFailed;
}

int run_heatmap_cmd(const std::string& in_path, const std::string& out_dir, const std::string& title) {
  std::ifstream in(in_path);
  if (!in) throw std::runtime_error("cannot read " + in_path);
  const Dataset data = read_sweep_csv(in, in_path);

  Heatmap map;
  try {
    map = build_heatmap(data);
  } catch (const IncompleteGrid& e) {
    std::cerr << "error: incomplete grid, missing cells:\n";
    for (const auto& [p, size] : e.missing()) {
      std::cerr << "  p=" << p << " block_size=" << size << '\n';
    }
    return kExitBadInput;
  }

  const fs::path dir = out_dir.empty() ? fs::path(in_path).parent_path() : fs::path(out_dir);
  if (!dir.empty()) fs::create_directories(dir);
  auto csv = open_output(dir / "heatmap.csv");
  write_heatmap_csv(csv, map);
  auto svg = open_output(dir / "heatmap.svg");
  write_heatmap_svg(svg, map, title);
  std::cerr << "wrote " << (dir / "heatmap.csv").string() << " and "
            << (dir / "heatmap.svg").string() << '\n';
  return 0;
}

/// Traces at the smallest block size only; the schedule is size-independent.
void write_traces(const SweepSpec& spec, const fs::path& dir) {
  fs::create_directories(dir);
  const std::uint64_t size = *std::min_element(spec.sizes.begin(), spec.sizes.end());
  for (std::uint32_t p : spec.procs) {
    for (AlgorithmId algo : spec.algorithms) {
      if (!supports(algo, p)) continue;
      const bool no_ignore = spec.force_no_ignore && algo == AlgorithmId::Sparbit;
      const ProcessGroup group = make_group(p, size, spec.seed);
      ExecuteOptions options;
      options.validate = !no_ignore;
      try {
        const Execution run = execute(build_schedule(algo, group, {no_ignore}), options);
        auto out = open_output(dir / (std::string(algorithm_name(algo)) + "_p" + std::to_string(p) +
                                      ".csv"));
        write_trace_csv(out, run.trace);
      } catch (const ExecutionError& e) {
        std::cerr << "no trace for " << algorithm_name(algo) << " p=" << p << ": " << e.what() << '\n';
      }
    }
  }
}

SweepSpec default_verify_spec() {
  SweepSpec spec = default_sweep_spec();
  spec.procs.clear();
  for (std::uint32_t p = 1; p <= 64; ++p) spec.procs.push_back(p);
  for (std::uint32_t p : {96U, 128U, 192U, 256U}) spec.procs.push_back(p);
  spec.sizes = {1, 64, 4096};
  return spec;
}

int run_verify_cmd(const CommonArgs& args, const std::string& trace_dir) {
  const SweepSpec spec = build_spec(args, default_verify_spec());
  const VerifyReport report = verify_all(spec);

  if (args.out.empty()) {
    write_verify_report(std::cout, report);
  } else {
    fs::create_directories(args.out);
    auto csv = open_output(fs::path(args.out) / "verify.csv");
    write_verify_report(csv, report);
  }
  if (!trace_dir.empty()) write_traces(spec, trace_dir);

  for (const VerifyCheck& c : report.checks) {
    if (!c.passed) {
      std::cerr << "FAIL " << algorithm_name(c.algorithm) << " p=" << c.p
                << " block_size=" << c.block_size
                << (c.concurrent ? " concurrent: " : " sequential: ") << c.message << '\n';
    }
  }
  std::cerr << report.checks.size() << " checks, " << report.failures() << " failed, "
            << report.mismatches << " oracle mismatches, " << report.sparbit_double_writes
            << " sparbit double writes, " << report.skips.size() << " skipped\n";
  return report.ok() ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Allgather schedule lab: correctness, modeled cost and heatmaps"};
  app.require_subcommand(1);

  CommonArgs sweep_args;
  bool wallclock = false;
  std::optional<std::uint32_t> repetitions;
  auto* sweep = app.add_subcommand("sweep", "model every (p, block size, algorithm) cell");
  add_common(sweep, sweep_args);
  sweep->add_flag("--wallclock", wallclock,
                  "also time the in-process concurrent executor (not a network measurement)");
  sweep->add_option("--repetitions", repetitions, "timed runs per cell in --wallclock mode");

  std::string heat_in;
  std::string heat_out;
  std::string heat_title;
  auto* heatmap = app.add_subcommand("heatmap", "best algorithm per cell from a sweep CSV");
  heatmap->add_option("--in", heat_in, "sweep CSV")->required();
  heatmap->add_option("--out", heat_out, "output directory (default: next to --in)");
  heatmap->add_option("--title", heat_title, "SVG title");

  CommonArgs verify_args;
  std::string trace_dir;
  auto* verify = app.add_subcommand("verify", "run both executors against the oracle");
  add_common(verify, verify_args);
  verify->add_option("--trace-dir", trace_dir, "write one delivery trace CSV per (algorithm, p)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep_cmd(sweep_args, wallclock, repetitions);
    if (*heatmap) return run_heatmap_cmd(heat_in, heat_out, heat_title);
    if (*verify) return run_verify_cmd(verify_args, trace_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return 0;
}
