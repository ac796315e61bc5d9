#include "aglab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "aglab/config.hpp"
#include "aglab/executor.hpp"
#include "aglab/schedules.hpp"

namespace aglab {

namespace {

template <class T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<AlgorithmId> by_name(std::vector<AlgorithmId> algos) {
  std::sort(algos.begin(), algos.end(), [](AlgorithmId a, AlgorithmId b) {
    return algorithm_name(a) < algorithm_name(b);
  });
  algos.erase(std::unique(algos.begin(), algos.end()), algos.end());
  return algos;
}

/// Runs fn(i) for i in [0, n) on `threads` workers.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1U), std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

bool uses_no_ignore(const SweepSpec& spec, AlgorithmId algorithm) {
  return spec.force_no_ignore && algorithm == AlgorithmId::Sparbit;
}

std::size_t max_blocks_sent(const CommSchedule& schedule) {
  std::size_t most = 0;
  for (std::uint32_t r = 0; r < schedule.group.p; ++r) {
    most = std::max(most, schedule.blocks_sent(Rank{r}));
  }
  return most;
}

}  // namespace

void validate_spec(const SweepSpec& spec) {
  if (spec.procs.empty()) throw std::invalid_argument("sweep needs at least one process count");
  if (spec.sizes.empty()) throw std::invalid_argument("sweep needs at least one block size");
  if (spec.algorithms.empty()) throw std::invalid_argument("sweep needs at least one algorithm");
  if (std::find(spec.procs.begin(), spec.procs.end(), 0U) != spec.procs.end()) {
    throw std::invalid_argument("process counts must be positive");
  }
  if (std::find(spec.sizes.begin(), spec.sizes.end(), 0ULL) != spec.sizes.end()) {
    throw std::invalid_argument("block sizes must be positive");
  }
  if (std::find(spec.algorithms.begin(), spec.algorithms.end(), AlgorithmId::BinomialBroadcast) !=
      spec.algorithms.end()) {
    throw std::invalid_argument("binomial_broadcast is not an Allgather algorithm");
  }
  if (spec.verify_block_size == 0 || spec.repetitions == 0) {
    throw std::invalid_argument("verify block size and repetitions must be positive");
  }
}

SweepSpec default_sweep_spec() {
  SweepSpec spec;
  for (std::uint32_t p = 5; p <= 253; p += 8) spec.procs.push_back(p);
  for (std::uint32_t p = 8; p <= 256; p += 8) spec.procs.push_back(p);
  spec.procs = sorted_unique(spec.procs);
  for (std::uint64_t s = 1; s <= (1ULL << 20); s <<= 1) spec.sizes.push_back(s);
  const auto all = allgather_algorithms();
  spec.algorithms.assign(all.begin(), all.end());
  spec.topology = Topology::uniform(kDefaultUniformParams, kDefaultUniformSlots);
  return spec;
}

unsigned sweep_threads(const SweepSpec& spec) {
  if (spec.threads > 0) return spec.threads;
  if (const char* env = std::getenv("ALLGATHER_LAB_THREADS")) {
    unsigned value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

Dataset run_sweep(const SweepSpec& spec) {
  validate_spec(spec);
  const auto procs = sorted_unique(spec.procs);
  const auto sizes = sorted_unique(spec.sizes);
  const auto algos = by_name(spec.algorithms);

  struct Cell {
    std::vector<SweepRow> rows;  // one per size, empty when skipped
    std::optional<SkipRecord> skip;
  };
  std::vector<Cell> cells(procs.size() * algos.size());

  parallel_for(cells.size(), sweep_threads(spec), [&](std::size_t i) {
    const std::uint32_t p = procs[i / algos.size()];
    const AlgorithmId algo = algos[i % algos.size()];
    Cell& cell = cells[i];
    if (!supports(algo, p)) {
      const auto kind = algo == AlgorithmId::NeighborExchange ? RestrictionError::Kind::OddProcessCount
                                                              : RestrictionError::Kind::NonPowerOfTwo;
      cell.skip = SkipRecord{p, algo, RestrictionError(kind, algo, p).what()};
      return;
    }
    RankMapping mapping;
    try {
      mapping = make_mapping(spec.mapping, p, spec.topology);
    } catch (const InsufficientSlots& e) {
      cell.skip = SkipRecord{p, algo, e.what()};
      return;
    }

    const ProcessGroup group = make_group(p, spec.verify_block_size, spec.seed);
    const CommSchedule schedule = build_schedule(algo, group, {uses_no_ignore(spec, algo)});
    bool correct = false;
    try {
      ExecuteOptions options;
      options.validate = !uses_no_ignore(spec, algo);
      options.record_deliveries = false;
      correct = matches_oracle(execute(schedule, options).state, group);
    } catch (const ExecutionError&) {
      correct = false;
    }

    const std::size_t blocks = max_blocks_sent(schedule);
    cell.rows.reserve(sizes.size());
    for (std::uint64_t size : sizes) {
      const CostReport cost = simulate_cost(schedule, spec.topology, mapping, size * p);
      cell.rows.push_back(
          {p, size, algo, schedule.step_count(), blocks, cost.total_time, cost.core_bytes(), correct});
    }
  });

  Dataset data;
  for (std::size_t pi = 0; pi < procs.size(); ++pi) {
    for (std::size_t si = 0; si < sizes.size(); ++si) {
      for (std::size_t ai = 0; ai < algos.size(); ++ai) {
        const Cell& cell = cells[pi * algos.size() + ai];
        if (!cell.skip) data.rows.push_back(cell.rows[si]);
      }
    }
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
      const Cell& cell = cells[pi * algos.size() + ai];
      if (cell.skip) data.skips.push_back(*cell.skip);
    }
  }
  return data;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void write_sweep_csv(std::ostream& out, const Dataset& data) {
  out << "p,block_size,algorithm,steps,blocks_per_rank,modeled_time,core_bytes,correct\n";
  for (const SweepRow& r : data.rows) {
    out << r.p << ',' << r.block_size << ',' << algorithm_name(r.algorithm) << ',' << r.steps << ','
        << r.blocks_per_rank << ',' << format_double(r.modeled_time) << ',' << r.core_bytes << ','
        << (r.correct ? "true" : "false") << '\n';
  }
}

void write_skips_csv(std::ostream& out, const Dataset& data) {
  out << "p,algorithm,reason\n";
  for (const SkipRecord& s : data.skips) {
    out << s.p << ',' << algorithm_name(s.algorithm) << ",\"" << s.reason << "\"\n";
  }
}

namespace {

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
bool parse_field(std::string_view text, T& value) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Dataset read_sweep_csv(std::istream& in, const std::string& source) {
  constexpr std::string_view kHeader =
      "p,block_size,algorithm,steps,blocks_per_rank,modeled_time,core_bytes,correct";
  Dataset data;
  std::string line;
  std::size_t number = 0;
  auto fail = [&](std::size_t column, const std::string& what) {
    throw ConfigError(source, number, column, what);
  };

  if (!std::getline(in, line)) {
    number = 1;
    fail(1, "empty file");
  }
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) fail(1, "unexpected header, want '" + std::string(kHeader) + "'");

  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) fail(1, "expected 8 fields, got " + std::to_string(f.size()));
    SweepRow row;
    const auto algo = parse_algorithm(f[2]);
    if (!parse_field(f[0], row.p) || row.p == 0) fail(1, "bad process count");
    if (!parse_field(f[1], row.block_size) || row.block_size == 0) fail(2, "bad block size");
    if (!algo) fail(3, "unknown algorithm '" + std::string(f[2]) + "'");
    row.algorithm = *algo;
    if (!parse_field(f[3], row.steps)) fail(4, "bad step count");
    if (!parse_field(f[4], row.blocks_per_rank)) fail(5, "bad block count");
    if (!parse_field(f[5], row.modeled_time)) fail(6, "bad modeled time");
    if (!parse_field(f[6], row.core_bytes)) fail(7, "bad core byte count");
    if (f[7] == "true") {
      row.correct = true;
    } else if (f[7] == "false") {
      row.correct = false;
    } else {
      fail(8, "correct must be true or false");
    }
    data.rows.push_back(row);
  }
  return data;
}

std::size_t VerifyReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const VerifyCheck& c) { return !c.passed; }));
}

VerifyReport verify_all(const SweepSpec& spec) {
  validate_spec(spec);
  const auto procs = sorted_unique(spec.procs);
  const auto sizes = sorted_unique(spec.sizes);
  const auto algos = by_name(spec.algorithms);
  VerifyReport report;

  for (std::uint32_t p : procs) {
    for (AlgorithmId algo : algos) {
      if (!supports(algo, p)) {
        report.skips.push_back({p, algo, "algorithm does not support p=" + std::to_string(p)});
        continue;
      }
      const bool no_ignore = uses_no_ignore(spec, algo);
      for (std::uint64_t size : sizes) {
        if (std::uint64_t{p} * p * size > kVerifyStateBudget) {
          report.skips.push_back({p, algo,
                                  "block size " + std::to_string(size) +
                                      " exceeds the verification memory budget"});
          continue;
        }
        const ProcessGroup group = make_group(p, size, spec.seed);
        const CommSchedule schedule = build_schedule(algo, group, {no_ignore});
        for (bool concurrent : {false, true}) {
          VerifyCheck check{algo, p, size, concurrent, false, 0, false, {}};
          try {
            ExecuteOptions options;
            options.validate = !no_ignore;
            options.record_deliveries = false;
            const Execution run =
                concurrent ? execute_concurrent(schedule, options) : execute(schedule, options);
            check.matches_oracle = matches_oracle(run.state, group);
            check.double_writes = run.trace.double_writes;
          } catch (const std::exception& e) {
            check.message = e.what();
          }
          bool writes_ok = check.double_writes == 0;
          if (no_ignore && !is_power_of_two(p)) {
            writes_ok = check.double_writes > 0;
            if (!writes_ok) check.message = "no double write without the ignore mask";
          } else if (!writes_ok) {
            check.message = std::to_string(check.double_writes) + " double writes";
          }
          if (!check.matches_oracle && check.message.empty()) check.message = "oracle mismatch";
          check.passed = check.matches_oracle && writes_ok;
          if (!check.matches_oracle) ++report.mismatches;
          if (algo == AlgorithmId::Sparbit) report.sparbit_double_writes += check.double_writes;
          report.checks.push_back(std::move(check));
        }
      }
    }
  }
  return report;
}

void write_verify_report(std::ostream& out, const VerifyReport& report) {
  out << "algorithm,p,block_size,mode,oracle_match,double_writes,passed,message\n";
  for (const VerifyCheck& c : report.checks) {
    out << algorithm_name(c.algorithm) << ',' << c.p << ',' << c.block_size << ','
        << (c.concurrent ? "concurrent" : "sequential") << ',' << (c.matches_oracle ? "true" : "false")
        << ',' << c.double_writes << ',' << (c.passed ? "true" : "false") << ",\"" << c.message
        << "\"\n";
  }
}

std::vector<WallclockRow> run_wallclock(const SweepSpec& spec) {
  validate_spec(spec);
  std::vector<WallclockRow> rows;
  for (std::uint32_t p : sorted_unique(spec.procs)) {
    for (std::uint64_t size : sorted_unique(spec.sizes)) {
      if (std::uint64_t{p} * p * size > kVerifyStateBudget) continue;
      for (AlgorithmId algo : by_name(spec.algorithms)) {
        if (!supports(algo, p)) continue;
        const ProcessGroup group = make_group(p, size, spec.seed);
        const CommSchedule schedule = build_schedule(algo, group, {uses_no_ignore(spec, algo)});
        ExecuteOptions options;
        options.validate = !uses_no_ignore(spec, algo);
        options.record_deliveries = false;
        WallclockRow row{p, size, algo, spec.repetitions, 0.0, 0.0};
        double total = 0.0;
        for (std::uint32_t k = 0; k < spec.repetitions; ++k) {
          const auto start = std::chrono::steady_clock::now();
          (void)execute_concurrent(schedule, options);
          const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
          total += took.count();
          row.min_seconds = k == 0 ? took.count() : std::min(row.min_seconds, took.count());
        }
        row.mean_seconds = total / spec.repetitions;
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_wallclock_csv(std::ostream& out, const std::vector<WallclockRow>& rows) {
  out << "p,block_size,algorithm,repetitions,mean_seconds,min_seconds\n";
  for (const WallclockRow& r : rows) {
    out << r.p << ',' << r.block_size << ',' << algorithm_name(r.algorithm) << ',' << r.repetitions
        << ',' << format_double(r.mean_seconds) << ',' << format_double(r.min_seconds) << '\n';
  }
}

}  // namespace aglab
