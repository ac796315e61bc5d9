#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "aglab/core.hpp"
#include "aglab/netmodel.hpp"

namespace aglab {

struct SweepSpec {
  std::vector<std::uint32_t> procs;
  /// Block sizes (m / p) in bytes.
  std::vector<std::uint64_t> sizes;
  std::vector<AlgorithmId> algorithms;
  Topology topology = Topology::uniform(kDefaultUniformParams, kDefaultUniformSlots);
  MappingKind mapping = MappingKind::Sequential;
  std::uint64_t seed = 0;
  /// Wall-clock mode only: timed runs of the concurrent executor per cell.
  std::uint32_t repetitions = 1;
  /// Sparbit debug switch; see SparbitOptions.
  bool force_no_ignore = false;
  /// Block size used for the correctness run of each (algorithm, p). The
  /// schedules never depend on the block size, so one run covers all sizes.
  std::size_t verify_block_size = 8;
  /// Worker threads; 0 reads ALLGATHER_LAB_THREADS, then the hardware.
  unsigned threads = 0;
};

/// Throws std::invalid_argument for empty lists or zero entries.
void validate_spec(const SweepSpec& spec);

/// Process counts 5, 13, ..., 253 and 8, 16, ..., 256; block sizes 1 B to
/// 1 MiB doubling; the five Allgather algorithms; uniform topology.
SweepSpec default_sweep_spec();

struct SweepRow {
  std::uint32_t p = 0;
  std::uint64_t block_size = 0;
  AlgorithmId algorithm = AlgorithmId::Ring;
  std::size_t steps = 0;
  std::size_t blocks_per_rank = 0;
  double modeled_time = 0.0;
  std::uint64_t core_bytes = 0;
  bool correct = false;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SkipRecord {
  std::uint32_t p = 0;
  AlgorithmId algorithm = AlgorithmId::Ring;
  std::string reason;

  friend bool operator==(const SkipRecord&, const SkipRecord&) = default;
};

struct Dataset {
  /// Ordered by p, then block size, then algorithm name.
  std::vector<SweepRow> rows;
  std::vector<SkipRecord> skips;
};

/// Number of worker threads a sweep will use.
unsigned sweep_threads(const SweepSpec& spec);

Dataset run_sweep(const SweepSpec& spec);

/// `p,block_size,algorithm,steps,blocks_per_rank,modeled_time,core_bytes,correct`
void write_sweep_csv(std::ostream& out, const Dataset& data);
/// `p,algorithm,reason`
void write_skips_csv(std::ostream& out, const Dataset& data);
/// Inverse of write_sweep_csv. Throws ConfigError with the offending line.
Dataset read_sweep_csv(std::istream& in, const std::string& source = "<csv>");

/// Shortest decimal text that reads back as the same double.
std::string format_double(double value);

struct VerifyCheck {
  AlgorithmId algorithm = AlgorithmId::Ring;
  std::uint32_t p = 0;
  std::uint64_t block_size = 0;
  bool concurrent = false;
  bool matches_oracle = false;
  std::size_t double_writes = 0;
  bool passed = false;
  std::string message;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<SkipRecord> skips;
  std::size_t mismatches = 0;
  std::size_t sparbit_double_writes = 0;

  [[nodiscard]] std::size_t failures() const;
  [[nodiscard]] bool ok() const { return failures() == 0; }
};

/// Per-cell state budget of verify_all: cells whose p * p * block_size
/// exceeds it are skipped.
inline constexpr std::uint64_t kVerifyStateBudget = 512ULL << 20;

/// Runs execute and execute_concurrent for every applicable (algorithm, p,
/// block size) and compares each final state with the oracle. Sparbit double
/// writes fail a check unless force_no_ignore is set, in which case a non
/// power-of-two p must show at least one.
VerifyReport verify_all(const SweepSpec& spec);

void write_verify_report(std::ostream& out, const VerifyReport& report);

struct WallclockRow {
  std::uint32_t p = 0;
  std::uint64_t block_size = 0;
  AlgorithmId algorithm = AlgorithmId::Ring;
  std::uint32_t repetitions = 0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
};

/// In-process timing of execute_concurrent. Measures thread and memcpy
/// overhead, not a network; kept apart from the modeled results.
std::vector<WallclockRow> run_wallclock(const SweepSpec& spec);
void write_wallclock_csv(std::ostream& out, const std::vector<WallclockRow>& rows);

}  // namespace aglab
