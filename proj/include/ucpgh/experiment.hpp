#pragma once

#include <optional>

#include "ucpgh/serialize.hpp"

namespace ucpgh {

// One variant swept over increasing levels; m, samples_each and tol_obj fall back to
// the experiment-wide values.
struct SweepEntry {
  Variant variant;
  std::vector<int> levels;
  std::string label;  // CSV variant column; defaults to the variant name
  std::optional<int> m;
  std::optional<int> samples_each;
  std::optional<double> tol_obj;
};

struct ExperimentConfig {
  std::vector<SweepEntry> entries;
  int m = 1;
  int P = 6;
  int samples_each = 6;
  std::uint64_t seed = 1;
  double tol_obj = 1e-4;
  double tail_tol = 0.05;
  int max_iter = 2000;
  int choi_rank = 2;
  int atoms = 3;
  bool same_branch_only = false;
  bool timings = false;  // runtime_ms column is 0 otherwise, keeping runs byte-identical
  int jobs = 1;
  double kernel_delta = 0.5;
  int kernel_window = 2;
  std::string out;        // CSV path (sweep) or JSON path (kernels); empty for stdout
  std::string audit_dir;  // one JSON per sweep level; empty to skip

  // Throws std::invalid_argument.
  void validate() const;
  MetricConfig metric(const SweepEntry& e) const;
};

// Accepts {"variant": {...}, "sweep": [...]} for a single entry or
// {"variants": [{"variant": {...}, "sweep": [...], "m": .., "samples_each": .., "tol_obj": .., "label": ..}]}.
ExperimentConfig experiment_config_from_json(const json& j);
json to_json(const ExperimentConfig& cfg);

struct SweepRow {
  std::string label;
  Variant variant;
  bool ok = false;
  std::string error;
  double c_fwd = 0.0, c_bwd = 0.0, gh_upper = 0.0;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;
  DistortionReport report;
};

// Level seed, independent of scheduling.
std::uint64_t level_seed(std::uint64_t seed, std::size_t entry, int level);

SweepRow run_level(const ExperimentConfig& cfg, std::size_t entry, int level);
// Rows in sweep order. Solver failures mark the row and the sweep continues.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

extern const char* const kSweepColumns;
std::string sweep_csv(const std::vector<SweepRow>& rows, bool timings);
json audit_json(const ExperimentConfig& cfg, const SweepRow& row);
// Writes the CSV and audit files; returns 0, or 2 when every row failed.
int write_sweep(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows);

// kernel_checks, first moment and certified constants per level.
json kernel_report(const ExperimentConfig& cfg);

// Order-duality check over a random Toeplitz corpus.
json duality_report(int count, int n_min, int n_max, int trials, std::uint64_t seed);

}  // namespace ucpgh
