#pragma once

#include "ucpgh/ucpmetric.hpp"

namespace ucpgh {

// One element of the correspondence: a map on the truncated system E_n and a map on
// the full system E with full = truncated o R (R branch) or truncated = full o S (S branch).
struct CorrespondencePair {
  UcpMapPtr truncated;
  UcpMapPtr full;
  Pullback branch = Pullback::R;
  std::uint64_t seed = 0;
};

struct CorrespondenceSample {
  TruncationPairPtr pair;
  int m = 1;
  std::uint64_t seed = 0;
  std::vector<CorrespondencePair> pairs;
};

struct SamplerOptions {
  int choi_rank = 2;  // dilation rank of sampled Choi maps
  int atoms = 3;      // atoms of sampled atomic maps
};

// samples_each R-branch pairs (maps sampled on E_n) followed by samples_each S-branch
// pairs (maps sampled on E).
CorrespondenceSample build_correspondence(const TruncationPairPtr& pair, int samples_each, int m, std::uint64_t seed,
                                          const SamplerOptions& opt = {});

struct PairDiscrepancy {
  int i = 0, j = 0;
  double d_truncated = 0.0, d_full = 0.0;
  double gap_truncated = 0.0, gap_full = 0.0;
  double discrepancy() const { return std::abs(d_truncated - d_full); }
};

struct DistortionReport {
  double c_fwd = 0.0, c_bwd = 0.0;
  double emp_distortion = 0.0;
  double certified_bound = 0.0;  // 2 (c_fwd + c_bwd)
  double gh_upper = 0.0;         // c_fwd + c_bwd, an upper bound only
  double max_solver_gap = 0.0;
  double tail_bound = 0.0;
  std::vector<Pullback> branches;
  std::vector<PairDiscrepancy> pairs;

  // emp_distortion <= certified_bound + slack.
  bool within_bound(double slack) const { return emp_distortion <= certified_bound + slack; }
  // Same-branch pairs violating d_E(phi_n R, psi_n R) <= d_{E_n}(phi_n, psi_n) <= d_E(...) + 2 c_bwd
  // or d_{E_n}(phi S, psi S) <= d_E(phi, psi) <= d_{E_n}(...) + 2 c_fwd beyond slack.
  int chain_violations(double slack) const;
};

struct DistortionOptions {
  int jobs = 1;
  bool same_branch_only = false;
};

// Throws SolverError naming the offending pair when a distance solve fails.
DistortionReport empirical_distortion(const CorrespondenceSample& cs, const MetricConfig& cfg,
                                      const TriplePair& triples, const DistortionOptions& opt = {});

double gh_upper_bound(const TruncationPair& pair);

}  // namespace ucpgh
