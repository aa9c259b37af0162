#include "ucpgh/gh.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace ucpgh {

CorrespondenceSample build_correspondence(const TruncationPairPtr& pair, int samples_each, int m, std::uint64_t seed,
                                          const SamplerOptions& opt) {
  if (!pair) throw std::invalid_argument("build_correspondence: null truncation pair");
  if (samples_each < 1) throw std::invalid_argument("build_correspondence: samples_each must be >= 1");
  const Variant& v = pair->variant();
  CorrespondenceSample cs{pair, m, seed, {}};
  for (int i = 0; i < samples_each; ++i) {
    const std::uint64_t s = derive_seed(seed, 2 * static_cast<std::uint64_t>(i));
    UcpMapPtr base;
    if (pair->truncated_is_toeplitz())
      base = std::make_shared<ChoiUcp>(sample_choi_ucp(pair->index_set(), m, opt.choi_rank, s));
    else
      base = std::make_shared<AtomicUcp>(sample_atomic_ucp(1, m, opt.atoms, s).restricted(v.level - 1));
    cs.pairs.push_back({base, std::make_shared<PullbackUcp>(base, pair, Pullback::R), Pullback::R, s});
  }
  for (int i = 0; i < samples_each; ++i) {
    const std::uint64_t s = derive_seed(seed, 2 * static_cast<std::uint64_t>(i) + 1);
    UcpMapPtr base;
    if (pair->full_is_toeplitz())
      base = std::make_shared<ChoiUcp>(sample_choi_ucp(pair->index_set(), m, opt.choi_rank, s));
    else
      base = std::make_shared<AtomicUcp>(sample_atomic_ucp(v.dim, m, opt.atoms, s));
    cs.pairs.push_back({std::make_shared<PullbackUcp>(base, pair, Pullback::S), base, Pullback::S, s});
  }
  return cs;
}

int DistortionReport::chain_violations(double slack) const {
  int bad = 0;
  for (const auto& p : pairs) {
    if (branches[p.i] != branches[p.j]) continue;
    if (branches[p.i] == Pullback::R) {
      bad += p.d_full > p.d_truncated + slack;
      bad += p.d_truncated > p.d_full + 2 * c_bwd + slack;
    } else {
      bad += p.d_truncated > p.d_full + slack;
      bad += p.d_full > p.d_truncated + 2 * c_fwd + slack;
    }
  }
  return bad;
}

DistortionReport empirical_distortion(const CorrespondenceSample& cs, const MetricConfig& cfg,
                                      const TriplePair& triples, const DistortionOptions& opt) {
  const int n = static_cast<int>(cs.pairs.size());
  if (n < 2) throw std::invalid_argument("empirical_distortion: need at least two pairs");
  DistortionReport rep;
  std::tie(rep.c_fwd, rep.c_bwd) = cs.pair->certified_constants();
  rep.certified_bound = 2.0 * (rep.c_fwd + rep.c_bwd);
  rep.gh_upper = rep.c_fwd + rep.c_bwd;
  rep.tail_bound = cfg.tail_bound();
  for (const auto& p : cs.pairs) rep.branches.push_back(p.branch);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!opt.same_branch_only || cs.pairs[i].branch == cs.pairs[j].branch) rep.pairs.push_back({i, j});

  // Tasks are independent; results land in fixed slots so the report does not depend
  // on scheduling.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::size_t failed_at = rep.pairs.size();
  std::mutex mu;
  auto worker = [&] {
    for (std::size_t t; (t = next++) < rep.pairs.size();) {
      auto& pd = rep.pairs[t];
      try {
        const auto a = distance(*cs.pairs[pd.i].truncated, *cs.pairs[pd.j].truncated, cfg, triples.truncated);
        const auto b = distance(*cs.pairs[pd.i].full, *cs.pairs[pd.j].full, cfg, triples.full);
        pd.d_truncated = a.value;
        pd.gap_truncated = a.gap;
        pd.d_full = b.value;
        pd.gap_full = b.gap;
      } catch (const SolverError& e) {
        std::lock_guard lock(mu);
        if (t < failed_at) {
          failed_at = t;
          failure = std::make_exception_ptr(
              SolverError("pair (" + std::to_string(pd.i) + ", " + std::to_string(pd.j) + "): " + e.what(),
                          e.best_value(), e.gap()));
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (t < failed_at) failed_at = t, failure = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& pd : rep.pairs) {
    rep.emp_distortion = std::max(rep.emp_distortion, pd.discrepancy());
    rep.max_solver_gap = std::max({rep.max_solver_gap, pd.gap_truncated, pd.gap_full});
  }
  return rep;
}

double gh_upper_bound(const TruncationPair& pair) {
  const auto [f, b] = pair.certified_constants();
  return f + b;
}

}  // namespace ucpgh
