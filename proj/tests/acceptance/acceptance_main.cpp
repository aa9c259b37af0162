// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: ucpgh_acceptance [criterion ...] [--csv-dir DIR]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "ucpgh/experiment.hpp"
#include "ucpgh/gh.hpp"

using namespace ucpgh;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string csv_dir = ".";

// Criterion 1: kernel properties.
Outcome kernels() {
  bool ok = true;
  double worst_min = 0.0;
  for (int n = 1; n <= 64; ++n) {
    const auto rep = kernel_checks(fejer_kernel(n), 0.5, 0);
    worst_min = std::min(worst_min, rep.min_grid_value);
    ok = ok && rep.min_grid_value >= -1e-10 && rep.coeff_at_zero == 1.0;
  }
  std::string detail = fmt("fejer n<=64 min grid %.2e", worst_min);
  for (const auto& [name, poly] : {std::pair{"square", LatticePolytope::cube(2)},
                                   std::pair{"cross", LatticePolytope::cross_polytope(2)}}) {
    std::map<LatticePoint, double> prev;
    double far = 0.0;
    bool monotone = true, shape = true;
    for (int N = 1; N <= 8; ++N) {
      const auto rep = kernel_checks(polyhedral_fejer_kernel(poly, N), 0.5, 2);
      shape = shape && rep.min_grid_value >= -1e-10 && rep.coeff_at_zero == 1.0;
      for (const auto& [m, v] : rep.window) {
        if (prev.count(m)) monotone = monotone && v >= prev[m] - 1e-12;
        monotone = monotone && v <= 1.0 + 1e-15;
        prev[m] = v;
        if (N == 8) far = std::max(far, 1.0 - v);
      }
    }
    ok = ok && shape && monotone && far <= 0.05;
    detail += fmt("; %s: nonneg+unit %s, hat monotone %s, max 1-hat at N=8 %.4f", name, shape ? "yes" : "no",
                  monotone ? "yes" : "no", far);
  }
  return {ok, detail};
}

std::vector<Variant> four_variants() {
  return {Variant::fejer_riesz(8), Variant::toeplitz_circle(8), Variant::torus_spherical(2, 3),
          Variant::torus_polyhedral(LatticePolytope::cube(2), 3)};
}

// Criterion 2: S o R is convolution with the roundtrip kernel.
Outcome roundtrip() {
  Rng rng(2002);
  double worst = 0.0;
  for (const auto& v : four_variants()) {
    const TruncationPair p(v);
    const Kernel& k = p.roundtrip_kernel();
    for (int trial = 0; trial < 100; ++trial) {
      const TrigPoly f = random_self_adjoint_poly(rng, p.dim(), 1 + trial % 10);
      worst = std::max(worst, p.symbolize_fn(p.compress(f)).max_abs_coeff_diff(convolve(k, f)));
    }
  }
  return {worst <= 1e-12, fmt("4 variants x 100 inputs, max coefficient error %.2e", worst)};
}

// Criterion 3: certified approximation on the circle.
Outcome approximation() {
  Rng rng(2003);
  bool ok = true;
  int violations = 0;
  double worst_ratio = 0.0;
  std::string consts;
  for (auto make : {&Variant::fejer_riesz, &Variant::toeplitz_circle}) {
    double prev = 1e300;
    for (int n : {2, 4, 8, 16, 32}) {
      const TruncationPair p(make(n));
      const double c = p.certified_constants().first;
      ok = ok && c < prev;
      prev = c;
      for (int trial = 0; trial < 200; ++trial) {
        const TrigPoly f = random_self_adjoint_poly(rng, 1, 1 + trial % 40, trial % 2 ? 1.0 : 2.0);
        const double err = sup_norm(p.symbolize_fn(p.compress(f)) - f).upper;
        const double lip = lipschitz_seminorm_fn(f).lower;
        if (err > c * lip + 1e-6) ++violations;
        worst_ratio = std::max(worst_ratio, err / (c * lip));
      }
      if (n == 32) {
        ok = ok && c < 0.5;
        consts += fmt("%s c_fwd(32)=%.4f ", p.variant().name().c_str(), c);
      }
    }
  }
  ok = ok && violations == 0;
  return {ok, fmt("%d violations in 2000 samples, max err/(c L) %.3f, ", violations, worst_ratio) + consts};
}

// Criterion 4: metric axioms on toeplitz_circle(4).
Outcome axioms() {
  const auto s = IndexSet::interval(4);
  const auto t = SpectralTriple::toeplitz(s);
  const auto basis = [&] {
    std::vector<ToeplitzOperator> b;
    for (const auto& m : s->differences()) b.emplace_back(s, ToeplitzOperator::Symbol{{m, 1.0}});
    return b;
  }();
  int asym = 0, tri = 0, sep = 0, small = 0, triples = 0;
  double worst_tri = -1e300;
  for (int m : {1, 2}) {
    MetricConfig cfg;
    cfg.m = m;
    for (int k = 0; k < 25; ++k, ++triples) {
      const std::uint64_t base = 4000 + 100 * m + 3 * k;
      // The third map repeats the first on every fifth triple so separation is exercised.
      std::vector<ChoiUcp> u{sample_choi_ucp(s, m, 2, base), sample_choi_ucp(s, m, 2, base + 1),
                             sample_choi_ucp(s, m, 2, k % 5 == 0 ? base : base + 2)};
      double d[3][3] = {};
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) d[i][j] = d[j][i] = distance(u[i], u[j], cfg, t).value;
      if (distance(u[1], u[0], cfg, t).value != d[0][1]) ++asym;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) {
            if (i == j || j == l || i == l) continue;
            const double excess = d[i][l] - d[i][j] - d[j][l];
            worst_tri = std::max(worst_tri, excess);
            if (excess > 3e-4) ++tri;
          }
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          if (d[i][j] > 1e-4) continue;
          ++small;
          double diff = 0.0;
          for (const auto& b : basis) diff = std::max(diff, (u[i].eval(b) - u[j].eval(b)).cwiseAbs().maxCoeff());
          if (diff > 1e-3) ++sep;
        }
    }
  }
  return {asym == 0 && tri == 0 && sep == 0,
          fmt("%d triples: asymmetric %d, triangle violations %d (max excess %.2e), separation failures %d of %d "
              "small distances",
              triples, asym, tri, worst_tri, sep, small)};
}

// Criterion 5: solver against the brute-force grid oracle.
Outcome oracle() {
  struct Family {
    const char* name;
    SpectralTriple triple;
    int m;
    std::function<UcpMapPtr(std::uint64_t)> sample;
  };
  const auto i2 = IndexSet::interval(2), i3 = IndexSet::interval(3);
  std::vector<Family> fams{
      {"toeplitz n=2 m=1", SpectralTriple::toeplitz(i2), 1,
       [&](std::uint64_t sd) { return std::make_shared<ChoiUcp>(sample_choi_ucp(i2, 1, 2, sd)); }},
      {"toeplitz n=2 m=2", SpectralTriple::toeplitz(i2), 2,
       [&](std::uint64_t sd) { return std::make_shared<ChoiUcp>(sample_choi_ucp(i2, 2, 2, sd)); }},
      {"toeplitz n=3 m=1", SpectralTriple::toeplitz(i3), 1,
       [&](std::uint64_t sd) { return std::make_shared<ChoiUcp>(sample_choi_ucp(i3, 1, 2, sd)); }},
      {"band 1 m=1", SpectralTriple::function(1, 1), 1,
       [](std::uint64_t sd) { return std::make_shared<AtomicUcp>(sample_atomic_ucp(1, 1, 3, sd).restricted(1)); }},
      {"band 1 m=2", SpectralTriple::function(1, 1), 2,
       [](std::uint64_t sd) { return std::make_shared<AtomicUcp>(sample_atomic_ucp(1, 2, 3, sd).restricted(1)); }},
      {"band 2 m=1", SpectralTriple::function(1, 2), 1,
       [](std::uint64_t sd) { return std::make_shared<AtomicUcp>(sample_atomic_ucp(1, 1, 3, sd).restricted(2)); }},
  };
  int count = 0, bad = 0;
  double worst = 0.0;
  for (std::size_t fi = 0; fi < fams.size(); ++fi) {
    MetricConfig cfg;
    cfg.m = fams[fi].m;
    for (int k = 0; k < 4; ++k, ++count) {
      const std::uint64_t sd = 5000 + 10 * fi + 2 * k;
      const auto a = fams[fi].sample(sd), b = fams[fi].sample(sd + 1);
      const double o = distance_oracle(*a, *b, cfg, fams[fi].triple);
      const double v = distance(*a, *b, cfg, fams[fi].triple).value;
      worst = std::max(worst, std::abs(v - o));
      if (std::abs(v - o) > 1e-2 + 1e-4) ++bad;
    }
  }
  return {count >= 20 && bad == 0,
          fmt("%d instances in %zu families, max |solver - oracle| %.2e, mismatches %d", count, fams.size(), worst,
              bad)};
}

// Criterion 6: point states on the circle against the bounded-Lipschitz transport value.
Outcome classical() {
  MetricConfig cfg;
  const double w = cfg.weight();
  const auto circle = SpectralTriple::continuum(1, 16);
  const auto delta = [](double x) { return AtomicUcp(1, {{{x, 0.0, 0.0}, Eigen::MatrixXcd::Identity(1, 1)}}); };
  // Optimal transport between two point masses with cost min(geodesic, 2).
  const auto transport = [](double x, double y) {
    const double g = std::abs(x - y);
    return std::min({g, kTwoPi - g, 2.0});
  };
  bool ok = true;
  std::string detail = fmt("w=%.6f", w);
  for (double y : {kPi / 4, kPi}) {
    const auto r = distance(delta(0.0), delta(y), cfg, circle);
    const double expect = w * transport(0.0, y);
    ok = ok && r.exact && std::abs(r.value - expect) <= 2e-4 * w;
    detail += fmt("; d(0, %.4f) = %.9f vs %.9f", y, r.value, expect);
  }
  return {ok, detail};
}

// Criterion 7: inequality chains on the circle.
Outcome chains() {
  MetricConfig cfg;
  DistortionOptions opt;
  opt.same_branch_only = true;
  int violations = 0, pairs = 0;
  double gap = 0.0;
  for (auto make : {&Variant::fejer_riesz, &Variant::toeplitz_circle})
    for (int n : {4, 8, 16}) {
      const auto pair = std::make_shared<const TruncationPair>(make(n));
      const auto cs = build_correspondence(pair, 5, 1, 7000 + n);
      const auto rep = empirical_distortion(cs, cfg, make_triples(*pair), opt);
      violations += rep.chain_violations(4 * cfg.tol_obj);
      pairs += static_cast<int>(rep.pairs.size());
      gap = std::max(gap, rep.max_solver_gap);
    }
  return {violations == 0, fmt("%d same-branch comparisons, %d violations, max solver gap %.2e", pairs, violations, gap)};
}

ExperimentConfig sweep_config() {
  json variants = json::array();
  for (const char* kind : {"fejer_riesz", "toeplitz_circle"})
    variants.push_back({{"variant", {{"kind", kind}}}, {"sweep", {2, 4, 8, 16, 32}}, {"samples_each", 3}});
  // One correspondence pair per torus level, solved to a looser objective tolerance.
  variants.push_back({{"variant", {{"kind", "torus_spherical"}, {"dim", 2}}},
                      {"sweep", {1, 2, 4, 8}},
                      {"samples_each", 1},
                      {"tol_obj", 1e-3}});
  variants.push_back({{"variant", {{"kind", "torus_polyhedral"}, {"polytope", "square"}}},
                      {"sweep", {1, 2, 4, 8}},
                      {"samples_each", 1},
                      {"tol_obj", 1e-3}});
  return experiment_config_from_json({{"variants", variants}, {"seed", 2024}});
}

std::string sweep_text;

// Criterion 8: gh_upper and empirical distortion along the sweep.
Outcome sweep() {
  const auto cfg = sweep_config();
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_sweep(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sweep_text = sweep_csv(rows, false);
  std::ofstream(std::filesystem::path(csv_dir) / "acceptance_sweep.csv", std::ios::binary) << sweep_text;

  bool decreasing = true, below = true, bounded = true;
  int failed = 0;
  std::string last;
  for (std::size_t e = 0; e < cfg.entries.size(); ++e) {
    double prev = 1e300, g = 0.0;
    for (const auto& r : rows) {
      if (r.label != cfg.entries[e].label) continue;
      if (!r.ok) {
        ++failed;
        std::fprintf(stderr, "  %s level %d failed: %s\n", r.label.c_str(), r.variant.level, r.error.c_str());
        continue;
      }
      decreasing = decreasing && r.gh_upper < prev;
      prev = g = r.gh_upper;
      bounded = bounded && r.report.within_bound(4 * cfg.metric(cfg.entries[e]).tol_obj);
    }
    below = below && g < 0.2;
    last += fmt("%s%s %.4f", e ? ", " : "", cfg.entries[e].label.c_str(), g);
  }
  const bool fast = secs < 1800.0;
  return {failed == 0 && decreasing && below && bounded && fast,
          fmt("%zu rows, %d failed; decreasing %s; distortion within bound %s; all last levels below 0.2 %s (", rows.size(),
              failed, decreasing ? "yes" : "no", bounded ? "yes" : "no", below ? "yes" : "no") +
              last + fmt("); sweep %.0f s", secs)};
}

// Criterion 9: PSD versus positive pairing.
Outcome duality() {
  const auto rep = duality_report(200, 2, 5, 200, 9009);
  int missing = 0;
  for (const auto& c : rep.at("cases"))
    if (!c.at("psd").get<bool>() && (!c.contains("witness") || c.at("witness").empty())) ++missing;
  const double rate = rep.at("agreement_rate").get<double>();
  return {rate == 1.0 && missing == 0, fmt("agreement %.3f over 200 matrices (%d PSD), missing witnesses %d", rate,
                                           rep.at("psd").get<int>(), missing)};
}

// Criterion 10: a second seeded sweep reproduces the CSV bytes.
Outcome determinism() {
  if (sweep_text.empty()) sweep_text = sweep_csv(run_sweep(sweep_config()), false);
  const auto again = sweep_csv(run_sweep(sweep_config()), false);
  return {again == sweep_text, fmt("%zu bytes, identical %s", again.size(), again == sweep_text ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--csv-dir") && i + 1 < argc)
      csv_dir = argv[++i];
    else
      only.insert(std::atoi(argv[i]));
  }
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"kernel suite", kernels},        {"roundtrip identity", roundtrip}, {"certified approximation", approximation},
      {"metric axioms", axioms},        {"oracle equivalence", oracle},    {"classical distances", classical},
      {"inequality chains", chains},    {"sweep", sweep},                  {"duality corpus", duality},
      {"determinism", determinism}};
  const double limits[] = {10, 5, 30, 300, 600, 0, 0, 0, 0, 0};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!only.empty() && !only.count(static_cast<int>(k + 1))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limits[k] > 0 && secs >= limits[k]) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s limit]", limits[k]);
    }
    failures += !o.pass;
    std::printf("C%zu %s %s: %s (%.1f s)\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
