#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ucpgh/experiment.hpp"

using namespace ucpgh;

namespace {

// Command-line overrides applied on top of an optional JSON config.
struct Overrides {
  std::string config;
  std::string variant;
  int dim = 2;
  std::string polytope = "square";
  std::vector<int> sweep;
  bool has_sweep = false;
  std::optional<int> m, P, samples, jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out, audit_dir;
  bool timings = false;
  bool same_branch_only = false;
};

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON experiment config");
  app->add_option("--variant", o.variant,
                  "fejer_riesz | toeplitz_circle | torus_spherical | torus_polyhedral | identity");
  app->add_option("--dim", o.dim, "torus dimension")->check(CLI::Range(1, 3));
  app->add_option("--polytope", o.polytope, "square | cross (torus_polyhedral)");
  app->add_option("--sweep", o.sweep, "levels, e.g. --sweep 2 4 8")->expected(0, -1);
  app->add_option("--out", o.out, "output path (stdout when omitted)");
}

ExperimentConfig build_config(const Overrides& o, bool has_sweep) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = experiment_config_from_json(read_json_file(o.config));
  if (!o.variant.empty()) {
    json v{{"kind", o.variant}, {"dim", o.dim}, {"polytope", o.polytope}};
    if (o.variant == "fejer_riesz" || o.variant == "toeplitz_circle" || o.variant == "identity") v["dim"] = 1;
    SweepEntry e;
    e.variant = variant_from_json(v);
    e.label = e.variant.name();
    if (!cfg.entries.empty()) e.levels = cfg.entries.front().levels;
    cfg.entries = {e};
  }
  if (has_sweep) {
    if (cfg.entries.size() != 1) throw std::invalid_argument("--sweep needs exactly one variant");
    cfg.entries.front().levels = o.sweep;
  }
  if (o.m) cfg.m = *o.m;
  if (o.P) cfg.P = *o.P;
  if (o.samples) cfg.samples_each = *o.samples;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.seed) cfg.seed = *o.seed;
  if (o.tol) cfg.tol_obj = *o.tol;
  if (!o.out.empty()) cfg.out = o.out;
  if (!o.audit_dir.empty()) cfg.audit_dir = o.audit_dir;
  if (o.timings) cfg.timings = true;
  if (o.same_branch_only) cfg.same_branch_only = true;
  cfg.validate();
  return cfg;
}

void write_json(const std::string& path, const json& j) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << "\n";
}

SpectralTriple triple_for(const UcpMap& phi, int band) {
  const auto sys = phi.system();
  if (sys.toeplitz) return SpectralTriple::toeplitz(sys.set);
  if (sys.max_band >= 0) return SpectralTriple::function(sys.dim, sys.max_band);
  return SpectralTriple::continuum(sys.dim, band);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral truncations, UCP-map distances and Gromov-Hausdorff bounds"};
  app.require_subcommand(1);

  Overrides sw;
  auto* sweep = app.add_subcommand("sweep", "sweep truncation levels and write CSV plus audit JSON");
  add_common(sweep, sw);
  sweep->add_option("--m", sw.m, "target dimension of sampled maps");
  sweep->add_option("--P", sw.P, "number of weighted vectors (<= 8)");
  sweep->add_option("--samples", sw.samples, "sampled pairs per branch");
  sweep->add_option("--seed", sw.seed, "base seed");
  sweep->add_option("--tol", sw.tol, "objective tolerance");
  sweep->add_option("--jobs", sw.jobs, "levels run in parallel");
  sweep->add_option("--audit-dir", sw.audit_dir, "directory for per-level JSON audit files");
  sweep->add_flag("--timings", sw.timings, "fill the runtime_ms column");
  sweep->add_flag("--same-branch-only", sw.same_branch_only, "compare only pairs from the same branch");

  Overrides kn;
  double delta = -1.0;
  auto* kernels = app.add_subcommand("kernels", "roundtrip kernel checks per level as JSON");
  add_common(kernels, kn);
  kernels->add_option("--delta", delta, "radius for the outside-mass check");

  std::string map_a, map_b;
  int band = 16, dist_P = 6;
  double dist_tol = 1e-4;
  auto* dist = app.add_subcommand("distance", "distance between two serialized UCP maps");
  dist->add_option("phi", map_a, "JSON file of the first map")->required();
  dist->add_option("psi", map_b, "JSON file of the second map")->required();
  dist->add_option("--P", dist_P, "number of weighted vectors (<= 8)");
  dist->add_option("--tol", dist_tol, "objective tolerance");
  dist->add_option("--band", band, "bandwidth of the surrogate for maps on C(T^d)");

  int count = 200, n_min = 2, n_max = 5, trials = 200;
  std::uint64_t dseed = 1;
  std::string dout;
  auto* dual = app.add_subcommand("duality", "PSD versus positive-pairing agreement on a random Toeplitz corpus");
  dual->add_option("--count", count, "corpus size");
  dual->add_option("--n-min", n_min, "smallest truncation size");
  dual->add_option("--n-max", n_max, "largest truncation size");
  dual->add_option("--trials", trials, "random trigonometric polynomials per matrix");
  dual->add_option("--seed", dseed, "seed");
  dual->add_option("--out", dout, "output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ExperimentConfig cfg;
  try {
    if (*sweep) {
      cfg = build_config(sw, sweep->count("--sweep") > 0);
    } else if (*kernels) {
      cfg = build_config(kn, kernels->count("--sweep") > 0);
      if (delta > 0) cfg.kernel_delta = delta;
      cfg.validate();
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*sweep) {
      const auto rows = run_sweep(cfg);
      for (const auto& r : rows)
        if (!r.ok) std::cerr << r.label << " level " << r.variant.level << " failed: " << r.error << "\n";
      const int code = write_sweep(cfg, rows);
      if (code == 2) std::cerr << "every row failed\n";
      return code;
    }
    if (*kernels) {
      write_json(cfg.out, kernel_report(cfg));
      return 0;
    }
    if (*dist) {
      UcpMapPtr phi, psi;
      MetricConfig mc;
      try {
        phi = ucp_from_json(read_json_file(map_a));
        psi = ucp_from_json(read_json_file(map_b));
        mc.m = phi->target_dim();
        mc.P = dist_P;
        mc.tol_obj = dist_tol;
        mc.validate();
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
      const auto triple = triple_for(*phi, band);
      try {
        write_json("", to_json(distance(*phi, *psi, mc, triple)));
      } catch (const SolverError& e) {
        std::cerr << e.what() << "\n";
        return 2;
      }
      return 0;
    }
    if (*dual) {
      json rep;
      try {
        rep = duality_report(count, n_min, n_max, trials, dseed);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
      }
      write_json(dout, rep);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
