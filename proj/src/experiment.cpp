#include "ucpgh/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace ucpgh {

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (m < 1) fail("m must be >= 1");
  if (samples_each < 1) fail("samples_each must be >= 1");
  if (!(tol_obj > 0.0) || !(tail_tol > 0.0)) fail("tolerances must be positive");
  if (!(kernel_delta > 0.0)) fail("kernel_delta must be positive");
  if (max_iter < 1) fail("max_iter must be >= 1");
  if (choi_rank < 1 || atoms < 1) fail("choi_rank and atoms must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1");
  for (const auto& e : entries) {
    for (std::size_t i = 0; i < e.levels.size(); ++i) {
      if (e.levels[i] < 1) fail("sweep levels must be >= 1");
      if (i > 0 && e.levels[i] <= e.levels[i - 1]) fail("sweep must be strictly increasing");
    }
    if (e.m && *e.m < 1) fail("m must be >= 1");
    if (e.samples_each && *e.samples_each < 1) fail("samples_each must be >= 1");
    if (e.tol_obj && !(*e.tol_obj > 0.0)) fail("tolerances must be positive");
    metric(e).validate();
  }
}

MetricConfig ExperimentConfig::metric(const SweepEntry& e) const {
  MetricConfig c;
  c.m = e.m.value_or(m);
  c.P = P;
  c.tol_obj = e.tol_obj.value_or(tol_obj);
  c.tail_tol = tail_tol;
  c.max_iter = max_iter;
  return c;
}

namespace {

SweepEntry entry_from_json(const json& j) {
  SweepEntry e;
  e.variant = variant_from_json(j.at("variant"));
  if (j.contains("sweep")) e.levels = j.at("sweep").get<std::vector<int>>();
  e.label = j.value("label", e.variant.name());
  if (j.contains("m")) e.m = j.at("m").get<int>();
  if (j.contains("samples_each")) e.samples_each = j.at("samples_each").get<int>();
  if (j.contains("tol_obj")) e.tol_obj = j.at("tol_obj").get<double>();
  return e;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  if (j.contains("variants")) {
    for (const auto& e : j.at("variants")) c.entries.push_back(entry_from_json(e));
  } else if (j.contains("variant")) {
    c.entries.push_back(entry_from_json(j));
  }
  c.m = j.value("m", c.m);
  c.P = j.value("P", c.P);
  c.samples_each = j.value("samples_each", c.samples_each);
  c.seed = j.value("seed", c.seed);
  c.tol_obj = j.value("tol_obj", c.tol_obj);
  c.tail_tol = j.value("tail_tol", c.tail_tol);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.choi_rank = j.value("choi_rank", c.choi_rank);
  c.atoms = j.value("atoms", c.atoms);
  c.same_branch_only = j.value("same_branch_only", c.same_branch_only);
  c.timings = j.value("timings", c.timings);
  c.jobs = j.value("jobs", c.jobs);
  c.kernel_delta = j.value("kernel_delta", c.kernel_delta);
  c.kernel_window = j.value("kernel_window", c.kernel_window);
  c.out = j.value("out", c.out);
  c.audit_dir = j.value("audit_dir", c.audit_dir);
  return c;
}

json to_json(const ExperimentConfig& c) {
  json entries = json::array();
  for (const auto& e : c.entries) {
    json je{{"variant", to_json(e.variant)}, {"sweep", e.levels}, {"label", e.label}};
    if (e.m) je["m"] = *e.m;
    if (e.samples_each) je["samples_each"] = *e.samples_each;
    if (e.tol_obj) je["tol_obj"] = *e.tol_obj;
    entries.push_back(je);
  }
  return {{"variants", entries},       {"m", c.m},
          {"P", c.P},                   {"samples_each", c.samples_each},
          {"seed", c.seed},             {"tol_obj", c.tol_obj},
          {"tail_tol", c.tail_tol},     {"max_iter", c.max_iter},
          {"choi_rank", c.choi_rank},   {"atoms", c.atoms},
          {"same_branch_only", c.same_branch_only}, {"timings", c.timings},
          {"kernel_delta", c.kernel_delta}, {"kernel_window", c.kernel_window}};
}

std::uint64_t level_seed(std::uint64_t seed, std::size_t entry, int level) {
  return derive_seed(derive_seed(seed, entry), static_cast<std::uint64_t>(level));
}

SweepRow run_level(const ExperimentConfig& cfg, std::size_t entry, int level) {
  const auto& e = cfg.entries.at(entry);
  SweepRow row;
  row.label = e.label.empty() ? e.variant.name() : e.label;
  row.variant = e.variant.at_level(level);
  row.seed = level_seed(cfg.seed, entry, level);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto pair = std::make_shared<const TruncationPair>(row.variant);
    std::tie(row.c_fwd, row.c_bwd) = pair->certified_constants();
    row.gh_upper = gh_upper_bound(*pair);
    const auto triples = make_triples(*pair);
    SamplerOptions so;
    so.choi_rank = cfg.choi_rank;
    so.atoms = cfg.atoms;
    const auto metric = cfg.metric(e);
    const auto cs = build_correspondence(pair, e.samples_each.value_or(cfg.samples_each), metric.m, row.seed, so);
    DistortionOptions dopt;
    dopt.same_branch_only = cfg.same_branch_only;
    row.report = empirical_distortion(cs, metric, triples, dopt);
    row.ok = true;
  } catch (const std::exception& ex) {
    row.ok = false;
    row.error = ex.what();
  }
  row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::size_t, int>> tasks;
  for (std::size_t e = 0; e < cfg.entries.size(); ++e)
    for (int l : cfg.entries[e].levels) tasks.emplace_back(e, l);
  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t; (t = next++) < tasks.size();) rows[t] = run_level(cfg, tasks[t].first, tasks[t].second);
  };
  if (cfg.jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < cfg.jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

const char* const kSweepColumns = "variant,level,c_fwd,c_bwd,gh_upper,emp_distortion,max_solver_gap,runtime_ms";

std::string sweep_csv(const std::vector<SweepRow>& rows, bool timings) {
  std::string out = std::string(kSweepColumns) + "\n";
  for (const auto& r : rows) {
    out += r.label + "," + std::to_string(r.variant.level) + "," + fmt(r.c_fwd) + "," + fmt(r.c_bwd) + "," +
           fmt(r.gh_upper) + ",";
    if (r.ok)
      out += fmt(r.report.emp_distortion) + "," + fmt(r.report.max_solver_gap);
    else
      out += "failed,failed";
    out += "," + fmt(timings ? r.runtime_ms : 0.0) + "\n";
  }
  return out;
}

json audit_json(const ExperimentConfig& cfg, const SweepRow& row) {
  json j{{"variant", to_json(row.variant)},
         {"label", row.label},
         {"level", row.variant.level},
         {"seed", row.seed},
         {"ok", row.ok},
         {"config", to_json(cfg)}};
  if (row.ok)
    j["report"] = to_json(row.report);
  else
    j["error"] = row.error;
  if (cfg.timings) j["runtime_ms"] = row.runtime_ms;
  j["notes"] =
      "gh_upper = c_fwd + c_bwd is an upper bound on the Gromov-Hausdorff distance, not the distance. Reported "
      "distances carry solver gaps and the weight tail beyond P; full-side distances on C(T^d) use a band-limited "
      "surrogate unless both maps are atomic.";
  return j;
}

int write_sweep(const ExperimentConfig& cfg, const std::vector<SweepRow>& rows) {
  write_text(cfg.out, sweep_csv(rows, cfg.timings));
  if (!cfg.audit_dir.empty()) {
    for (const auto& r : rows)
      write_text((std::filesystem::path(cfg.audit_dir) / (r.label + "_" + std::to_string(r.variant.level) + ".json"))
                     .string(),
                 audit_json(cfg, r).dump(2) + "\n");
  }
  bool any_ok = rows.empty();
  for (const auto& r : rows) any_ok = any_ok || r.ok;
  return any_ok ? 0 : 2;
}

json kernel_report(const ExperimentConfig& cfg) {
  cfg.validate();
  json variants = json::array();
  for (const auto& e : cfg.entries) {
    json levels = json::array();
    for (int l : e.levels) {
      const TruncationPair pair(e.variant.at_level(l));
      const Kernel& k = pair.roundtrip_kernel();
      const auto moment = kernel_first_moment(k);
      const auto [cf, cb] = pair.certified_constants();
      levels.push_back({{"level", l},
                        {"checks", to_json(kernel_checks(k, cfg.kernel_delta, cfg.kernel_window))},
                        {"first_moment", moment.value},
                        {"first_moment_upper", moment.certified_upper},
                        {"c_fwd", cf},
                        {"c_bwd", cb}});
    }
    variants.push_back({{"label", e.label.empty() ? e.variant.name() : e.label},
                        {"variant", to_json(e.variant)},
                        {"delta", cfg.kernel_delta},
                        {"levels", levels}});
  }
  return {{"variants", variants}};
}

json duality_report(int count, int n_min, int n_max, int trials, std::uint64_t seed) {
  if (count < 0 || n_min < 1 || n_max < n_min || trials < 1)
    throw std::invalid_argument("duality: need count >= 0, 1 <= n_min <= n_max, trials >= 1");
  const auto corpus = duality_corpus(count, n_min, n_max, seed);
  json cases = json::array();
  int agree = 0, psd = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto r = duality_order_check(corpus[i], trials, derive_seed(seed, 1000 + i));
    agree += r.agree();
    psd += r.psd;
    json c = to_json(r);
    c["n"] = corpus[i].index_set().level();
    if (r.psd) c.erase("witness");
    cases.push_back(c);
  }
  return {{"count", count},
          {"psd", psd},
          {"agreement_rate", corpus.empty() ? 1.0 : static_cast<double>(agree) / corpus.size()},
          {"cases", cases}};
}

}  // namespace ucpgh
