#include "ucpgh/serialize.hpp"

namespace ucpgh {

namespace {

json point_json(const LatticePoint& k, int dim) {
  json a = json::array();
  for (int mu = 0; mu < dim; ++mu) a.push_back(k[mu]);
  return a;
}

LatticePoint point_from_json(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw std::invalid_argument("expected a lattice point with " + std::to_string(dim) + " coordinates");
  LatticePoint k{0, 0, 0};
  for (int mu = 0; mu < dim; ++mu) k[mu] = j[mu].get<int>();
  return k;
}

const char* kind_name(IndexSet::Kind k) {
  switch (k) {
    case IndexSet::Kind::interval: return "interval";
    case IndexSet::Kind::ball: return "ball";
    case IndexSet::Kind::polytope: return "polytope";
  }
  return "custom";
}

}  // namespace

json to_json(const Variant& v) {
  json j{{"kind", v.name()}, {"level", v.level}, {"dim", v.dim}};
  if (v.polytope) {
    json verts = json::array();
    for (const auto& p : v.polytope->vertices()) verts.push_back(point_json(p, v.dim));
    j["vertices"] = verts;
  }
  return j;
}

LatticePolytope polytope_from_json(const json& j, int dim) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "square" || name == "cube") return LatticePolytope::cube(dim);
    if (name == "cross") return LatticePolytope::cross_polytope(dim);
    throw std::invalid_argument("unknown polytope '" + name + "'");
  }
  if (!j.is_array()) throw std::invalid_argument("polytope must be a name or a vertex list");
  std::vector<LatticePoint> pts;
  for (const auto& p : j) pts.push_back(point_from_json(p, dim));
  return LatticePolytope(dim, std::move(pts));
}

Variant variant_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw std::invalid_argument("variant: missing 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  const int level = j.value("level", 1);
  const int dim = j.value("dim", kind.rfind("torus", 0) == 0 ? 2 : 1);
  if (kind == "fejer_riesz") return Variant::fejer_riesz(level);
  if (kind == "toeplitz_circle") return Variant::toeplitz_circle(level);
  if (kind == "identity") return Variant::identity(level);
  if (kind == "torus_spherical") return Variant::torus_spherical(dim, level);
  if (kind == "torus_polyhedral") {
    const json poly = j.contains("vertices") ? j.at("vertices") : j.value("polytope", json("square"));
    return Variant::torus_polyhedral(polytope_from_json(poly, dim), level);
  }
  throw std::invalid_argument("variant: unknown kind '" + kind + "'");
}

json to_json(const IndexSet& s) {
  json j{{"dim", s.dim()}};
  json pts = json::array();
  for (const auto& p : s.points()) pts.push_back(point_json(p, s.dim()));
  const auto& poly = s.polytope_data();
  if (s.kind() == IndexSet::Kind::polytope && poly) {
    json verts = json::array();
    for (const auto& v : poly->vertices()) verts.push_back(point_json(v, s.dim()));
    j["vertices"] = verts;
  }
  // Custom sets carry no polytope.
  j["kind"] = s.kind() == IndexSet::Kind::polytope && !poly ? "custom" : kind_name(s.kind());
  j["level"] = s.level();
  j["points"] = pts;
  return j;
}

IndexSetPtr index_set_from_json(const json& j) {
  const int dim = j.at("dim").get<int>();
  const auto kind = j.value("kind", std::string("custom"));
  IndexSetPtr s;
  if (kind == "interval") s = IndexSet::interval(j.at("level").get<int>());
  else if (kind == "ball") s = IndexSet::ball(j.at("level").get<int>(), dim);
  else if (kind == "polytope") s = IndexSet::polytope(polytope_from_json(j.at("vertices"), dim), j.at("level").get<int>());
  std::vector<LatticePoint> pts;
  for (const auto& p : j.at("points")) pts.push_back(point_from_json(p, dim));
  if (!s) return IndexSet::custom(dim, std::move(pts));
  if (s->points() != pts) throw std::invalid_argument("index set: points do not match the named set");
  return s;
}

json to_json(const Eigen::MatrixXcd& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) row.push_back({a(i, k).real(), a(i, k).imag()});
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXcd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix: expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXcd a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw std::invalid_argument("matrix: ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const auto& e = j[i][k];
      a(i, k) = e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>()) : cplx(e.get<double>(), 0.0);
    }
  }
  return a;
}

json to_json(const UcpMap& phi) {
  if (const auto* c = dynamic_cast<const ChoiUcp*>(&phi))
    return {{"kind", "choi"}, {"m", c->target_dim()}, {"system", to_json(*c->index_set())}, {"choi", to_json(c->choi())}};
  if (const auto* a = phi.as_atomic()) {
    json atoms = json::array();
    for (const auto& at : a->atoms()) {
      json x = json::array();
      for (int mu = 0; mu < a->dim(); ++mu) x.push_back(at.x[mu]);
      atoms.push_back({{"x", x}, {"a", to_json(at.a)}});
    }
    return {{"kind", "atomic"}, {"m", a->target_dim()}, {"dim", a->dim()}, {"band", a->system().max_band},
            {"atoms", atoms}};
  }
  if (const auto* p = dynamic_cast<const PullbackUcp*>(&phi))
    return {{"kind", "pullback"}, {"direction", p->direction() == Pullback::R ? "R" : "S"}, {"base", to_json(*p->base())}};
  throw std::invalid_argument("to_json: unsupported UCP map");
}

UcpMapPtr ucp_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "choi") {
    auto set = index_set_from_json(j.at("system"));
    return std::make_shared<ChoiUcp>(set, matrix_from_json(j.at("choi")), j.at("m").get<int>());
  }
  if (kind == "atomic") {
    const int dim = j.at("dim").get<int>();
    std::vector<AtomicUcp::Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      AtomicUcp::Atom at;
      const auto& x = a.at("x");
      if (static_cast<int>(x.size()) != dim) throw std::invalid_argument("atomic map: atom has the wrong dimension");
      for (int mu = 0; mu < dim; ++mu) at.x[mu] = x[mu].get<double>();
      at.a = matrix_from_json(a.at("a"));
      atoms.push_back(std::move(at));
    }
    AtomicUcp map(dim, std::move(atoms));
    const int band = j.value("band", -1);
    if (band >= 0) return std::make_shared<AtomicUcp>(map.restricted(band));
    return std::make_shared<AtomicUcp>(std::move(map));
  }
  throw std::invalid_argument("ucp map: unsupported kind '" + kind + "'");
}

json to_json(const MetricConfig& c) {
  return {{"m", c.m},
          {"P", c.P},
          {"self_adjoint_only", c.self_adjoint_only},
          {"tol_obj", c.tol_obj},
          {"tail_tol", c.tail_tol},
          {"oracle_step", c.oracle_step},
          {"max_iter", c.max_iter}};
}

MetricConfig metric_config_from_json(const json& j, MetricConfig c) {
  c.m = j.value("m", c.m);
  c.P = j.value("P", c.P);
  c.self_adjoint_only = j.value("self_adjoint_only", c.self_adjoint_only);
  c.tol_obj = j.value("tol_obj", c.tol_obj);
  c.tail_tol = j.value("tail_tol", c.tail_tol);
  c.oracle_step = j.value("oracle_step", c.oracle_step);
  c.max_iter = j.value("max_iter", c.max_iter);
  return c;
}

json to_json(const DistanceResult& r) {
  return {{"value", r.value},   {"gap", r.gap},           {"tail_bound", r.tail_bound},
          {"exact", r.exact},   {"certified", r.certified}, {"solves", r.solves}};
}

json to_json(const DistortionReport& r) {
  json branches = json::array();
  for (auto b : r.branches) branches.push_back(b == Pullback::R ? "R" : "S");
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"i", p.i},
                     {"j", p.j},
                     {"d_truncated", p.d_truncated},
                     {"d_full", p.d_full},
                     {"gap_truncated", p.gap_truncated},
                     {"gap_full", p.gap_full},
                     {"discrepancy", p.discrepancy()}});
  return {{"c_fwd", r.c_fwd},
          {"c_bwd", r.c_bwd},
          {"gh_upper", r.gh_upper},
          {"gh_upper_is_bound_only", true},
          {"certified_bound", r.certified_bound},
          {"emp_distortion", r.emp_distortion},
          {"max_solver_gap", r.max_solver_gap},
          {"tail_bound", r.tail_bound},
          {"branches", branches},
          {"pairs", pairs}};
}

json to_json(const KernelReport& r) {
  json window = json::array();
  for (const auto& [m, v] : r.window) window.push_back({{"m", {m[0], m[1], m[2]}}, {"hat", v}});
  return {{"min_grid_value", r.min_grid_value},
          {"coeff_at_zero", r.coeff_at_zero},
          {"window", window},
          {"outside_mass", r.outside_mass},
          {"outside_mass_error", r.outside_mass_error}};
}

json to_json(const DualityReport& r) {
  json w = json::array();
  for (const auto& c : r.witness) w.push_back({c.real(), c.imag()});
  return {{"psd", r.psd},
          {"min_eigenvalue", r.min_eigenvalue},
          {"pairing_positive", r.pairing_positive},
          {"min_pairing", r.min_pairing},
          {"agree", r.agree()},
          {"witness", w}};
}

}  // namespace ucpgh
