#pragma once

#include <json.hpp>

#include "ucpgh/gh.hpp"

namespace ucpgh {

using json = nlohmann::json;

// Variants: {"kind": "fejer_riesz" | "toeplitz_circle" | "torus_spherical" |
// "torus_polyhedral" | "identity", "level": n, "dim": d, "vertices": [[...], ...]}.
json to_json(const Variant& v);
Variant variant_from_json(const json& j);

// Polytope names "square" / "cube" and "cross" are accepted besides explicit vertices.
LatticePolytope polytope_from_json(const json& j, int dim);

// Index sets are stored as explicit point lists.
json to_json(const IndexSet& s);
IndexSetPtr index_set_from_json(const json& j);

json to_json(const Eigen::MatrixXcd& a);  // rows of [re, im] pairs
Eigen::MatrixXcd matrix_from_json(const json& j);

// Choi and atomic maps only; pullbacks are serialized through their base map.
json to_json(const UcpMap& phi);
UcpMapPtr ucp_from_json(const json& j);

json to_json(const MetricConfig& cfg);
MetricConfig metric_config_from_json(const json& j, MetricConfig base = {});

json to_json(const DistanceResult& r);
json to_json(const DistortionReport& r);
json to_json(const KernelReport& r);
json to_json(const DualityReport& r);

}  // namespace ucpgh
