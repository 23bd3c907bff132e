#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "zipcurve/cones.hpp"
#include "zipcurve/core.hpp"

namespace zipcurve {

namespace jsondetail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw std::invalid_argument("zipper json: " + path + ": " + what);
}

inline double num_at(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* name,
                                   const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(name);
  if (it == j.end()) fail(path + "." + name, "missing field");
  return *it;
}

inline Vec vec_at(const nlohmann::json& j, int d, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    fail(path, "expected an array of " + std::to_string(d) + " numbers");
  Vec v;
  v.reserve(d);
  for (int i = 0; i < d; ++i) v.push_back(num_at(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

}  // namespace jsondetail

// Schema:
//   {"dimension": d,
//    "maps": [{"matrix": [d*d row-major], "translation": [d]}, ...],
//    "vertices": [[d], ...], "signature": [0|1, ...], "weights": [...]}
inline Zipper zipper_from_json(const nlohmann::json& j) {
  using namespace jsondetail;
  Zipper z;
  const nlohmann::json& dim = field(j, "dimension", "$");
  if (!dim.is_number_integer() || dim.get<int>() < 1) fail("$.dimension", "expected a positive integer");
  z.dim = dim.get<int>();

  const nlohmann::json& maps = field(j, "maps", "$");
  if (!maps.is_array() || maps.empty()) fail("$.maps", "expected a nonempty array");
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string path = "$.maps[" + std::to_string(i) + "]";
    const nlohmann::json& jm = field(maps[i], "matrix", path);
    if (!jm.is_array() || static_cast<int>(jm.size()) != z.dim * z.dim)
      fail(path + ".matrix", "expected " + std::to_string(z.dim * z.dim) + " row-major entries");
    AffineMap f;
    f.linear = Mat(z.dim);
    for (int k = 0; k < z.dim * z.dim; ++k)
      f.linear.data()[k] = num_at(jm[k], path + ".matrix[" + std::to_string(k) + "]");
    f.offset = vec_at(field(maps[i], "translation", path), z.dim, path + ".translation");
    z.maps.push_back(std::move(f));
  }

  const nlohmann::json& verts = field(j, "vertices", "$");
  if (!verts.is_array() || verts.size() != maps.size() + 1)
    fail("$.vertices", "expected " + std::to_string(maps.size() + 1) + " vertices");
  for (std::size_t i = 0; i < verts.size(); ++i)
    z.vertices.push_back(jsondetail::vec_at(verts[i], z.dim, "$.vertices[" + std::to_string(i) + "]"));

  const nlohmann::json& sig = field(j, "signature", "$");
  if (!sig.is_array() || sig.size() != maps.size())
    fail("$.signature", "expected " + std::to_string(maps.size()) + " bits");
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const std::string path = "$.signature[" + std::to_string(i) + "]";
    if (!sig[i].is_number_integer()) fail(path, "expected 0 or 1");
    const int e = sig[i].get<int>();
    if (e != 0 && e != 1) fail(path, "expected 0 or 1");
    z.signature.push_back(e);
  }

  const nlohmann::json& w = field(j, "weights", "$");
  if (!w.is_array() || w.size() != maps.size())
    fail("$.weights", "expected " + std::to_string(maps.size()) + " weights");
  for (std::size_t i = 0; i < w.size(); ++i)
    z.weights.push_back(jsondetail::num_at(w[i], "$.weights[" + std::to_string(i) + "]"));
  return z;
}

inline nlohmann::json zipper_to_json(const Zipper& z) {
  nlohmann::json j;
  j["dimension"] = z.dim;
  j["maps"] = nlohmann::json::array();
  for (const AffineMap& f : z.maps) {
    nlohmann::json jm;
    jm["matrix"] = std::vector<double>(f.linear.data(), f.linear.data() + z.dim * z.dim);
    jm["translation"] = f.offset;
    j["maps"].push_back(std::move(jm));
  }
  j["vertices"] = z.vertices;
  j["signature"] = z.signature;
  j["weights"] = z.weights;
  return j;
}

inline Zipper load_zipper_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open zipper file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("zipper json: " + path + ": " + e.what());
  }
  return zipper_from_json(j);
}

inline nlohmann::json report_to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["pass"] = r.pass;
  j["cross_residual"] = r.cross_residual;
  j["cross_worst_map"] = r.cross_worst_map;
  j["weight_sum_residual"] = r.weight_sum_residual;
  j["min_weight"] = r.min_weight;
  j["min_det_margin"] = r.min_det_margin;
  j["contraction_factor"] = r.contraction_factor;
  j["contraction_depth"] = r.contraction_depth;
  j["failures"] = nlohmann::json::array();
  for (const ValidationIssue& f : r.failures)
    j["failures"].push_back({{"what", f.what}, {"index", f.index}, {"residual", f.residual}});
  return j;
}

inline nlohmann::json report_to_json(const ConditionReport& c) {
  return {{"condition", c.condition}, {"pass", c.pass}, {"margin", c.margin}, {"witness", c.witness}};
}

inline nlohmann::json report_to_json(const AssumptionAReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const ConditionReport& c : r.conditions) arr.push_back(report_to_json(c));
  return {{"pass", r.pass}, {"conditions", arr}};
}

inline nlohmann::json report_to_json(const ConeSearchResult& r) {
  nlohmann::json j;
  j["found"] = r.found;
  j["iterations"] = r.iterations;
  if (r.found) {
    j["lo"] = r.cone.lo;
    j["length"] = r.cone.length;
    j["margin"] = r.margin;
  } else {
    j["message"] = r.message;
  }
  return j;
}

inline nlohmann::json report_to_json(const ConjugationResult& r) {
  nlohmann::json j;
  j["found"] = r.found;
  j["best_min_entry"] = r.best_min_entry;
  if (r.found) {
    j["family"] = family_name(r.family);
    j["parameter"] = r.parameter;
    j["min_entry"] = r.min_entry;
    j["entry_norm_drift"] = r.entry_norm_drift;
    j["transform"] = std::vector<double>(r.transform.data(), r.transform.data() + 4);
  }
  return j;
}

inline nlohmann::json report_to_json(const SplittingDiagnostic& r) {
  return {{"depths", r.depths},
          {"max_ratio", r.max_ratio},
          {"decay_rate", r.decay_rate},
          {"constant", r.constant},
          {"fit_residual", r.fit_residual},
          {"no_splitting", r.no_splitting}};
}

inline nlohmann::json report_to_json(const WellOrderedReport& r) {
  nlohmann::json j;
  j["pass"] = r.pass;
  j["refused"] = r.refused;
  j["directions_checked"] = r.directions_checked;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  if (!r.pass && !r.refused) {
    j["failing_direction"] = r.failing_direction;
    j["witness"] = {r.witness[0], r.witness[1], r.witness[2]};
  }
  return j;
}

}  // namespace zipcurve
