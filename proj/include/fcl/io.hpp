#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcl/cones.hpp"
#include "fcl/toeplitz.hpp"

namespace fcl {

using Json = nlohmann::json;  // std::map-backed, so keys come out sorted

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

/** Entries are [re, im] pairs or plain reals; the shape must be given for empty matrices. */
inline Matrix matrix_from_json(const Json& j, Index rows, Index cols) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows)
    throw Error("config", "matrix needs " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw Error("config", "matrix row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries");
    for (Index c = 0; c < cols; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) m(r, c) = cplx(e.get<double>(), 0.0);
      else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
      else throw Error("config", "matrix entries must be numbers or [re, im] pairs");
    }
  }
  return m;
}

inline Json to_json(const FiniteComplex& c) {
  Json diffs = Json::array();
  for (const Matrix& a : c.differentials) diffs.push_back(to_json(a));
  return {{"spaces", c.spaces}, {"differentials", diffs}};
}

inline FiniteComplex complex_from_json(const Json& j) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "spaces" && it.key() != "differentials")
      throw Error("config", "unknown key '" + it.key() + "' in complex");
  std::vector<Index> spaces = j.at("spaces").get<std::vector<Index>>();
  const Json& d = j.at("differentials");
  if (!d.is_array() || d.size() + 1 != spaces.size())
    throw Error("config", "need one differential fewer than spaces");
  std::vector<Matrix> diffs;
  for (std::size_t k = 0; k < d.size(); ++k) diffs.push_back(matrix_from_json(d[k], spaces[k + 1], spaces[k]));
  return FiniteComplex(std::move(spaces), std::move(diffs));
}

inline Json to_json(const CohomologyReport& r) {
  return {{"dims", r.dims}, {"index", r.index}, {"marginal", r.marginal}};
}

inline Json to_json(const ConeDecompositionReport& r) {
  return {{"cone_dims", r.cone_dims},
          {"ker_dims", r.ker_dims},
          {"coker_dims", r.coker_dims},
          {"assumption_dims", r.assumption_dims},
          {"cone_index", r.cone_index},
          {"ker_index", r.ker_index},
          {"coker_index", r.coker_index},
          {"decomposition_holds", r.decomposition_holds},
          {"hypothesis_holds", r.hypothesis_holds},
          {"marginal", r.marginal}};
}

inline Json to_json(const ProjectedComplex& pc) {
  Json j = to_json(pc.ambient);
  Json p = Json::array();
  for (const Matrix& m : pc.projections) p.push_back(to_json(m));
  j["projections"] = p;
  return j;
}

inline ProjectedComplex projected_from_json(const Json& j) {
  Json base = {{"spaces", j.at("spaces")}, {"differentials", j.at("differentials")}};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "spaces" && it.key() != "differentials" && it.key() != "projections")
      throw Error("config", "unknown key '" + it.key() + "' in projected complex");
  ProjectedComplex pc;
  pc.ambient = complex_from_json(base);
  const Json& p = j.at("projections");
  if (!p.is_array() || p.size() != pc.ambient.spaces.size())
    throw Error("config", "need one projection per space");
  for (std::size_t k = 0; k < p.size(); ++k)
    pc.projections.push_back(matrix_from_json(p[k], pc.ambient.spaces[k], pc.ambient.spaces[k]));
  return pc;
}

/** Projected cohomology next to the lift's, with an agreement flag. */
inline Json lift_agreement(const ProjectedComplex& pc, double tol = kDefaultTol) {
  CohomologyReport a = projected_cohomology(pc, tol);
  CohomologyReport b = lift_cohomology(lift(pc), tol);
  return {{"projected", to_json(a)}, {"lift", to_json(b)}, {"lift_agreement", a.dims == b.dims}};
}

/** Writes to a temporary sibling and renames it into place. */
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot open " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("io", "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace fcl
