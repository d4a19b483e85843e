#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "qstab/circuit.hpp"
#include "qstab/classifier.hpp"
#include "qstab/error.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/learner.hpp"
#include "qstab/stabilizer.hpp"

// File formats. Matrices and curves are CSV, manifests are JSON. Run, gate and
// class indices are 1-based in every file; the in-memory API is 0-based.

namespace qstab::io {

using nlohmann::json;

/// Text that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Io, path.string() + ": " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    require(used == text.size(), ErrorCode::Io, "trailing characters in '" + text + "' (" + context + ")");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Io, "not a number: '" + text + "' (" + context + ")");
  }
}

// ---------------------------------------------------------------------------
// Gate parameter matrices: `l,r,value`, one row per entry, r-major order.
// ---------------------------------------------------------------------------

inline std::string gate_params_to_csv(const GateParamMatrix& m) {
  std::string out = "l,r,value\n";
  for (std::size_t r = 0; r < m.runs(); ++r)
    for (std::size_t l = 0; l < m.gates(); ++l)
      out += std::to_string(l + 1) + "," + std::to_string(r + 1) + "," + format_double(m(l, r)) + "\n";
  return out;
}

inline GateParamMatrix gate_params_from_csv(const std::string& text, const std::string& source = "csv") {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "l,r,value", ErrorCode::Io, source + ": expected header 'l,r,value'");
  std::map<std::pair<std::size_t, std::size_t>, double> entries;
  std::size_t max_l = 0;
  std::size_t max_r = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(lineno);
    require(cells.size() == 3, ErrorCode::Io, where + ": expected 3 fields");
    const double lf = parse_double(cells[0], where);
    const double rf = parse_double(cells[1], where);
    require(lf >= 1 && rf >= 1 && lf == std::floor(lf) && rf == std::floor(rf), ErrorCode::Io,
            where + ": indices must be positive integers");
    const auto l = static_cast<std::size_t>(lf);
    const auto r = static_cast<std::size_t>(rf);
    require(entries.emplace(std::make_pair(l, r), parse_double(cells[2], where)).second, ErrorCode::Io,
            where + ": duplicate entry");
    max_l = std::max(max_l, l);
    max_r = std::max(max_r, r);
  }
  require(!entries.empty(), ErrorCode::Io, source + ": no entries");
  require(entries.size() == max_l * max_r, ErrorCode::Io, source + ": matrix is incomplete");
  Matrix m(max_l, max_r);
  for (const auto& [key, v] : entries) m(key.first - 1, key.second - 1) = v;
  return GateParamMatrix(std::move(m));
}

inline GateParamMatrix read_gate_params(const std::filesystem::path& path) {
  return gate_params_from_csv(read_text(path), path.string());
}

inline void write_gate_params(const std::filesystem::path& path, const GateParamMatrix& m) {
  write_text(path, gate_params_to_csv(m));
}

// ---------------------------------------------------------------------------
// Matrices inside JSON are arrays of rows.
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty() && j.front().is_array() && !j.front().empty(), ErrorCode::Io,
          "matrix must be a non-empty array of rows");
  Matrix m(j.size(), j.front().size());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    require(j[i].is_array() && j[i].size() == m.cols(), ErrorCode::Io, "ragged matrix rows");
    for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

// ---------------------------------------------------------------------------
// Circuit description: {n, paulis: ["XZI", …], objective: [2ⁿ reals] | {"maxcut": [[i, j], …]}}
// ---------------------------------------------------------------------------

inline PauliCircuit circuit_from_json(const json& j) {
  try {
    PauliCircuit c;
    c.n = j.at("n").get<std::size_t>();
    for (const auto& p : j.at("paulis")) c.paulis.emplace_back(p.get<std::string>());
    const json& obj = j.at("objective");
    if (obj.is_array()) {
      c.objective = obj.get<std::vector<double>>();
    } else {
      std::vector<std::pair<std::size_t, std::size_t>> edges;
      for (const auto& e : obj.at("maxcut")) {
        require(e.is_array() && e.size() == 2, ErrorCode::InvalidArgument, "maxcut edges are [i, j] pairs");
        edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
      }
      c.objective = maxcut_objective(c.n, edges);
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("circuit description: ") + e.what());
  }
}

inline json circuit_to_json(const PauliCircuit& c) {
  json paulis = json::array();
  for (const auto& p : c.paulis) paulis.push_back(p.letters());
  return {{"n", c.n}, {"paulis", paulis}, {"objective", c.objective}};
}

// ---------------------------------------------------------------------------
// Stabilizer solution manifest
// ---------------------------------------------------------------------------

inline json solution_to_json(const StabilizerSolution& s, const StabilizerParams& p) {
  return {
      {"S", matrix_to_json(s.s)},
      {"eigenvalues", s.eigenvalues},
      {"F_star", s.f_star},
      {"chi", s.chi},
      {"tau", s.tau},
      {"Omega", s.omega},
      {"epsilon", s.epsilon},
      {"rank", s.rank},
      {"params", {{"kappa", p.kappa}, {"zeta", s.zeta}, {"c", p.c}, {"m", s.s.cols()}}},
      {"flags",
       {{"orthogonalized", s.orthogonalized}, {"reduced", s.reduced}, {"degenerate_input", s.degenerate_input}}},
  };
}

inline Matrix stabilizer_matrix_from_json(const json& j) {
  require(j.contains("S"), ErrorCode::Io, "solution manifest has no S");
  return matrix_from_json(j.at("S"));
}

// ---------------------------------------------------------------------------
// Learner output
// ---------------------------------------------------------------------------

inline json learner_to_json(const LearnerOutput& out) {
  json y = json::array();
  json dy = json::array();
  for (const auto& run : out.runs) {
    y.push_back(run.y_tilde);
    dy.push_back(run.delta_y);
  }
  return {{"z", out.projection.z}, {"b", out.projection.b}, {"y_tilde", y}, {"delta_y", dy}};
}

// ---------------------------------------------------------------------------
// Classifier model and assignments
// ---------------------------------------------------------------------------

inline json class_model_to_json(const ClassModel& m) {
  return {{"K", m.classes()},
          {"centroids", m.centroids},
          {"h", m.bandwidth},
          {"kernel_c", m.kernel_c},
          {"nu_mode", m.nu_mode == NuMode::Scaled ? "scaled" : "renormalized"}};
}

inline ClassModel class_model_from_json(const json& j) {
  try {
    ClassModel m;
    m.centroids = j.at("centroids").get<std::vector<double>>();
    require(j.at("K").get<std::size_t>() == m.centroids.size(), ErrorCode::Io, "K disagrees with centroid count");
    m.bandwidth = j.at("h").get<double>();
    m.kernel_c = j.at("kernel_c").get<double>();
    const std::string mode = j.value("nu_mode", "scaled");
    require(mode == "scaled" || mode == "renormalized", ErrorCode::Io, "unknown nu_mode " + mode);
    m.nu_mode = mode == "scaled" ? NuMode::Scaled : NuMode::Renormalized;
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("class model: ") + e.what());
  }
}

inline std::string assignments_to_csv(const std::vector<ClassAssignment>& rows) {
  std::string out = "r,p,q,xi,ell\n";
  for (const auto& a : rows)
    out += std::to_string(a.r + 1) + "," + std::to_string(a.p + 1) + "," + std::to_string(a.q + 1) + "," +
           format_double(a.xi) + "," + format_double(a.ell) + "\n";
  return out;
}

}  // namespace qstab::io
