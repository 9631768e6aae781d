#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toep/matrix.hpp"
#include "toep/report.hpp"
#include "toep/tuples.hpp"

namespace toep {
namespace io {

using json = nlohmann::json;

/// Matrix file schema: {"rows": r, "cols": c, "data": [[[re, im], ...], ...]}
/// with data row-major. Plain doubles round-trip exactly through the
/// shortest-representation printer.
inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (index_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (index_t j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

inline ComplexMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw Error(errc::bad_input, "matrix file needs rows, cols, data");
  index_t rows = j.at("rows").get<index_t>();
  index_t cols = j.at("cols").get<index_t>();
  const json& data = j.at("data");
  if (!data.is_array() || static_cast<index_t>(data.size()) != rows)
    throw Error(errc::bad_input, "data row count mismatch");
  std::vector<cdouble> entries;
  entries.reserve(static_cast<size_t>(rows * cols));
  for (const auto& row : data) {
    if (!row.is_array() || static_cast<index_t>(row.size()) != cols)
      throw Error(errc::bad_input, "data column count mismatch");
    for (const auto& cell : row) {
      if (!cell.is_array() || cell.size() != 2)
        throw Error(errc::bad_input, "entries must be [re, im] pairs");
      entries.emplace_back(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return ComplexMatrix(rows, cols, std::move(entries));
}

/// Tuple file schema: {"dim": d, "operators": [matrix...], "labels": [...]}.
inline json tuple_to_json(const OperatorTuple& t, const std::vector<std::string>& labels = {}) {
  json ops = json::array();
  for (const auto& m : t.ops()) ops.push_back(matrix_to_json(m));
  json out{{"dim", t.dim()}, {"operators", std::move(ops)}};
  if (!labels.empty()) out["labels"] = labels;
  return out;
}

inline OperatorTuple tuple_from_json(const json& j, bool check_commute = true,
                                     double tol_commute = OperatorTuple::default_tol_commute,
                                     double tol_contract = OperatorTuple::default_tol_contract) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("operators"))
    throw Error(errc::bad_input, "tuple file needs dim and operators");
  index_t dim = j.at("dim").get<index_t>();
  std::vector<ComplexMatrix> ops;
  for (const auto& mj : j.at("operators")) {
    ops.push_back(matrix_from_json(mj));
    if (!ops.back().is_square() || ops.back().rows() != dim)
      throw Error(errc::bad_input, "operator shape does not match dim");
  }
  return check_commute ? OperatorTuple::validate(std::move(ops), tol_commute, tol_contract)
                       : OperatorTuple::unchecked(std::move(ops), tol_commute, tol_contract);
}

/// Certificate schema:
/// {theorem, inputs, residuals{name: value}, tolerances{name: value},
///  measurements, notes, iterations, depth, pass}.
inline json report_to_json(const Report& rep, const json& inputs = json::object()) {
  json residuals = json::object();
  json tolerances = json::object();
  for (const auto& it : rep.items) {
    residuals[it.name] = it.value;
    tolerances[it.name] = it.tolerance;
  }
  json measurements = json::object();
  for (const auto& [name, value] : rep.measurements) measurements[name] = value;
  json out{{"theorem", rep.theorem},
           {"inputs", inputs},
           {"residuals", std::move(residuals)},
           {"tolerances", std::move(tolerances)},
           {"iterations", rep.iterations},
           {"depth", rep.depth},
           {"pass", rep.pass()}};
  if (!rep.measurements.empty()) out["measurements"] = std::move(measurements);
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out;
}

inline void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(errc::bad_input, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::bad_input, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(errc::bad_input, std::string("parse error in ") + path + ": " + e.what());
  }
  return j;
}

}  // namespace io
}  // namespace toep
