#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "osb/errors.hpp"
#include "osb/matrix.hpp"

namespace osb {

/// Parses rows of comma-separated decimals. Blank lines are skipped.
inline Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw ParseError("matrix csv line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t", used) != std::string::npos)
        throw ParseError("matrix csv line " + std::to_string(line_no) + ": trailing characters in '" + cell + "'");
      if (!std::isfinite(v)) throw ParseError("matrix csv line " + std::to_string(line_no) + ": non-finite entry");
      row.push_back(v);
    }
    if (!line.empty() && line.back() == ',') throw ParseError("matrix csv line " + std::to_string(line_no) + ": empty cell");
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("matrix csv line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix csv is empty");
  return Matrix::from_rows(rows);
}

/// {"rows": n, "cols": N, "entries": [[...], ...]}
inline Matrix parse_matrix_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw ParseError("matrix json needs rows, cols and entries");
  const auto& jr = j.at("rows");
  const auto& jc = j.at("cols");
  if (!jr.is_number_integer() || !jc.is_number_integer() || jr.get<long long>() <= 0 || jc.get<long long>() <= 0)
    throw ParseError("matrix json: rows and cols must be positive integers");
  const auto n = jr.get<std::size_t>();
  const auto cols = jc.get<std::size_t>();
  const auto& e = j.at("entries");
  if (!e.is_array() || e.size() != n) throw ParseError("matrix json: entries must hold `rows` rows");
  std::vector<double> flat;
  flat.reserve(n * cols);
  for (const auto& r : e) {
    if (!r.is_array() || r.size() != cols) throw ParseError("matrix json: ragged row");
    for (const auto& v : r) {
      if (!v.is_number()) throw ParseError("matrix json: non-numeric entry");
      const double d = v.get<double>();
      if (!std::isfinite(d)) throw ParseError("matrix json: non-finite entry");
      flat.push_back(d);
    }
  }
  return Matrix(n, cols, std::move(flat));
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", m.to_rows()}};
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Loads a matrix file; JSON when the first non-blank character is '{', CSV otherwise.
inline Matrix load_matrix(const std::string& path) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    return parse_matrix_json(j);
  }
  return parse_matrix_csv(text);
}

}  // namespace osb
