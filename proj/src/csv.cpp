#include "cptq/csv.hpp"

#include <cmath>
#include <istream>
#include <string>

#include "cptq/errors.hpp"

namespace cptq {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

namespace {

double parse_cell(const std::string& cell, int line_no) {
  const std::string t = trim(cell);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ParameterError("line " + std::to_string(line_no) + ": not a number: '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) {
    throw ParameterError("line " + std::to_string(line_no) + ": not a finite number: '" + t + "'");
  }
  return v;
}

}  // namespace

TwoColumnCsv read_two_column_csv(std::istream& in, std::string_view header) {
  TwoColumnCsv out;
  std::string line;
  bool seen_header = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const std::string body = trim(std::string_view(t).substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        out.metadata[trim(std::string_view(body).substr(0, eq))] = trim(std::string_view(body).substr(eq + 1));
      }
      continue;
    }
    if (!seen_header) {
      std::string compact;
      for (char c : t) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != header) {
        throw ParameterError("expected header '" + std::string(header) + "', got '" + t + "'");
      }
      seen_header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw ParameterError("line " + std::to_string(line_no) + ": expected two comma-separated columns");
    }
    out.rows.emplace_back(parse_cell(t.substr(0, comma), line_no), parse_cell(t.substr(comma + 1), line_no));
  }
  if (!seen_header) throw ParameterError("missing header '" + std::string(header) + "'");
  return out;
}

}  // namespace cptq
