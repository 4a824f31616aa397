#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cptq {

/// Numeric two-column CSV with a fixed header row and `# key=value` metadata lines.
struct TwoColumnCsv {
  std::vector<std::pair<double, double>> rows;
  std::map<std::string, std::string> metadata;
};

/// Reads rows after the header line `header` (e.g. "x,value"). Comment lines
/// starting with '#' may appear anywhere; those of the form `# key=value` are
/// collected into `metadata`.
TwoColumnCsv read_two_column_csv(std::istream& in, std::string_view header);

std::string trim(std::string_view s);

}  // namespace cptq
