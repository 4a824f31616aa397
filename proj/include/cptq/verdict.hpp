#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace cptq {

enum class Holds { yes, no, inconclusive };
std::string to_string(Holds h);

struct Probe {
  std::vector<double> at;
  double value = 0.0;
};

/// Outcome of a numerical check together with the probe values that decided it.
struct ConditionVerdict {
  std::string name;
  Holds holds = Holds::inconclusive;
  std::vector<Probe> evidence;
  /// The xi, varsigma, gamma or limit estimate found by the check, if any.
  std::optional<double> parameter;
  std::string parameter_name;
  /// Finer classification where a yes/no is not the whole story (e.g. "boundary").
  std::string classification;
  std::string rule;
  std::vector<ConditionVerdict> attached;
};

nlohmann::json to_json(const ConditionVerdict& v);

/// Doubles that JSON cannot carry (inf, nan) become strings.
nlohmann::json json_number(double x);

}  // namespace cptq
