#include "cptq/verdict.hpp"

#include <cmath>

#include "cptq/extended_real.hpp"

namespace cptq {

std::string to_string(Holds h) {
  switch (h) {
    case Holds::yes:
      return "yes";
    case Holds::no:
      return "no";
    case Holds::inconclusive:
      return "inconclusive";
  }
  return {};
}

nlohmann::json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return ExtendedReal::from_double(x).to_string();
  return x;
}

nlohmann::json to_json(const ConditionVerdict& v) {
  nlohmann::json j;
  j["name"] = v.name;
  j["holds"] = to_string(v.holds);
  if (!v.classification.empty()) j["classification"] = v.classification;
  if (v.parameter) {
    j["parameter"] = {{"name", v.parameter_name}, {"value", json_number(*v.parameter)}};
  }
  j["rule"] = v.rule;
  nlohmann::json ev = nlohmann::json::array();
  for (const Probe& p : v.evidence) {
    nlohmann::json at = nlohmann::json::array();
    for (double a : p.at) at.push_back(json_number(a));
    ev.push_back({{"at", at}, {"value", json_number(p.value)}});
  }
  j["evidence"] = ev;
  if (!v.attached.empty()) {
    nlohmann::json sub = nlohmann::json::array();
    for (const auto& a : v.attached) sub.push_back(to_json(a));
    j["attached"] = sub;
  }
  return j;
}

}  // namespace cptq
