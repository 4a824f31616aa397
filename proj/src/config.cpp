#include "cptq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <vector>

#include <fmt/format.h>

namespace cptq {

namespace {

const char* const kDefaults[][2] = {
    {"kernel.model", "lognormal"},
    {"kernel.sigma", "0.2"},
    {"kernel.file", ""},
    {"kernel.states", ""},
    {"kernel.probs", ""},
    {"utility.plus.kind", "exponential"},
    {"utility.plus.alpha", "1"},
    {"utility.plus.varpi", "0.5"},
    {"utility.plus.file", ""},
    {"utility.minus.kind", "logarithmic"},
    {"utility.minus.alpha", "1"},
    {"utility.minus.varpi", "0.5"},
    {"utility.minus.file", ""},
    {"distortion.plus.kind", "prelec"},
    {"distortion.plus.beta", "1"},
    {"distortion.plus.varpi", "0.5"},
    {"distortion.plus.delta", "0.5"},
    {"distortion.plus.file", ""},
    {"distortion.minus.kind", "prelec"},
    {"distortion.minus.beta", "1"},
    {"distortion.minus.varpi", "0.5"},
    {"distortion.minus.delta", "0.5"},
    {"distortion.minus.file", ""},
    {"x0", "1"},
    {"seed", "1"},
    {"delta", "0.5"},
    {"eta", "1.2"},
    {"zeta", "1.5"},
    {"value.law", ""},
    {"check.ae_gamma", "1"},
    {"check.ae_x_lower", "1"},
    {"demo.n_max", "64"},
    {"demo.gap_tol", "0.05"},
    {"optimize.n", "512"},
    {"optimize.restarts", "16"},
    {"optimize.max_iterations", "10000"},
    {"optimize.dp_levels", "200"},
    {"optimize.lower_bound", "-inf"},
    {"optimize.upper_bound", "inf"},
    {"optimize.enforce_existence", "true"},
};

bool is_path_key(const std::string& key) {
  return key == "value.law" || (key.size() > 5 && key.compare(key.size() - 5, 5, ".file") == 0);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || std::isnan(v)) {
    throw ConfigError(fmt::format("config: {} = '{}' is not a number", key, text));
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

}  // namespace

Config Config::defaults() {
  Config c;
  for (const auto& kv : kDefaults) c.entries_[kv[0]] = kv[1];
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("config: unknown key '{}'", key));
  it->second = value;
}

void Config::merge(std::istream& in, const std::string& origin, const std::filesystem::path& base_dir) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", origin, lineno, line));
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!entries_.count(key)) throw ConfigError(fmt::format("{}:{}: unknown key '{}'", origin, lineno, key));
    if (is_path_key(key) && !value.empty() && !base_dir.empty()) {
      const std::filesystem::path p(value);
      if (p.is_relative()) value = (base_dir / p).lexically_normal().string();
    }
    entries_[key] = value;
  }
}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open {}", path.string()));
  merge(in, path.string(), path.parent_path());
}

std::string Config::env_name(const std::string& key) {
  std::string name = "CPTQ_";
  for (char ch : key) name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

void Config::apply_env(const std::function<const char*(const char*)>& lookup) {
  for (auto& [key, value] : entries_) {
    if (const char* v = lookup(env_name(key).c_str())) value = trim(v);
  }
}

const std::string& Config::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(fmt::format("config: unknown key '{}'", key));
  return it->second;
}

double Config::number(const std::string& key) const { return parse_double(key, get(key)); }

int Config::integer(const std::string& key) const {
  const std::string& text = get(key);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("config: {} = '{}' is not an integer", key, text));
  }
  return v;
}

std::uint64_t Config::u64(const std::string& key) const {
  const std::string& text = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("config: {} = '{}' is not an unsigned integer", key, text));
  }
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string& text = get(key);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("config: {} = '{}' is not a boolean", key, text));
}

std::string Config::resolved(const std::string& prefix) const {
  std::string out;
  for (const auto& [key, value] : entries_) out += fmt::format("{}{} = {}\n", prefix, key, value);
  return out;
}

UtilityFunction build_utility(const Config& c, const std::string& side) {
  const std::string base = "utility." + side + ".";
  const std::string& kind = c.get(base + "kind");
  if (kind == "power") return UtilityFunction::power(c.number(base + "alpha"));
  if (kind == "exponential") return UtilityFunction::exponential(c.number(base + "alpha"));
  if (kind == "logarithmic") return UtilityFunction::logarithmic();
  if (kind == "loglog") return UtilityFunction::loglog();
  if (kind == "prelec") return UtilityFunction::prelec(c.number(base + "alpha"), c.number(base + "varpi"));
  if (kind == "table") {
    const std::string& file = c.get(base + "file");
    if (file.empty()) throw ConfigError(fmt::format("config: {}kind = table needs {}file", base, base));
    return UtilityFunction::table(load_function_table(file));
  }
  throw ConfigError(fmt::format("config: unknown utility kind '{}' for {}kind", kind, base));
}

DistortionFunction build_distortion(const Config& c, const std::string& side, const UtilityFunction& u_minus) {
  const std::string base = "distortion." + side + ".";
  const std::string& kind = c.get(base + "kind");
  if (kind == "identity") return DistortionFunction::identity();
  if (kind == "power") return DistortionFunction::power(c.number(base + "beta"));
  if (kind == "prelec") return DistortionFunction::prelec(c.number(base + "beta"), c.number(base + "varpi"));
  if (kind == "associated") return associated_distortion(u_minus, c.number(base + "delta"));
  if (kind == "table") {
    const std::string& file = c.get(base + "file");
    if (file.empty()) throw ConfigError(fmt::format("config: {}kind = table needs {}file", base, base));
    return DistortionFunction::table(load_function_table(file));
  }
  throw ConfigError(fmt::format("config: unknown distortion kind '{}' for {}kind", kind, base));
}

CptPreferences build_preferences(const Config& c) {
  UtilityFunction u_plus = build_utility(c, "plus");
  UtilityFunction u_minus = build_utility(c, "minus");
  DistortionFunction w_plus = build_distortion(c, "plus", u_minus);
  DistortionFunction w_minus = build_distortion(c, "minus", u_minus);
  return {std::move(u_plus), std::move(u_minus), std::move(w_plus), std::move(w_minus)};
}

PricingKernel build_kernel(const Config& c) {
  const std::string& model = c.get("kernel.model");
  if (model == "lognormal") return PricingKernel::lognormal(c.number("kernel.sigma"));
  if (model == "table") {
    const std::string& file = c.get("kernel.file");
    if (file.empty()) throw ConfigError("config: kernel.model = table needs kernel.file");
    return load_kernel_table(std::filesystem::path(file));
  }
  if (model == "discrete") {
    return PricingKernel::discrete(parse_list("kernel.states", c.get("kernel.states")),
                                   parse_list("kernel.probs", c.get("kernel.probs")));
  }
  throw ConfigError(fmt::format("config: unknown kernel.model '{}'", model));
}

void validate(const Config& c) {
  (void)build_kernel(c);
  (void)build_preferences(c);
  for (const char* key : {"x0", "delta", "eta", "zeta", "check.ae_gamma", "check.ae_x_lower", "demo.gap_tol",
                          "optimize.lower_bound", "optimize.upper_bound"}) {
    (void)c.number(key);
  }
  if (!std::isfinite(c.number("x0"))) throw ConfigError("config: x0 must be finite");
  for (const char* key : {"demo.n_max", "optimize.n", "optimize.restarts", "optimize.max_iterations",
                          "optimize.dp_levels"}) {
    if (c.integer(key) < 0) throw ConfigError(fmt::format("config: {} must be non-negative", key));
  }
  (void)c.u64("seed");
  (void)c.flag("optimize.enforce_existence");
}

}  // namespace cptq
