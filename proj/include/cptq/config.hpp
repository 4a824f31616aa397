#pragma once

// Flat `key = value` experiment configuration with dotted keys, e.g.
//
//   kernel.model = lognormal
//   utility.minus.kind = power
//   utility.minus.alpha = 2.0
//
// Only known keys are accepted. Environment variables CPTQ_<KEY> override file
// values, with the key upper-cased and dots turned into underscores
// (CPTQ_UTILITY_MINUS_ALPHA).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>

#include "cptq/choquet.hpp"
#include "cptq/errors.hpp"
#include "cptq/functions.hpp"
#include "cptq/market.hpp"

namespace cptq {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

class Config {
 public:
  /// Every known key with its default value.
  static Config defaults();

  /// Relative paths in file-valued keys are resolved against `base_dir`.
  void merge(std::istream& in, const std::string& origin, const std::filesystem::path& base_dir = {});
  void merge_file(const std::filesystem::path& path);
  void apply_env(const std::function<const char*(const char*)>& lookup);
  void set(const std::string& key, const std::string& value);

  [[nodiscard]] const std::string& get(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] int integer(const std::string& key) const;
  [[nodiscard]] std::uint64_t u64(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;

  [[nodiscard]] const std::map<std::string, std::string>& entries() const { return entries_; }
  /// `key = value` lines in key order, each prefixed with `prefix`.
  [[nodiscard]] std::string resolved(const std::string& prefix = "") const;

  static std::string env_name(const std::string& key);

 private:
  std::map<std::string, std::string> entries_;
};

/// side is "plus" or "minus".
UtilityFunction build_utility(const Config& c, const std::string& side);
DistortionFunction build_distortion(const Config& c, const std::string& side, const UtilityFunction& u_minus);
CptPreferences build_preferences(const Config& c);
PricingKernel build_kernel(const Config& c);

/// Builds every configured object once so that bad values fail before any computation.
void validate(const Config& c);

}  // namespace cptq
