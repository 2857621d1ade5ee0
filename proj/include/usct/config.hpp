// SPDX-License-Identifier: Apache-2.0
//
// Plain-text run configuration: one `key = value` per line, `#` starts a
// comment, unknown keys are errors.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "usct/core.hpp"

namespace usct {

class Config {
 public:
  /// Throws ConfigError naming the origin and line.
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  static Config load(const std::filesystem::path& path);

  static std::span<const std::string_view> known_keys();
  static bool is_known(std::string_view key);

  /// Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Acquisition defaults overridden by any acquisition keys present.
AcquisitionConfig acquisition_from(const Config& cfg);

/// Every acquisition parameter as sorted `key = value` lines, doubles in
/// round-trip precision; feeds the manifest's config hash.
std::string canonical_text(const AcquisitionConfig& acq);
std::string config_hash(const AcquisitionConfig& acq);

}  // namespace usct
