// SPDX-License-Identifier: Apache-2.0
#include "usct/config.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "usct/error.hpp"
#include "usct/io.hpp"

namespace usct {

namespace {

constexpr std::array<std::string_view, 32> kKeys = {
    // acquisition
    "nx", "dx", "pad", "ring_radius", "n_receivers", "tx_stride", "f0", "t0", "pulse_sigma", "amplitude", "dt",
    "n_steps", "c_ref", "sponge", "sponge_strength", "sponge_width",
    // run
    "seed", "threads", "snr_db", "optimizer", "step_size", "iters", "encoder", "channels", "bounds_lo",
    "bounds_hi", "threshold", "density_class", "n_tumors_min", "n_tumors_max", "breast_radius_min",
    "breast_radius_max"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  fail(ErrorCode::ConfigError, "config key '" + key + "' = '" + value + "' is not " + what);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::span<const std::string_view> Config::known_keys() { return kKeys; }

bool Config::is_known(std::string_view key) {
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (eq == std::string::npos) fail(ErrorCode::ConfigError, where + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) fail(ErrorCode::ConfigError, where + ": empty key or value");
    if (!is_known(key)) fail(ErrorCode::ConfigError, where + ": unknown key '" + key + "'");
    if (cfg.values_.count(key)) fail(ErrorCode::ConfigError, where + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  if (!is_known(key)) fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0' || errno == ERANGE) bad_value(key, *v, "a number");
  return d;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  errno = 0;
  char* end = nullptr;
  const long long i = std::strtoll(v->c_str(), &end, 10);
  if (end == v->c_str() || *end != '\0' || errno == ERANGE) bad_value(key, *v, "an integer");
  return i;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "on" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "off" || *v == "0" || *v == "no") return false;
  bad_value(key, *v, "a boolean");
}

AcquisitionConfig acquisition_from(const Config& cfg) {
  AcquisitionConfig a = default_config();
  const int nx = static_cast<int>(cfg.get_int("nx", a.grid.nx));
  const double dx = cfg.get_double("dx", a.grid.dx);
  const int pad = static_cast<int>(cfg.get_int("pad", a.grid.pad));
  a.grid = Grid2D::centered(nx, dx, pad);
  const double radius = cfg.get_double("ring_radius", a.array.radius());
  const int n_rx = static_cast<int>(cfg.get_int("n_receivers", a.array.n_receivers()));
  const int stride = static_cast<int>(cfg.get_int("tx_stride", 4));
  a.array = TransducerArray::ring(radius, n_rx, stride);
  a.pulse.f0 = cfg.get_double("f0", a.pulse.f0);
  a.pulse.t0 = cfg.get_double("t0", a.pulse.t0);
  a.pulse.sigma = cfg.get_double("pulse_sigma", a.pulse.sigma);
  a.pulse.amplitude = cfg.get_double("amplitude", a.pulse.amplitude);
  a.dt = cfg.get_double("dt", a.dt);
  a.n_steps = static_cast<int>(cfg.get_int("n_steps", a.n_steps));
  a.c_ref = cfg.get_double("c_ref", a.c_ref);
  a.sponge.enabled = cfg.get_bool("sponge", a.sponge.enabled);
  a.sponge.strength = cfg.get_double("sponge_strength", a.sponge.strength);
  a.sponge.width = static_cast<int>(cfg.get_int("sponge_width", a.sponge.width));
  try {
    a.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigError, std::string("invalid acquisition settings: ") + e.what());
  }
  return a;
}

std::string canonical_text(const AcquisitionConfig& a) {
  std::map<std::string, std::string> kv;
  kv["nx"] = std::to_string(a.grid.nx);
  kv["dx"] = g17(a.grid.dx);
  kv["pad"] = std::to_string(a.grid.pad);
  kv["ring_radius"] = g17(a.array.radius());
  kv["n_receivers"] = std::to_string(a.array.n_receivers());
  std::string tx;
  for (int i : a.array.transmitter_indices()) tx += (tx.empty() ? "" : ",") + std::to_string(i);
  kv["transmitters"] = tx;
  kv["f0"] = g17(a.pulse.f0);
  kv["t0"] = g17(a.pulse.t0);
  kv["pulse_sigma"] = g17(a.pulse.sigma);
  kv["amplitude"] = g17(a.pulse.amplitude);
  kv["dt"] = g17(a.dt);
  kv["n_steps"] = std::to_string(a.n_steps);
  kv["c_ref"] = g17(a.c_ref);
  kv["sponge"] = a.sponge.enabled ? "on" : "off";
  kv["sponge_strength"] = g17(a.sponge.strength);
  kv["sponge_width"] = std::to_string(resolved_sponge_width(a));
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const AcquisitionConfig& a) {
  const std::string text = canonical_text(a);
  const auto h = io::fnv1a64({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace usct
