// SPDX-License-Identifier: Apache-2.0
#include "usct/manifest.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "usct/config.hpp"
#include "usct/error.hpp"
#include "usct/io.hpp"

namespace usct {

using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw FormatError(ErrorCode::FormatError, "manifest checksum '" + s + "' is not 16 hex digits", 0);
  }
  return std::stoull(s, nullptr, 16);
}

}  // namespace

void DatasetManifest::set_config(const AcquisitionConfig& acq) {
  config_hash = usct::config_hash(acq);
  config.clear();
  std::istringstream in(canonical_text(acq));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) config[line.substr(0, eq)] = line.substr(eq + 3);
  }
}

void DatasetManifest::add_file(const std::filesystem::path& base, const std::filesystem::path& file,
                               const std::string& role) {
  const auto bytes = io::read_file(file);
  FileEntry e;
  e.path = std::filesystem::relative(std::filesystem::absolute(file), std::filesystem::absolute(base)).generic_string();
  e.role = role;
  e.checksum = io::fnv1a64(bytes);
  e.bytes = bytes.size();
  for (auto& f : files) {
    if (f.path == e.path) {
      f = e;
      return;
    }
  }
  files.push_back(e);
}

std::string DatasetManifest::to_json() const {
  json j;
  j["format"] = "usct-dataset";
  j["version"] = kManifestVersion;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["phantoms"] = json::array();
  for (const auto& p : phantoms) {
    json e{{"stem", p.stem}, {"density_class", p.density_class}};
    e["seed"] = p.seed ? json(*p.seed) : json(nullptr);
    j["phantoms"].push_back(e);
  }
  if (encoder) {
    j["encoder"] = {{"kind", encoder->kind},       {"l_channels", encoder->l_channels},
                    {"i_sources", encoder->i_sources}, {"seed", encoder->seed},
                    {"path", encoder->path}};
  } else {
    j["encoder"] = nullptr;
  }
  j["noise"] = noise ? json{{"snr_db", noise->snr_db}, {"seed", noise->seed}} : json(nullptr);
  j["files"] = json::array();
  for (const auto& f : files) {
    j["files"].push_back({{"path", f.path}, {"role", f.role}, {"fnv1a64", hex64(f.checksum)}, {"bytes", f.bytes}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "usct-dataset") {
      throw FormatError(ErrorCode::FormatError, "not a dataset manifest", 0);
    }
    const int version = j.at("version").get<int>();
    if (version != kManifestVersion) {
      throw FormatError(ErrorCode::UnsupportedVersion, "manifest version " + std::to_string(version), 0);
    }
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& p : j.at("phantoms")) {
      PhantomEntry e;
      e.stem = p.at("stem").get<std::string>();
      e.density_class = p.at("density_class").get<std::string>();
      if (!p.at("seed").is_null()) e.seed = p.at("seed").get<std::uint64_t>();
      m.phantoms.push_back(e);
    }
    if (!j.at("encoder").is_null()) {
      const auto& e = j.at("encoder");
      m.encoder = EncoderDescriptor{e.at("kind").get<std::string>(), e.at("l_channels").get<int>(),
                                    e.at("i_sources").get<int>(), e.at("seed").get<std::uint64_t>(),
                                    e.at("path").get<std::string>()};
    }
    if (!j.at("noise").is_null()) {
      m.noise = NoiseDescriptor{j.at("noise").at("snr_db").get<double>(), j.at("noise").at("seed").get<std::uint64_t>()};
    }
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("path").get<std::string>(), f.at("role").get<std::string>(),
                         parse_hex64(f.at("fnv1a64").get<std::string>()), f.at("bytes").get<std::uint64_t>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(ErrorCode::FormatError, std::string("malformed manifest: ") + e.what(), 0);
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  const std::string text = m.to_json();
  io::write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return DatasetManifest::from_json(std::string(bytes.begin(), bytes.end()));
}

void verify_manifest(const DatasetManifest& m, const std::filesystem::path& base) {
  for (const auto& f : m.files) {
    const auto p = base / f.path;
    if (!std::filesystem::exists(p)) fail(ErrorCode::IoError, "manifest file missing: " + p.string());
    const auto bytes = io::read_file(p);
    if (bytes.size() != f.bytes || io::fnv1a64(bytes) != f.checksum) {
      fail(ErrorCode::ChecksumMismatch, "checksum mismatch for " + p.string());
    }
  }
}

}  // namespace usct
