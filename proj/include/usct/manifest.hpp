// SPDX-License-Identifier: Apache-2.0
//
// JSON dataset manifest: what was generated, from which settings and seeds,
// and a checksum for every file so a dataset can be verified or rebuilt.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "usct/core.hpp"

namespace usct {

struct FileEntry {
  std::string path;  // relative to the manifest directory
  std::string role;  // "phantom", "labels", "mask", "waveform", "encoder", "map", "log", ...
  std::uint64_t checksum = 0;  // FNV-1a 64 of the whole file
  std::uint64_t bytes = 0;
  bool operator==(const FileEntry&) const = default;
};

struct PhantomEntry {
  std::string stem;
  std::optional<std::uint64_t> seed;
  std::string density_class;
  bool operator==(const PhantomEntry&) const = default;
};

struct EncoderDescriptor {
  std::string kind;
  int l_channels = 0;
  int i_sources = 0;
  std::uint64_t seed = 0;
  std::string path;
  bool operator==(const EncoderDescriptor&) const = default;
};

struct NoiseDescriptor {
  double snr_db = 30.0;
  std::uint64_t seed = 0;
  bool operator==(const NoiseDescriptor&) const = default;
};

struct DatasetManifest {
  std::string config_hash;
  std::map<std::string, std::string> config;  // canonical acquisition settings
  std::vector<PhantomEntry> phantoms;
  std::optional<EncoderDescriptor> encoder;
  std::optional<NoiseDescriptor> noise;
  std::vector<FileEntry> files;

  void set_config(const AcquisitionConfig& acq);
  /// Hashes `file` (absolute or relative to the working directory) and
  /// records it relative to `base`. Replaces an existing entry for the path.
  void add_file(const std::filesystem::path& base, const std::filesystem::path& file, const std::string& role);

  std::string to_json() const;
  /// Throws FormatError on malformed JSON or missing fields.
  static DatasetManifest from_json(const std::string& text);

  bool operator==(const DatasetManifest&) const = default;
};

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Throws IoError for a missing file, ChecksumMismatch for a changed one.
void verify_manifest(const DatasetManifest& m, const std::filesystem::path& base);

}  // namespace usct
