// SPDX-License-Identifier: Apache-2.0
//
// Binary containers for maps, masks, waveform tensors and encoders.
//
//   magic     8 bytes ASCII ("USCTSOSM", "USCTMASK", "USCTWAVE", "USCTENCW")
//   version   u32 LE (= 1)
//   ndims     u32 LE, then ndims x u32 LE, slowest axis first
//   payload   prod(dims) x f32 LE, or u8 for masks
//   checksum  u64 LE, FNV-1a of the payload bytes
#pragma once

#include <optional>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "usct/core.hpp"
#include "usct/encoding.hpp"

namespace usct::io {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class ContainerKind { SoundSpeed, Mask, Waveform, Encoder };

std::string_view magic(ContainerKind kind);
/// Element size in bytes (4 for float payloads, 1 for masks).
std::size_t element_size(ContainerKind kind);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

struct Container {
  ContainerKind kind = ContainerKind::SoundSpeed;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;  // raw little-endian elements

  std::size_t element_count() const;
};

std::vector<std::uint8_t> serialize(const Container& c);
/// Throws FormatError (with the byte offset), UnsupportedVersion or
/// ChecksumMismatch. The magic must match `expected`.
Container parse(std::span<const std::uint8_t> bytes, ContainerKind expected);

/// Kind named by the magic at the start of `bytes`, if any.
std::optional<ContainerKind> sniff(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::vector<float> to_floats(const Container& c);
Container from_floats(ContainerKind kind, std::vector<std::uint32_t> dims, std::span<const double> values);

// Typed helpers. In-memory values are double; files hold float32, so a value
// survives a round trip exactly when it is representable as float.

Container pack_map(const SoundSpeedMap& map);
/// `dx` and `pad` are not stored; the grid is rebuilt centered.
SoundSpeedMap unpack_map(const Container& c, double dx, int pad);

/// Arbitrary float image (probability maps use the speed-of-sound container).
Container pack_image(int nx, std::span<const double> values);
std::vector<double> unpack_image(const Container& c, int* nx = nullptr);

Container pack_mask(int nx, std::span<const std::uint8_t> values);
std::vector<std::uint8_t> unpack_mask(const Container& c, int* nx = nullptr);

Container pack_tensor(const MeasurementTensor& t);
MeasurementTensor unpack_tensor(const Container& c);

Container pack_encoder(const EncodingMatrix& w);
/// Kind and seed live in the dataset manifest, not the container.
EncodingMatrix unpack_encoder(const Container& c, EncoderKind kind = EncoderKind::Custom, std::uint64_t seed = 0);

void save(const std::filesystem::path& path, const Container& c);
Container load(const std::filesystem::path& path, ContainerKind expected);

}  // namespace usct::io
