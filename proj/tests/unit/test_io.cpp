// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <vector>

#include "desk.hpp"
#include "doctest.h"
#include "tempdir.hpp"
#include "usct/encoding.hpp"
#include "usct/error.hpp"
#include "usct/io.hpp"
#include "usct/rng.hpp"

using namespace usct;

namespace {

MeasurementTensor random_tensor(int i, int k, int j, std::uint64_t seed) {
  MeasurementTensor t(i, k, j);
  Rng rng(seed);
  for (double& v : t.values()) v = static_cast<float>(rng.normal());
  return t;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int s = 0; s < 4; ++s) b[at + s] = static_cast<std::uint8_t>(v >> (8 * s));
}

}  // namespace

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(io::fnv1a64({}) == 0xcbf29ce484222325ULL);
  const std::uint8_t a[] = {'a'};
  CHECK(io::fnv1a64(a) == 0xaf63dc4c8601ec8cULL);
  const char* foobar = "foobar";
  CHECK(io::fnv1a64({reinterpret_cast<const std::uint8_t*>(foobar), 6}) == 0x85944171f73967e8ULL);
}

TEST_CASE("container layout is byte-exact for a hand-built mask") {
  const std::vector<std::uint8_t> m = {0, 1, 1, 0};
  const auto bytes = io::serialize(io::pack_mask(2, m));
  std::vector<std::uint8_t> expect = {'U', 'S', 'C', 'T', 'M', 'A', 'S', 'K', 1, 0, 0, 0, 2, 0, 0, 0,
                                      2,   0,   0,   0,   2,   0,   0,   0,   0, 1, 1, 0};
  const std::uint64_t sum = io::fnv1a64(m);
  for (int s = 0; s < 8; ++s) expect.push_back(static_cast<std::uint8_t>(sum >> (8 * s)));
  CHECK(bytes == expect);
}

TEST_CASE("waveform round trip on a random 2x3x4 tensor is byte-identical") {
  const auto t = random_tensor(2, 3, 4, 11);
  const auto bytes = io::serialize(io::pack_tensor(t));
  const auto back = io::unpack_tensor(io::parse(bytes, io::ContainerKind::Waveform));
  CHECK(back.n_sources() == 2);
  CHECK(back.n_steps() == 3);
  CHECK(back.n_receivers() == 4);
  for (std::size_t n = 0; n < t.values().size(); ++n) CHECK(back.values()[n] == t.values()[n]);
  CHECK(io::serialize(io::pack_tensor(back)) == bytes);
  // Source axis slowest: element (1, 0, 0) sits after one full channel.
  const auto c = io::parse(bytes, io::ContainerKind::Waveform);
  float f = 0;
  std::memcpy(&f, c.payload.data() + 12 * 4, 4);
  CHECK(double(f) == t.at(1, 0, 0));
}

TEST_CASE("map, image, mask and encoder containers round trip through files") {
  testing::TempDir dir("io");
  const Grid2D g = Grid2D::centered(20, 0.6e-3, 4);
  const auto map = testing::blob_phantom(g, 0.0, 0.0, 2e-3, 40.0);
  std::vector<double> rounded(map.values().begin(), map.values().end());
  for (double& v : rounded) v = static_cast<float>(v);
  const SoundSpeedMap mf(g, rounded);
  io::save(dir / "m.sos", io::pack_map(mf));
  const auto back = io::unpack_map(io::load(dir / "m.sos", io::ContainerKind::SoundSpeed), g.dx, g.pad);
  CHECK(back.grid().nx == 20);
  for (std::size_t n = 0; n < rounded.size(); ++n) CHECK(back.values()[n] == rounded[n]);

  std::vector<std::uint8_t> mask(400, 0);
  mask[5] = mask[77] = 1;
  io::save(dir / "m.msk", io::pack_mask(20, mask));
  int nx = 0;
  CHECK(io::unpack_mask(io::load(dir / "m.msk", io::ContainerKind::Mask), &nx) == mask);
  CHECK(nx == 20);

  const auto w = make_encoder(EncoderKind::Rademacher, 3, 8, 5);
  io::save(dir / "w.usenc", io::pack_encoder(w));
  const auto wb = io::unpack_encoder(io::load(dir / "w.usenc", io::ContainerKind::Encoder));
  CHECK(wb.l_channels() == 3);
  CHECK(wb.i_sources() == 8);
  CHECK(std::equal(wb.weights().begin(), wb.weights().end(), w.weights().begin()));
}

TEST_CASE("truncated containers raise FormatError at every cut point") {
  const auto bytes = io::serialize(io::pack_tensor(random_tensor(2, 3, 4, 3)));
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    const std::span<const std::uint8_t> part(bytes.data(), cut);
    CHECK(code_of([&] { io::parse(part, io::ContainerKind::Waveform); }) == ErrorCode::FormatError);
  }
}

TEST_CASE("container header and checksum errors are classified") {
  auto bytes = io::serialize(io::pack_tensor(random_tensor(1, 2, 2, 4)));

  SUBCASE("version 99") {
    put_u32(bytes, 8, 99);
    CHECK(code_of([&] { io::parse(bytes, io::ContainerKind::Waveform); }) == ErrorCode::UnsupportedVersion);
  }
  SUBCASE("wrong magic") {
    CHECK(code_of([&] { io::parse(bytes, io::ContainerKind::SoundSpeed); }) == ErrorCode::FormatError);
    try {
      io::parse(bytes, io::ContainerKind::SoundSpeed);
    } catch (const FormatError& e) {
      CHECK(e.offset() == 0);
    }
  }
  SUBCASE("flipped payload bit") {
    bytes[28 + 5] ^= 0x10;  // header is 8 + 4 + 4 + 3 x 4 bytes
    CHECK(code_of([&] { io::parse(bytes, io::ContainerKind::Waveform); }) == ErrorCode::ChecksumMismatch);
  }
  SUBCASE("trailing garbage") {
    bytes.push_back(0);
    CHECK(code_of([&] { io::parse(bytes, io::ContainerKind::Waveform); }) == ErrorCode::FormatError);
  }
  SUBCASE("zero dimension") {
    put_u32(bytes, 16, 0);
    CHECK(code_of([&] { io::parse(bytes, io::ContainerKind::Waveform); }) == ErrorCode::FormatError);
  }
  SUBCASE("missing file") {
    CHECK(code_of([] { io::load("/nonexistent/x.sos", io::ContainerKind::SoundSpeed); }) == ErrorCode::IoError);
  }
}

TEST_CASE("sniff recognises every magic") {
  for (auto k : {io::ContainerKind::SoundSpeed, io::ContainerKind::Mask, io::ContainerKind::Waveform,
                 io::ContainerKind::Encoder}) {
    const auto m = io::magic(k);
    const std::vector<std::uint8_t> b(m.begin(), m.end());
    CHECK(io::sniff(b) == k);
  }
  const std::vector<std::uint8_t> junk = {'n', 'o', 'p', 'e'};
  CHECK_FALSE(io::sniff(junk).has_value());
}
