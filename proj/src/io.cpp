// SPDX-License-Identifier: Apache-2.0
#include "usct/io.hpp"

#include <bit>
#include <iterator>
#include <cstring>
#include <fstream>
#include <string>
#include <system_error>

#include "usct/error.hpp"

namespace usct::io {

static_assert(std::endian::native == std::endian::little, "containers assume a little-endian host");

namespace {

constexpr std::size_t kMagicSize = 8;
constexpr std::uint32_t kMaxDims = 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw FormatError(ErrorCode::FormatError, std::string("truncated ") + what, bytes_.size());
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += 8;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view magic(ContainerKind kind) {
  switch (kind) {
    case ContainerKind::SoundSpeed: return "USCTSOSM";
    case ContainerKind::Mask: return "USCTMASK";
    case ContainerKind::Waveform: return "USCTWAVE";
    case ContainerKind::Encoder: return "USCTENCW";
  }
  return "????????";
}

std::size_t element_size(ContainerKind kind) { return kind == ContainerKind::Mask ? 1 : 4; }

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t Container::element_count() const {
  std::size_t n = 1;
  for (std::uint32_t d : dims) n *= d;
  return n;
}

std::vector<std::uint8_t> serialize(const Container& c) {
  if (c.dims.empty() || c.dims.size() > kMaxDims) fail(ErrorCode::InvalidShape, "container needs 1 to 8 dimensions");
  if (c.payload.size() != c.element_count() * element_size(c.kind)) {
    fail(ErrorCode::InvalidShape, "container payload size does not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kMagicSize + 8 + 4 * c.dims.size() + c.payload.size() + 8);
  const auto m = magic(c.kind);
  out.insert(out.end(), m.begin(), m.end());
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(c.dims.size()));
  for (std::uint32_t d : c.dims) put_u32(out, d);
  out.insert(out.end(), c.payload.begin(), c.payload.end());
  put_u64(out, fnv1a64(c.payload));
  return out;
}

std::optional<ContainerKind> sniff(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagicSize) return std::nullopt;
  const std::string_view head(reinterpret_cast<const char*>(bytes.data()), kMagicSize);
  for (ContainerKind k :
       {ContainerKind::SoundSpeed, ContainerKind::Mask, ContainerKind::Waveform, ContainerKind::Encoder}) {
    if (head == magic(k)) return k;
  }
  return std::nullopt;
}

Container parse(std::span<const std::uint8_t> bytes, ContainerKind expected) {
  Reader r(bytes);
  const auto head = r.take(kMagicSize, "magic");
  const auto want = magic(expected);
  if (std::memcmp(head.data(), want.data(), kMagicSize) != 0) {
    throw FormatError(ErrorCode::FormatError, "bad magic, expected " + std::string(want), 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion) {
    throw FormatError(ErrorCode::UnsupportedVersion, "unsupported container version " + std::to_string(version),
                      version_at);
  }
  const std::size_t ndims_at = r.offset();
  const std::uint32_t ndims = r.u32("dimension count");
  if (ndims == 0 || ndims > kMaxDims) {
    throw FormatError(ErrorCode::FormatError, "dimension count " + std::to_string(ndims) + " out of range",
                      ndims_at);
  }
  Container c;
  c.kind = expected;
  std::size_t count = 1;
  for (std::uint32_t a = 0; a < ndims; ++a) {
    const std::size_t at = r.offset();
    const std::uint32_t d = r.u32("dimensions");
    if (d == 0) throw FormatError(ErrorCode::FormatError, "zero-length dimension", at);
    if (count > (std::size_t{1} << 40) / d) throw FormatError(ErrorCode::FormatError, "dimensions too large", at);
    count *= d;
    c.dims.push_back(d);
  }
  const auto payload = r.take(count * element_size(expected), "payload");
  c.payload.assign(payload.begin(), payload.end());
  const std::size_t sum_at = r.offset();
  const std::uint64_t stored = r.u64("checksum");
  if (r.remaining() != 0) {
    throw FormatError(ErrorCode::FormatError, "trailing bytes after checksum", r.offset());
  }
  if (stored != fnv1a64(c.payload)) {
    throw FormatError(ErrorCode::ChecksumMismatch, "payload checksum mismatch", sum_at);
  }
  return c;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoError, "read failed for " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot create " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::IoError, "cannot move " + tmp.string() + " into place");
  }
}

std::vector<float> to_floats(const Container& c) {
  if (element_size(c.kind) != 4) fail(ErrorCode::InvalidArgument, "mask containers hold bytes, not floats");
  std::vector<float> out(c.element_count());
  std::memcpy(out.data(), c.payload.data(), c.payload.size());
  return out;
}

Container from_floats(ContainerKind kind, std::vector<std::uint32_t> dims, std::span<const double> values) {
  Container c{kind, std::move(dims), {}};
  if (values.size() != c.element_count()) fail(ErrorCode::InvalidShape, "value count does not match dimensions");
  c.payload.resize(values.size() * 4);
  for (std::size_t n = 0; n < values.size(); ++n) {
    const float f = static_cast<float>(values[n]);
    std::memcpy(c.payload.data() + 4 * n, &f, 4);
  }
  return c;
}

namespace {

int square_side(const Container& c) {
  if (c.dims.size() != 2 || c.dims[0] != c.dims[1]) {
    throw FormatError(ErrorCode::FormatError, "expected a square 2D image", 12);
  }
  return static_cast<int>(c.dims[0]);
}

std::vector<double> widen(const std::vector<float>& f) { return {f.begin(), f.end()}; }

}  // namespace

Container pack_map(const SoundSpeedMap& map) {
  const auto n = static_cast<std::uint32_t>(map.grid().nx);
  return from_floats(ContainerKind::SoundSpeed, {n, n}, map.values());
}

SoundSpeedMap unpack_map(const Container& c, double dx, int pad) {
  const int nx = square_side(c);
  return SoundSpeedMap(Grid2D::centered(nx, dx, pad), widen(to_floats(c)));
}

Container pack_image(int nx, std::span<const double> values) {
  const auto n = static_cast<std::uint32_t>(nx);
  return from_floats(ContainerKind::SoundSpeed, {n, n}, values);
}

std::vector<double> unpack_image(const Container& c, int* nx) {
  const int n = square_side(c);
  if (nx) *nx = n;
  return widen(to_floats(c));
}

Container pack_mask(int nx, std::span<const std::uint8_t> values) {
  const auto n = static_cast<std::uint32_t>(nx);
  Container c{ContainerKind::Mask, {n, n}, {values.begin(), values.end()}};
  if (c.payload.size() != c.element_count()) fail(ErrorCode::InvalidShape, "mask size does not match nx");
  return c;
}

std::vector<std::uint8_t> unpack_mask(const Container& c, int* nx) {
  const int n = square_side(c);
  if (nx) *nx = n;
  return c.payload;
}

Container pack_tensor(const MeasurementTensor& t) {
  return from_floats(ContainerKind::Waveform,
                     {static_cast<std::uint32_t>(t.n_sources()), static_cast<std::uint32_t>(t.n_steps()),
                      static_cast<std::uint32_t>(t.n_receivers())},
                     t.values());
}

MeasurementTensor unpack_tensor(const Container& c) {
  if (c.dims.size() != 3) throw FormatError(ErrorCode::FormatError, "waveform tensor must have 3 dimensions", 12);
  MeasurementTensor t(static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]), static_cast<int>(c.dims[2]),
                      widen(to_floats(c)));
  t.validate();
  return t;
}

Container pack_encoder(const EncodingMatrix& w) {
  return from_floats(ContainerKind::Encoder,
                     {static_cast<std::uint32_t>(w.l_channels()), static_cast<std::uint32_t>(w.i_sources())},
                     w.weights());
}

EncodingMatrix unpack_encoder(const Container& c, EncoderKind kind, std::uint64_t seed) {
  if (c.dims.size() != 2) throw FormatError(ErrorCode::FormatError, "encoder must have 2 dimensions", 12);
  return EncodingMatrix(static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]), widen(to_floats(c)), kind, seed);
}

void save(const std::filesystem::path& path, const Container& c) { write_file_atomic(path, serialize(c)); }

Container load(const std::filesystem::path& path, ContainerKind expected) {
  return parse(read_file(path), expected);
}

}  // namespace usct::io
