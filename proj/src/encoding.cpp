// SPDX-License-Identifier: Apache-2.0
#include "usct/encoding.hpp"

#include <string>

#include "usct/error.hpp"
#include "usct/simd.hpp"

namespace usct {

std::string_view to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::Identity: return "identity";
    case EncoderKind::Subsample: return "subsample";
    case EncoderKind::Rademacher: return "rademacher";
    case EncoderKind::Gaussian: return "gaussian";
    case EncoderKind::Custom: return "custom";
  }
  return "unknown";
}

std::optional<EncoderKind> parse_encoder_kind(std::string_view name) {
  if (name == "identity") return EncoderKind::Identity;
  if (name == "subsample") return EncoderKind::Subsample;
  if (name == "rademacher") return EncoderKind::Rademacher;
  if (name == "gaussian") return EncoderKind::Gaussian;
  if (name == "custom") return EncoderKind::Custom;
  return std::nullopt;
}

EncodingMatrix::EncodingMatrix(int l_channels, int i_sources, std::vector<double> weights, EncoderKind kind,
                               std::uint64_t seed)
    : l_(l_channels), i_(i_sources), weights_(std::move(weights)), kind_(kind), seed_(seed) {
  if (l_ < 1 || i_ < 1) fail(ErrorCode::InvalidShape, "encoding matrix dimensions must be positive");
  if (weights_.size() != static_cast<std::size_t>(l_) * i_) {
    fail(ErrorCode::InvalidShape, "encoding matrix weight count does not match L x I");
  }
}

std::vector<double> draw_encoding_vector(EncoderKind kind, int i_sources, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(i_sources));
  switch (kind) {
    case EncoderKind::Rademacher:
      for (double& v : w) v = rng.rademacher();
      break;
    case EncoderKind::Gaussian:
      for (double& v : w) v = static_cast<double>(static_cast<float>(rng.normal()));
      break;
    default:
      fail(ErrorCode::InvalidArgument, "only random encoder kinds can be drawn");
  }
  return w;
}

EncodingMatrix make_encoder(EncoderKind kind, int l_channels, int i_sources, std::uint64_t seed) {
  if (l_channels < 1 || i_sources < 1 || l_channels > i_sources) {
    fail(ErrorCode::InvalidShape, "encoder needs 1 <= L <= I, got L=" + std::to_string(l_channels) +
                                      " I=" + std::to_string(i_sources));
  }
  const auto l = static_cast<std::size_t>(l_channels);
  const auto n = static_cast<std::size_t>(i_sources);
  std::vector<double> w(l * n, 0.0);
  switch (kind) {
    case EncoderKind::Identity:
      if (l_channels != i_sources) fail(ErrorCode::InvalidShape, "identity encoder needs L == I");
      for (std::size_t r = 0; r < l; ++r) w[r * n + r] = 1.0;
      break;
    case EncoderKind::Subsample: {
      if (i_sources % l_channels != 0) {
        fail(ErrorCode::InvalidShape, "subsample encoder needs I divisible by L");
      }
      const std::size_t step = n / l;
      for (std::size_t r = 0; r < l; ++r) w[r * n + r * step] = 1.0;
      break;
    }
    case EncoderKind::Rademacher:
    case EncoderKind::Gaussian: {
      Rng rng(seed);
      for (std::size_t r = 0; r < l; ++r) {
        const auto row = draw_encoding_vector(kind, i_sources, rng);
        std::copy(row.begin(), row.end(), w.begin() + static_cast<std::ptrdiff_t>(r * n));
      }
      break;
    }
    case EncoderKind::Custom:
      fail(ErrorCode::InvalidArgument, "custom encoders are built from explicit weights");
  }
  return EncodingMatrix(l_channels, i_sources, std::move(w), kind, seed);
}

std::vector<double> encode_channel(std::span<const double> w, const MeasurementTensor& d) {
  if (static_cast<int>(w.size()) != d.n_sources()) {
    fail(ErrorCode::ShapeMismatch, "encoding vector length " + std::to_string(w.size()) +
                                       " does not match " + std::to_string(d.n_sources()) + " sources");
  }
  const simd::KernelTable& kern = simd::active_kernels();
  std::vector<double> out(d.channel_size(), 0.0);
  for (int i = 0; i < d.n_sources(); ++i) {
    if (w[static_cast<std::size_t>(i)] == 0.0) continue;
    kern.axpy(w[static_cast<std::size_t>(i)], d.channel(i).data(), out.data(), out.size());
  }
  return out;
}

MeasurementTensor encode_tensor(const EncodingMatrix& w, const MeasurementTensor& d, bool allow_chained) {
  if (d.encoded() && !allow_chained) {
    fail(ErrorCode::InvalidArgument, "tensor is already encoded; chained encoding must be explicit");
  }
  if (w.i_sources() != d.n_sources()) {
    fail(ErrorCode::ShapeMismatch, "encoder expects " + std::to_string(w.i_sources()) + " sources, tensor has " +
                                       std::to_string(d.n_sources()));
  }
  MeasurementTensor out(w.l_channels(), d.n_steps(), d.n_receivers(), true);
  for (int l = 0; l < w.l_channels(); ++l) {
    const auto ch = encode_channel(w.row(l), d);
    std::copy(ch.begin(), ch.end(), out.channel(l).begin());
  }
  return out;
}

SourceTerm encode_source(const AcquisitionConfig& config, std::span<const double> w) {
  return weighted_transmitter_source(config, w);
}

}  // namespace usct
