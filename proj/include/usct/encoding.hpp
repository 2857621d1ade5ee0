// SPDX-License-Identifier: Apache-2.0
//
// Source encoding: W (L x I) superimposes I physical shots into L channels,
// applied to measurement tensors, noise and the excitation sources alike.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "usct/core.hpp"
#include "usct/rng.hpp"
#include "usct/wave.hpp"

namespace usct {

enum class EncoderKind { Identity, Subsample, Rademacher, Gaussian, Custom };

std::string_view to_string(EncoderKind kind);
std::optional<EncoderKind> parse_encoder_kind(std::string_view name);

class EncodingMatrix {
 public:
  /// Throws InvalidShape unless weights.size() == l_channels * i_sources.
  EncodingMatrix(int l_channels, int i_sources, std::vector<double> weights,
                 EncoderKind kind = EncoderKind::Custom, std::uint64_t seed = 0);

  int l_channels() const { return l_; }
  int i_sources() const { return i_; }
  EncoderKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  double at(int l, int i) const { return weights_[static_cast<std::size_t>(l) * i_ + i]; }
  std::span<const double> row(int l) const {
    return {weights_.data() + static_cast<std::size_t>(l) * i_, static_cast<std::size_t>(i_)};
  }
  std::span<const double> weights() const { return weights_; }

  bool operator==(const EncodingMatrix&) const = default;

 private:
  int l_;
  int i_;
  std::vector<double> weights_;
  EncoderKind kind_;
  std::uint64_t seed_;
};

/// Builds W by kind:
///  - identity: L == I;
///  - subsample: row l selects source l * (I / L), I divisible by L;
///  - rademacher: i.i.d. +-1;
///  - gaussian: i.i.d. N(0, 1), rounded to float so the matrix survives a
///    32-bit container unchanged.
/// Random kinds are a pure function of (kind, seed, L, I). Throws InvalidShape.
EncodingMatrix make_encoder(EncoderKind kind, int l_channels, int i_sources, std::uint64_t seed = 0);

/// One zero-mean, identity-covariance encoding vector of length I.
std::vector<double> draw_encoding_vector(EncoderKind kind, int i_sources, Rng& rng);

/// [D_W]_{lkj} = sum_i W_{li} D_{ikj}. Rejects already-encoded input unless
/// `allow_chained`. Throws ShapeMismatch / InvalidArgument.
MeasurementTensor encode_tensor(const EncodingMatrix& w, const MeasurementTensor& d, bool allow_chained = false);

/// Single encoded channel sum_i w_i d_i (K x J).
std::vector<double> encode_channel(std::span<const double> w, const MeasurementTensor& d);

/// s_w = sum_i w_i s_i: every emitter fires at once with its weight.
SourceTerm encode_source(const AcquisitionConfig& config, std::span<const double> w);

}  // namespace usct
