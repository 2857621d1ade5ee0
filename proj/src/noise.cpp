// SPDX-License-Identifier: Apache-2.0
#include "usct/noise.hpp"

#include <cmath>

#include "usct/error.hpp"
#include "usct/rng.hpp"

namespace usct {

double rms(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s / static_cast<double>(values.size()));
}

double noise_sigma(double signal_rms, double snr_db) { return signal_rms / std::pow(10.0, snr_db / 20.0); }

MeasurementTensor add_noise(const MeasurementTensor& clean, double snr_db, std::uint64_t seed) {
  if (std::isnan(snr_db) || snr_db == -INFINITY) fail(ErrorCode::InvalidArgument, "SNR must be a number above -inf");
  clean.validate();
  const double signal = rms(clean.values());
  if (signal == 0.0) fail(ErrorCode::ZeroSignal, "cannot set an SNR for an all-zero signal");
  MeasurementTensor out = clean;
  if (std::isinf(snr_db)) return out;
  const double sigma = noise_sigma(signal, snr_db);
  Rng rng(seed);
  for (double& v : out.values()) v += sigma * rng.normal();
  return out;
}

double realized_snr_db(std::span<const double> clean, std::span<const double> noisy) {
  if (clean.size() != noisy.size() || clean.empty()) fail(ErrorCode::ShapeMismatch, "SNR operands differ in size");
  double mean = 0.0;
  for (std::size_t n = 0; n < clean.size(); ++n) mean += noisy[n] - clean[n];
  mean /= static_cast<double>(clean.size());
  double var = 0.0;
  for (std::size_t n = 0; n < clean.size(); ++n) {
    const double e = noisy[n] - clean[n] - mean;
    var += e * e;
  }
  var /= static_cast<double>(clean.size());
  return 20.0 * std::log10(rms(clean) / std::sqrt(var));
}

}  // namespace usct
