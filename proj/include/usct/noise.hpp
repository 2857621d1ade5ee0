// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

#include "usct/core.hpp"

namespace usct {

double rms(std::span<const double> values);

/// Noise standard deviation for a requested SNR: rms / 10^(snr_db / 20).
double noise_sigma(double signal_rms, double snr_db);

/// Adds i.i.d. zero-mean Gaussian noise at the requested SNR. Deterministic
/// per seed; snr_db = +inf returns the input unchanged. Throws ZeroSignal.
MeasurementTensor add_noise(const MeasurementTensor& clean, double snr_db, std::uint64_t seed);

/// 20 log10(rms(clean) / std(noisy - clean)).
double realized_snr_db(std::span<const double> clean, std::span<const double> noisy);

}  // namespace usct
