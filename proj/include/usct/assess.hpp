// SPDX-License-Identifier: Apache-2.0
//
// Image-quality and detection-task metrics: relative l2 error, SSIM,
// connected components, the tumor-wise/pixel-wise ROC, corner threshold
// selection and tumor-wise Dice.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usct/core.hpp"

namespace usct {

/// ||estimate - truth||_2 / ||truth||_2. Throws ShapeMismatch, InvalidArgument
/// (all-zero truth).
double rmse(std::span<const double> estimate, std::span<const double> truth);
double rmse(const SoundSpeedMap& estimate, const SoundSpeedMap& truth);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean Gaussian-weighted SSIM over every position where the window fits.
/// Dynamic range L = max - min over both images together, or the common
/// value's magnitude when both are the same constant (all zero gives 1).
double ssim(std::span<const double> estimate, std::span<const double> truth, int nx, const SsimOptions& opts = {});
double ssim(const SoundSpeedMap& estimate, const SoundSpeedMap& truth, const SsimOptions& opts = {});

struct Components {
  int count = 0;
  std::vector<int> labels;  // 0 = background, 1..count in row-major discovery order
  std::vector<std::size_t> sizes;  // pixel count of component k at index k - 1
};

/// 8-connected labeling of a nonzero/zero raster.
Components connected_components(std::span<const std::uint8_t> binary, int nx);

struct RocCurve {
  std::vector<double> thresholds;  // descending
  std::vector<double> fpr;         // pixel-wise
  std::vector<double> tpr;         // tumor-wise (0 when no tumors)
  bool tumors_present = true;
  double auc = 0.0;  // NaN when no tumors are present
};

/// Detections at threshold t are components of prob >= t. Throws
/// InvalidArgument for probabilities outside [0, 1] or negative thresholds.
RocCurve roc(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx,
             std::vector<double> thresholds);
/// Every distinct probability value plus one level above the maximum.
RocCurve roc_sweep(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx);

/// Area under the (fpr, tpr) points with (0,0) and (1,1) anchors.
double trapezoid_auc(std::span<const double> fpr, std::span<const double> tpr);

/// Threshold closest to the (0, 1) corner; ties go to the larger threshold.
double select_threshold(const RocCurve& curve);

inline constexpr double kDefaultSegmentationThreshold = 0.02;

struct DiceOptions {
  /// A detection may claim a tumor when it overlaps it by at least one
  /// pixel and, if set above 0, reaches this intersection over union.
  double min_iou = 0.0;
};

struct DiceResult {
  int detections = 0;
  int tumors = 0;
  int true_detections = 0;
  double value = 1.0;
};

/// Tumor-wise Dice, 2 TD / (N_det + N_tumor). Each tumor is credited at most
/// once and each detection claims at most one tumor (maximum matching).
DiceResult dice(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx, double threshold,
                const DiceOptions& opts = {});

struct AssessmentReport {
  std::string name;
  std::optional<double> rmse;
  std::optional<double> ssim;
  std::optional<double> auc;
  std::optional<double> threshold;  // operating point used for Dice
  std::optional<double> corner_threshold;
  std::optional<DiceResult> dice;
};

/// Fixed-width table: one header line and one row per report.
void write_report_table(std::ostream& out, std::span<const AssessmentReport> reports);
/// key=value lines for one report.
void write_report_summary(std::ostream& out, const AssessmentReport& report);

}  // namespace usct
