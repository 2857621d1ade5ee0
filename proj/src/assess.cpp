// SPDX-License-Identifier: Apache-2.0
#include "usct/assess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include "usct/error.hpp"

namespace usct {

double rmse(std::span<const double> estimate, std::span<const double> truth) {
  if (estimate.size() != truth.size()) fail(ErrorCode::ShapeMismatch, "rmse operands differ in size");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t q = 0; q < truth.size(); ++q) {
    const double d = estimate[q] - truth[q];
    num += d * d;
    den += truth[q] * truth[q];
  }
  if (den == 0.0) fail(ErrorCode::InvalidArgument, "rmse is undefined for an all-zero truth");
  return std::sqrt(num / den);
}

double rmse(const SoundSpeedMap& estimate, const SoundSpeedMap& truth) {
  if (estimate.grid().nx != truth.grid().nx) fail(ErrorCode::ShapeMismatch, "rmse maps have different grids");
  return rmse(estimate.values(), truth.values());
}

double ssim(std::span<const double> x, std::span<const double> y, int nx, const SsimOptions& o) {
  const auto n = static_cast<std::size_t>(nx) * nx;
  if (x.size() != n || y.size() != n) fail(ErrorCode::ShapeMismatch, "ssim operands must be nx by nx");
  if (o.window < 1 || o.window % 2 == 0 || o.window > nx) {
    fail(ErrorCode::InvalidArgument, "ssim window must be odd and no larger than the image");
  }
  if (!(o.sigma > 0.0)) fail(ErrorCode::InvalidArgument, "ssim sigma must be > 0");

  // Joint range keeps the index symmetric in its arguments. It is zero only
  // for two identical constant images.
  const auto [xlo, xhi] = std::minmax_element(x.begin(), x.end());
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const double lo = std::min(*xlo, *ylo);
  const double hi = std::max(*xhi, *yhi);
  double range = hi - lo;
  if (range == 0.0) range = std::abs(hi);
  if (range == 0.0) return 1.0;
  const double c1 = (o.k1 * range) * (o.k1 * range);
  const double c2 = (o.k2 * range) * (o.k2 * range);

  const int w = o.window;
  const int r = w / 2;
  std::vector<double> k(static_cast<std::size_t>(w) * w);
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      const double v = std::exp(-(i * i + j * j) / (2.0 * o.sigma * o.sigma));
      k[static_cast<std::size_t>(i + r) * w + (j + r)] = v;
      norm += v;
    }
  }
  for (double& v : k) v /= norm;

  double total = 0.0;
  int count = 0;
  for (int cy = r; cy < nx - r; ++cy) {
    for (int cx = r; cx < nx - r; ++cx) {
      double mx = 0.0, my = 0.0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const std::size_t q = static_cast<std::size_t>(cy - r + i) * nx + (cx - r + j);
          const double g = k[static_cast<std::size_t>(i) * w + j];
          mx += g * x[q];
          my += g * y[q];
        }
      }
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
          const std::size_t q = static_cast<std::size_t>(cy - r + i) * nx + (cx - r + j);
          const double g = k[static_cast<std::size_t>(i) * w + j];
          const double dx = x[q] - mx;
          const double dy = y[q] - my;
          vx += g * dx * dx;
          vy += g * dy * dy;
          cxy += g * dx * dy;
        }
      }
      total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / count;
}

double ssim(const SoundSpeedMap& estimate, const SoundSpeedMap& truth, const SsimOptions& opts) {
  if (estimate.grid().nx != truth.grid().nx) fail(ErrorCode::ShapeMismatch, "ssim maps have different grids");
  return ssim(estimate.values(), truth.values(), truth.grid().nx, opts);
}

Components connected_components(std::span<const std::uint8_t> binary, int nx) {
  const auto n = static_cast<std::size_t>(nx) * nx;
  if (binary.size() != n) fail(ErrorCode::ShapeMismatch, "raster must be nx by nx");
  Components c;
  c.labels.assign(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!binary[seed] || c.labels[seed]) continue;
    const int id = ++c.count;
    std::size_t size = 0;
    c.labels[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t q = stack.back();
      stack.pop_back();
      ++size;
      const int qx = static_cast<int>(q % nx);
      const int qy = static_cast<int>(q / nx);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = qx + dx;
          const int y = qy + dy;
          if (x < 0 || y < 0 || x >= nx || y >= nx) continue;
          const std::size_t p = static_cast<std::size_t>(y) * nx + x;
          if (binary[p] && !c.labels[p]) {
            c.labels[p] = id;
            stack.push_back(p);
          }
        }
      }
    }
    c.sizes.push_back(size);
  }
  return c;
}

namespace {

void check_probabilities(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx) {
  const auto n = static_cast<std::size_t>(nx) * nx;
  if (prob.size() != n || mask.size() != n) fail(ErrorCode::ShapeMismatch, "probability map and mask must be nx by nx");
  for (double p : prob) {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "probabilities must lie in [0, 1]");
  }
}

std::vector<std::uint8_t> threshold_map(std::span<const double> prob, double t) {
  std::vector<std::uint8_t> out(prob.size());
  for (std::size_t q = 0; q < prob.size(); ++q) out[q] = prob[q] >= t ? 1 : 0;
  return out;
}

// Kuhn's augmenting paths; edges[d] lists tumors detection d may claim.
int max_matching(const std::vector<std::vector<int>>& edges, int n_tumors) {
  std::vector<int> owner(static_cast<std::size_t>(n_tumors), -1);
  int matched = 0;
  for (std::size_t d = 0; d < edges.size(); ++d) {
    std::vector<char> seen(static_cast<std::size_t>(n_tumors), 0);
    std::function<bool(int)> augment = [&](int det) {
      for (int t : edges[static_cast<std::size_t>(det)]) {
        if (seen[t]) continue;
        seen[t] = 1;
        if (owner[t] < 0 || augment(owner[t])) {
          owner[t] = det;
          return true;
        }
      }
      return false;
    };
    if (augment(static_cast<int>(d))) ++matched;
  }
  return matched;
}

}  // namespace

double trapezoid_auc(std::span<const double> fpr, std::span<const double> tpr) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(fpr.size() + 2);
  pts.emplace_back(0.0, 0.0);
  for (std::size_t m = 0; m < fpr.size(); ++m) pts.emplace_back(fpr[m], tpr[m]);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t m = 1; m < pts.size(); ++m) {
    area += (pts[m].first - pts[m - 1].first) * (pts[m].second + pts[m - 1].second) * 0.5;
  }
  return area;
}

RocCurve roc(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx,
             std::vector<double> thresholds) {
  check_probabilities(prob, mask, nx);
  for (double t : thresholds) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
      fail(ErrorCode::InvalidArgument, "thresholds must be finite and non-negative");
    }
  }
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const Components tumors = connected_components(mask, nx);
  std::size_t negatives = 0;
  for (std::uint8_t m : mask) negatives += m ? 0 : 1;

  RocCurve curve;
  curve.thresholds = thresholds;
  curve.tumors_present = tumors.count > 0;
  for (double t : thresholds) {
    std::size_t false_pos = 0;
    std::vector<char> hit(static_cast<std::size_t>(tumors.count) + 1, 0);
    for (std::size_t q = 0; q < prob.size(); ++q) {
      if (prob[q] < t) continue;
      if (mask[q]) {
        hit[static_cast<std::size_t>(tumors.labels[q])] = 1;
      } else {
        ++false_pos;
      }
    }
    const auto found = std::count(hit.begin(), hit.end(), 1);
    curve.fpr.push_back(negatives ? static_cast<double>(false_pos) / static_cast<double>(negatives) : 0.0);
    curve.tpr.push_back(tumors.count ? static_cast<double>(found) / tumors.count : 0.0);
  }
  curve.auc = curve.tumors_present ? trapezoid_auc(curve.fpr, curve.tpr) : std::numeric_limits<double>::quiet_NaN();
  return curve;
}

RocCurve roc_sweep(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx) {
  check_probabilities(prob, mask, nx);
  std::vector<double> levels(prob.begin(), prob.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  levels.push_back(std::nextafter(levels.back(), std::numeric_limits<double>::infinity()));
  return roc(prob, mask, nx, std::move(levels));
}

double select_threshold(const RocCurve& curve) {
  if (curve.thresholds.empty()) fail(ErrorCode::InvalidArgument, "empty ROC curve");
  double best_t = curve.thresholds[0];
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < curve.thresholds.size(); ++m) {
    const double d = curve.fpr[m] * curve.fpr[m] + (1.0 - curve.tpr[m]) * (1.0 - curve.tpr[m]);
    if (d < best_d || (d == best_d && curve.thresholds[m] > best_t)) {
      best_d = d;
      best_t = curve.thresholds[m];
    }
  }
  return best_t;
}

DiceResult dice(std::span<const double> prob, std::span<const std::uint8_t> mask, int nx, double threshold,
                const DiceOptions& opts) {
  check_probabilities(prob, mask, nx);
  if (!std::isfinite(threshold)) fail(ErrorCode::InvalidArgument, "threshold must be finite");
  const Components det = connected_components(threshold_map(prob, threshold), nx);
  const Components tum = connected_components(mask, nx);

  // Overlap counts per (detection, tumor) pair.
  std::vector<std::vector<std::size_t>> overlap(static_cast<std::size_t>(det.count),
                                                std::vector<std::size_t>(static_cast<std::size_t>(tum.count), 0));
  for (std::size_t q = 0; q < mask.size(); ++q) {
    if (det.labels[q] && tum.labels[q]) ++overlap[det.labels[q] - 1][tum.labels[q] - 1];
  }
  std::vector<std::vector<int>> edges(static_cast<std::size_t>(det.count));
  for (int d = 0; d < det.count; ++d) {
    for (int t = 0; t < tum.count; ++t) {
      const std::size_t inter = overlap[d][t];
      if (inter == 0) continue;
      const double uni = static_cast<double>(det.sizes[d] + tum.sizes[t] - inter);
      if (opts.min_iou > 0.0 && static_cast<double>(inter) / uni < opts.min_iou) continue;
      edges[static_cast<std::size_t>(d)].push_back(t);
    }
  }

  DiceResult r;
  r.detections = det.count;
  r.tumors = tum.count;
  r.true_detections = max_matching(edges, tum.count);
  r.value = (r.detections + r.tumors) == 0
                ? 1.0
                : 2.0 * r.true_detections / static_cast<double>(r.detections + r.tumors);
  return r;
}

namespace {

std::string fmt(const std::optional<double>& v, const char* spec = "%.6g") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

}  // namespace

void write_report_table(std::ostream& out, std::span<const AssessmentReport> reports) {
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %12s %12s %12s %10s %10s %6s %6s %6s\n", "name", "rmse", "ssim", "auc",
                "tau", "dice", "det", "tum", "tp");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-24s %12s %12s %12s %10s %10s %6s %6s %6s\n", r.name.c_str(),
                  fmt(r.rmse).c_str(), fmt(r.ssim).c_str(), fmt(r.auc).c_str(), fmt(r.threshold).c_str(),
                  r.dice ? fmt(r.dice->value).c_str() : "-",
                  r.dice ? std::to_string(r.dice->detections).c_str() : "-",
                  r.dice ? std::to_string(r.dice->tumors).c_str() : "-",
                  r.dice ? std::to_string(r.dice->true_detections).c_str() : "-");
    out << line;
  }
}

void write_report_summary(std::ostream& out, const AssessmentReport& r) {
  out << "name=" << r.name << '\n';
  if (r.rmse) out << "rmse=" << fmt(r.rmse, "%.17g") << '\n';
  if (r.ssim) out << "ssim=" << fmt(r.ssim, "%.17g") << '\n';
  if (r.auc) out << "auc=" << fmt(r.auc, "%.17g") << '\n';
  if (r.corner_threshold) out << "corner_threshold=" << fmt(r.corner_threshold, "%.17g") << '\n';
  if (r.threshold) out << "threshold=" << fmt(r.threshold, "%.17g") << '\n';
  if (r.dice) {
    out << "dice=" << fmt(r.dice->value, "%.17g") << '\n';
    out << "detections=" << r.dice->detections << '\n';
    out << "tumors=" << r.dice->tumors << '\n';
    out << "true_detections=" << r.dice->true_detections << '\n';
  }
}

}  // namespace usct
