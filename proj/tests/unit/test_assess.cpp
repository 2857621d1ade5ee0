// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "usct/assess.hpp"
#include "usct/error.hpp"
#include "usct/rng.hpp"

using namespace usct;

namespace {

std::vector<double> pattern16() {
  std::vector<double> v(256);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) v[y * 16 + x] = 1500.0 + 20.0 * std::sin(0.7 * x) * std::cos(0.45 * y);
  }
  return v;
}

// 8x8 mask with two tumors: a 2x2 block and an L-shaped triple.
std::vector<std::uint8_t> two_tumor_mask() {
  std::vector<std::uint8_t> m(64, 0);
  for (int i : {9, 10, 17, 18}) m[i] = 1;
  for (int i : {45, 53, 54}) m[i] = 1;
  return m;
}

}  // namespace

TEST_CASE("rmse examples and scale covariance") {
  const std::vector<double> t = {3.0, 4.0};
  CHECK(rmse(t, t) == 0.0);
  CHECK(rmse(std::vector<double>{6.0, 8.0}, t) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rmse(std::vector<double>{3.0, 0.0}, t) == doctest::Approx(0.8).epsilon(1e-15));
  const auto a = pattern16();
  auto b = a;
  for (double& v : b) v += 3.0;
  std::vector<double> a2(a), b2(b);
  for (double& v : a2) v *= 2.5;
  for (double& v : b2) v *= 2.5;
  CHECK(rmse(b2, a2) == doctest::Approx(rmse(b, a)).epsilon(1e-14));
  CHECK_THROWS_AS(rmse(t, std::vector<double>{0.0, 0.0}), Error);
  CHECK_THROWS_AS(rmse(t, std::vector<double>{1.0}), Error);
}

TEST_CASE("ssim identities") {
  const auto a = pattern16();
  CHECK(ssim(a, a, 16) == doctest::Approx(1.0).epsilon(1e-14));

  auto b = a;
  Rng rng(2);
  for (double& v : b) v += 4.0 * rng.normal();
  CHECK(ssim(a, b, 16) == ssim(b, a, 16));
  CHECK(ssim(a, b, 16) < 1.0);

  SUBCASE("constant images") {
    const double mu = 1500.0;
    const double delta = 30.0;
    const std::vector<double> t(256, mu);
    const std::vector<double> e(256, mu + delta);
    const double c1 = (0.01 * delta) * (0.01 * delta);  // L = joint range = delta
    const double expect = (2 * mu * (mu + delta) + c1) / (mu * mu + (mu + delta) * (mu + delta) + c1);
    CHECK(ssim(e, t, 16) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(ssim(t, t, 16) == 1.0);
    const std::vector<double> z(256, 0.0);
    CHECK(ssim(z, z, 16) == 1.0);
    const double m = mu + delta;
    const double cz = (0.01 * m) * (0.01 * m);
    CHECK(ssim(e, z, 16) == doctest::Approx(cz / (m * m + cz)).epsilon(1e-14));
  }

  SUBCASE("inverted structure is negative") {
    double mean = 0.0;
    for (double v : a) mean += v / 256.0;
    std::vector<double> inv(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) inv[i] = -(a[i] - mean) + mean;
    CHECK(ssim(inv, a, 16) < 0.0);
  }
}

TEST_CASE("8-connected components") {
  SUBCASE("diagonal neighbours join") {
    const std::vector<std::uint8_t> m = {1, 0, 0, 1};
    CHECK(connected_components(m, 2).count == 1);
  }
  SUBCASE("2x2 checkerboard is one component") {
    const std::vector<std::uint8_t> c = {1, 0, 0, 1};
    CHECK(connected_components(c, 2).sizes == std::vector<std::size_t>{2});
  }
  SUBCASE("blobs separated by a gutter") {
    const auto c = connected_components(two_tumor_mask(), 8);
    CHECK(c.count == 2);
    CHECK(c.sizes == std::vector<std::size_t>{4, 3});
    CHECK(c.labels[9] == 1);
    CHECK(c.labels[54] == 2);
  }
}

TEST_CASE("roc of a perfect probability map") {
  const auto m = two_tumor_mask();
  std::vector<double> p(m.begin(), m.end());
  const auto curve = roc_sweep(p, m, 8);
  bool corner = false;
  for (std::size_t i = 0; i < curve.fpr.size(); ++i) corner |= curve.fpr[i] == 0.0 && curve.tpr[i] == 1.0;
  CHECK(corner);
  CHECK(curve.auc == 1.0);
  CHECK(select_threshold(curve) == 1.0);
}

TEST_CASE("roc of a constant map") {
  const auto m = two_tumor_mask();
  const std::vector<double> p(64, 0.5);
  const auto curve = roc(p, m, 8, {0.25, 0.5, 0.75});
  REQUIRE(curve.thresholds == std::vector<double>{0.75, 0.5, 0.25});
  CHECK(curve.fpr == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(curve.tpr == std::vector<double>{0.0, 1.0, 1.0});
  CHECK(curve.auc == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("roc on a hand-built 6x6 map matches exhaustive enumeration") {
  // One tumor (pixels 14, 15, 20, 21) and three probability levels.
  std::vector<std::uint8_t> mask(36, 0);
  for (int i : {14, 15, 20, 21}) mask[i] = 1;
  std::vector<double> p(36, 0.1);
  for (int i : {14, 15, 20}) p[i] = 0.9;
  p[21] = 0.5;
  for (int i : {0, 1, 6, 35}) p[i] = 0.5;
  p[5] = 0.9;
  const auto curve = roc_sweep(p, mask, 6);
  for (std::size_t n = 0; n < curve.thresholds.size(); ++n) {
    const double t = curve.thresholds[n];
    int fp = 0;
    int neg = 0;
    bool hit = false;
    for (int i = 0; i < 36; ++i) {
      if (mask[i]) {
        hit |= p[i] >= t;
      } else {
        ++neg;
        fp += p[i] >= t ? 1 : 0;
      }
    }
    CHECK(curve.fpr[n] == doctest::Approx(double(fp) / neg).epsilon(1e-15));
    CHECK(curve.tpr[n] == (hit ? 1.0 : 0.0));
  }
  CHECK(curve.thresholds.size() == 4);  // 0.1, 0.5, 0.9 and one above
  // Points (0,0), (1/32,1), (5/32,1), (1,1): AUC = 1 - 1/32 / 2.
  CHECK(curve.auc == doctest::Approx(1.0 - 1.0 / 64.0).epsilon(1e-15));
}

TEST_CASE("AUC is invariant under monotone remapping") {
  Rng rng(8);
  const auto m = two_tumor_mask();
  std::vector<double> p(64);
  for (int i = 0; i < 64; ++i) p[i] = std::clamp(0.3 * rng.uniform() + (m[i] ? 0.45 : 0.0), 0.0, 1.0);
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = std::pow(p[i], 3.0);
  const double a = roc_sweep(p, m, 8).auc;
  CHECK(roc_sweep(q, m, 8).auc == a);
  CHECK(a > 0.0);
  CHECK(a <= 1.0);
}

TEST_CASE("roc without tumors flags the curve") {
  const std::vector<std::uint8_t> m(16, 0);
  const std::vector<double> p(16, 0.3);
  const auto curve = roc_sweep(p, m, 4);
  CHECK_FALSE(curve.tumors_present);
  CHECK(std::isnan(curve.auc));
  CHECK_THROWS_AS(roc(std::vector<double>(16, 1.5), m, 4, {0.5}), Error);
}

TEST_CASE("corner threshold selection") {
  RocCurve c;
  c.thresholds = {0.8, 0.4};
  c.fpr = {0.2, 0.6};
  c.tpr = {0.6, 0.9};
  CHECK(select_threshold(c) == 0.8);
  c.fpr = {0.3, 0.3};
  c.tpr = {0.7, 0.7};
  CHECK(select_threshold(c) == 0.8);
  // Brute-force minimiser on a denser toy curve.
  c.thresholds = {0.9, 0.7, 0.5, 0.3, 0.1};
  c.fpr = {0.0, 0.05, 0.2, 0.5, 1.0};
  c.tpr = {0.2, 0.7, 0.9, 1.0, 1.0};
  double best = 1e9;
  double tau = -1;
  for (std::size_t i = 0; i < 5; ++i) {
    const double d = std::hypot(c.fpr[i], 1.0 - c.tpr[i]);
    if (d < best) best = d, tau = c.thresholds[i];
  }
  CHECK(select_threshold(c) == tau);
}

TEST_CASE("tumor-wise Dice") {
  const auto m = two_tumor_mask();
  SUBCASE("detections equal the tumors") {
    std::vector<double> p(m.begin(), m.end());
    const auto d = dice(p, m, 8, 0.5);
    CHECK(d.value == 1.0);
    CHECK(d.true_detections == 2);
  }
  SUBCASE("three detections, two correct") {
    std::vector<double> p(64, 0.0);
    p[9] = p[53] = 1.0;
    p[31] = 1.0;  // false detection away from both tumors
    const auto d = dice(p, m, 8, 0.5);
    CHECK(d.detections == 3);
    CHECK(d.tumors == 2);
    CHECK(d.true_detections == 2);
    CHECK(d.value == 0.8);
  }
  SUBCASE("no detections") {
    const std::vector<double> p(64, 0.0);
    CHECK(dice(p, m, 8, 0.5).value == 0.0);
  }
  SUBCASE("one detection covering both tumors counts once") {
    std::vector<double> p(64, 0.0);
    for (int i = 0; i < 64; ++i) p[i] = (i % 8 >= 1 && i % 8 <= 6 && i / 8 >= 1 && i / 8 <= 6) ? 1.0 : 0.0;
    const auto d = dice(p, m, 8, 0.5);
    CHECK(d.true_detections == 1);
    CHECK(d.value == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("iou requirement") {
    std::vector<double> p(64, 0.0);
    p[9] = 1.0;  // 1 of 4 tumor pixels: IoU 0.25
    CHECK(dice(p, m, 8, 0.5, {.min_iou = 0.2}).true_detections == 1);
    CHECK(dice(p, m, 8, 0.5, {.min_iou = 0.5}).true_detections == 0);
  }
}

TEST_CASE("report writers emit every metric") {
  AssessmentReport r;
  r.name = "x";
  r.rmse = 0.1;
  r.ssim = 0.9;
  r.auc = 0.75;
  r.threshold = 0.02;
  r.corner_threshold = 0.3;
  r.dice = DiceResult{3, 2, 2, 0.8};
  std::ostringstream kv;
  write_report_summary(kv, r);
  for (const char* key : {"rmse=", "ssim=", "auc=", "dice=", "threshold=", "corner_threshold="}) {
    CHECK(kv.str().find(key) != std::string::npos);
  }
  std::ostringstream table;
  write_report_table(table, std::span<const AssessmentReport>(&r, 1));
  const std::string text = table.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
