// Copyright 2026 The harp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "harp/error.hpp"
#include "harp/subpixel_edges.hpp"
#include "oracles.hpp"

using namespace harp;
using namespace harp::testing;

TEST_CASE("constant image has zero gradient and no edges") {
  const GrayImage img = GrayImage::filled(12, 9, 0.6);
  const GradientField f = compute_gradient(img);
  for (double m : f.magnitude) CHECK(m == 0.0);
  CHECK(detect_edges(f, 0.01).empty());
}

TEST_CASE("linear ramp gives a uniform gradient") {
  const int w = 10, h = 6;
  GrayImage img = GrayImage::filled(w, h, 0.0);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) img.at(i, j) = static_cast<double>(i) / w;
  const GradientField f = compute_gradient(img);
  for (std::size_t k = 0; k < f.gx.size(); ++k) {
    CHECK(f.gx[k] == doctest::Approx(1.0 / w).epsilon(1e-12));
    CHECK(f.gy[k] == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("magnitude and level-line angle are consistent") {
  GrayImage img = GrayImage::filled(8, 8, 0.0);
  for (int j = 0; j < 8; ++j)
    for (int i = 0; i < 8; ++i) img.at(i, j) = 0.1 * i + 0.07 * j;
  const GradientField f = compute_gradient(img);
  for (std::size_t k = 0; k < f.gx.size(); ++k) {
    const double m2 = f.gx[k] * f.gx[k] + f.gy[k] * f.gy[k];
    CHECK(f.magnitude[k] * f.magnitude[k] == doctest::Approx(m2).epsilon(1e-9));
    CHECK(f.angle[k] > -M_PI);
    CHECK(f.angle[k] <= M_PI);
  }
}

TEST_CASE("unit stripes alternate the level-line angle by pi") {
  // Hand evaluation of the 2x2 mask on I(i,j) = i % 2: columns of gradient
  // cells alternate gx = +1, -1 with gy = 0, so level-line angles alternate
  // between +pi/2 and -pi/2.
  GrayImage img = GrayImage::filled(5, 4, 0.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 5; ++i) img.at(i, j) = i % 2;
  const GradientField f = compute_gradient(img);
  for (int j = 0; j < f.height; ++j)
    for (int i = 0; i + 1 < f.width; ++i) {
      const double a = f.angle[f.idx(i, j)];
      const double b = f.angle[f.idx(i + 1, j)];
      CHECK(std::fabs(std::remainder(a - b - M_PI, 2.0 * M_PI)) <= 1e-12);
    }

  // The single-pixel checkerboard lies in the null space of the 2x2 mask:
  // every cell averages two black and two white pixels per difference.
  GrayImage board = GrayImage::filled(3, 3, 0.0);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) board.at(i, j) = (i + j) % 2;
  const GradientField fb = compute_gradient(board);
  for (double m : fb.magnitude) CHECK(m == doctest::Approx(0.0));
}

TEST_CASE("hard vertical edges are located exactly at both grid phases") {
  for (double c : {10.0, 10.5}) {
    const GrayImage img = hard_vertical_edge(24, 8, c);
    const auto points = detect_edges(compute_gradient(img), 0.05);
    REQUIRE(!points.empty());
    for (const auto& p : points) CHECK(std::fabs(p.x - c) <= 0.05);
    // One detection per row.
    CHECK(points.size() == 7);
  }
}

TEST_CASE("blurred step edge at x = 10.3 is found within 0.05 px") {
  const GrayImage img = blurred_edge(24, 10, 10.3, 5.0, 0.0, 1.5, 16);
  const auto points = detect_edges(compute_gradient(img), 0.02);
  REQUIRE(!points.empty());
  double mean = 0.0;
  for (const auto& p : points) mean += p.x;
  mean /= points.size();
  CHECK(std::fabs(mean - 10.3) <= 0.05);
}

TEST_CASE("tilted noise-free edge: RMS distance to the true line <= 0.05") {
  const double tilt = 10.0 * M_PI / 180.0;
  const double cx = 20.0, cy = 15.0;
  const GrayImage img = blurred_edge(40, 30, cx, cy, tilt, 1.5, 8);
  const auto points = detect_edges(compute_gradient(img), 0.02);
  REQUIRE(points.size() >= 20);
  const double nx = std::cos(tilt), ny = -std::sin(tilt);
  double sq = 0.0;
  for (const auto& p : points) {
    const double s = nx * (p.x - cx) + ny * (p.y - cy);
    sq += s * s;
  }
  CHECK(std::sqrt(sq / points.size()) <= 0.05);
}

TEST_CASE("whole-pixel translation shifts detections by the same vector") {
  const double tilt = 7.0 * M_PI / 180.0;
  const GrayImage a = blurred_edge(40, 30, 17.25, 14.0, tilt, 1.2, 8);
  const GrayImage b = blurred_edge(40, 30, 17.25 + 3.0, 14.0 + 2.0, tilt, 1.2, 8);
  auto pa = detect_edges(compute_gradient(a), 0.02);
  auto pb = detect_edges(compute_gradient(b), 0.02);

  // Compare on anchors present in both (the shifted frame crops some rows).
  std::size_t matched = 0;
  for (const auto& q : pb) {
    for (const auto& p : pa) {
      if (p.anchor_x + 3 == q.anchor_x && p.anchor_y + 2 == q.anchor_y) {
        CHECK(std::fabs(q.x - (p.x + 3.0)) <= 1e-6);
        CHECK(std::fabs(q.y - (p.y + 2.0)) <= 1e-6);
        ++matched;
        break;
      }
    }
  }
  CHECK(matched >= 15);
}

TEST_CASE("emitted points satisfy the local-maximum contract") {
  const GrayImage img = blurred_edge(40, 30, 19.6, 14.0, 0.3, 1.4, 8);
  const GradientField f = compute_gradient(img);
  const auto points = detect_edges(f, 0.02);
  REQUIRE(!points.empty());
  for (const auto& p : points) {
    // The correction offset never exceeds half a cell per axis.
    CHECK(std::fabs(p.x - (p.anchor_x + 0.5)) <= 0.5);
    CHECK(std::fabs(p.y - (p.anchor_y + 0.5)) <= 0.5);
    const std::size_t k = f.idx(p.anchor_x, p.anchor_y);
    CHECK(p.strength == f.magnitude[k]);

    // The parabola denominator m+ + m- - 2*m0 is negative at every point.
    const double ax = std::fabs(f.gx[k]), ay = std::fabs(f.gy[k]);
    int dx, dy;
    const double kTan = 2.414213562373095;
    if (ax >= kTan * ay) {
      dx = 1;
      dy = 0;
    } else if (ay >= kTan * ax) {
      dx = 0;
      dy = 1;
    } else {
      dx = 1;
      dy = f.gx[k] * f.gy[k] >= 0.0 ? 1 : -1;
    }
    const double m0 = f.magnitude[k];
    const double mp = f.magnitude[f.idx(p.anchor_x + dx, p.anchor_y + dy)];
    const double mm = f.magnitude[f.idx(p.anchor_x - dx, p.anchor_y - dy)];
    CHECK(mp + mm - 2.0 * m0 < 0.0);
  }
}

TEST_CASE("parameter and dimension errors") {
  const GrayImage img = GrayImage::filled(4, 4, 0.0);
  CHECK_THROWS_AS(detect_edges(compute_gradient(img), -1.0), ParameterError);
  const GrayImage thin = GrayImage::filled(1, 5, 0.0);
  CHECK_THROWS_AS(compute_gradient(thin), DimensionError);
}
