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

#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "harp/geometry.hpp"
#include "harp/image.hpp"

namespace harp {

// Polynomial radial correction about a distortion center:
//   p_u - c = f(r_d) * (p_d - c),   r_d = |p_d - c|
// with f evaluated on the normalized radius r_d / radius_scale,
//   f(r) = k0 + k1 r + ... + kN r^N.
// Normalizing the radius keeps the coefficients O(1) for high orders; it is
// equivalent to rescaling the coefficients of a raw-radius polynomial.
//
// Models are immutable after construction. create() validates that f stays
// positive and that the radial map r_d -> r_d * f(r_d / radius_scale) is
// strictly increasing over [0, max_radius] (sampled), which makes the
// numeric inverse well defined.
class DistortionModel {
 public:
  // Identity correction about the origin.
  DistortionModel() = default;

  // max_radius <= 0 selects the default working range 1.5 * radius_scale.
  static DistortionModel create(Vec2 center, std::vector<double> k,
                                double radius_scale, double max_radius = 0.0);
  static std::optional<DistortionModel> try_create(Vec2 center,
                                                   std::vector<double> k,
                                                   double radius_scale,
                                                   double max_radius = 0.0);
  // k = (1): the correction that leaves every point unchanged.
  static DistortionModel identity(Vec2 center, double radius_scale);

  Vec2 center() const { return center_; }
  const std::vector<double>& coefficients() const { return k_; }
  double radius_scale() const { return radius_scale_; }
  double max_radius() const { return max_radius_; }
  int order() const { return static_cast<int>(k_.size()) - 1; }

  // Distorted -> corrected (undistorted) position.
  Vec2 correct(Vec2 p) const;

  // Corrected -> distorted position: Newton iteration with a bisection
  // fallback on the radial map, |delta r| tolerance 1e-11 px.
  Vec2 distort(Vec2 p) const;

  // f evaluated at normalized radius r (Horner).
  double factor(double r_normalized) const;

 private:
  Vec2 center_;
  std::vector<double> k_{1.0};
  double radius_scale_ = 1.0;
  double max_radius_ = 1.5;
};

inline Vec2 correct_point(const DistortionModel& m, Vec2 p) {
  return m.correct(p);
}
inline Vec2 distort_point(const DistortionModel& m, Vec2 p) {
  return m.distort(p);
}

// Inverse-maps every output pixel center through the model and samples the
// input bilinearly; out-of-bounds samples read as 0. Output size equals the
// input size.
GrayImage correct_image(const DistortionModel& m, const GrayImage& img);

// 3x3 projective map, row-major.
struct Homography {
  std::array<double, 9> h{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  Homography inverse() const;
};

Vec2 apply_homography(const Homography& h, Vec2 p);

using PointMap = std::function<Vec2(Vec2)>;

// Corrections that straighten lines are only defined up to a projective
// map, which makes raw residuals incomparable between methods. This pins
// the gauge: it maps the four image corners through the corrector and
// returns the exact homography sending the corrected corners back to the
// original ones, so the composed map fixes all four corners.
Homography normalize_homography(const PointMap& corrector, int width,
                                int height);

// Model text format:
//   radial_poly v1
//   center <x> <y>
//   radius_scale <r0>
//   k <k0> <k1> ... <kN>
// Floats carry enough digits that write/read/write is byte-identical.
void write_model(std::ostream& out, const DistortionModel& m);
void write_model_file(const std::string& path, const DistortionModel& m);
DistortionModel read_model(std::istream& in);
DistortionModel read_model_file(const std::string& path);

}  // namespace harp
