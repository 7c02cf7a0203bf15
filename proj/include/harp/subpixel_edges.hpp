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

#include <cstddef>
#include <vector>

#include "harp/image.hpp"

namespace harp {

// Image gradient from the 2x2 finite-difference mask
//   gx(i,j) = (I(i+1,j) + I(i+1,j+1) - I(i,j) - I(i,j+1)) / 2
//   gy(i,j) = (I(i,j+1) + I(i+1,j+1) - I(i,j) - I(i+1,j)) / 2
// The value stored at grid cell (i, j) is located at image coordinates
// (i + 0.5, j + 0.5), the common corner of the four pixels in the mask.
// Grid size is (image width - 1) x (image height - 1).
//
// angle holds the level-line angle (the gradient direction rotated by
// +pi/2), in (-pi, pi].
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx, gy, magnitude, angle;

  // Half-pixel offset between grid indices and image coordinates.
  static constexpr double kGridOffset = 0.5;

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * width + i;
  }
};

// One edge point located to sub-pixel accuracy. The quadratic correction
// keeps the point within half a cell of its anchor along each axis.
struct SubpixelEdgePoint {
  double x = 0.0;         // sub-pixel image coordinates
  double y = 0.0;
  double strength = 0.0;  // gradient magnitude at the anchor cell
  int anchor_x = 0;       // gradient-grid cell that produced the point
  int anchor_y = 0;
};

// Rejects quantization noise on 8-bit inputs; exposed as a CLI flag.
inline constexpr double kDefaultEdgeThreshold = 5.0 / 255.0;

GradientField compute_gradient(const GrayImage& img);

// Non-maxima suppression of the gradient magnitude along the gradient
// direction (quantized to horizontal/vertical/the two diagonals), followed
// by a quadratic sub-pixel correction. A cell emits a point when its
// magnitude exceeds threshold, is not below the trailing neighbor and
// strictly exceeds the leading one; ties on a two-cell plateau thus yield a
// single point at the shared maximum. Points are ordered row-major by
// anchor.
std::vector<SubpixelEdgePoint> detect_edges(
    const GradientField& field, double threshold = kDefaultEdgeThreshold);

}  // namespace harp
