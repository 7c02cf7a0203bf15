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

#include "harp/subpixel_edges.hpp"

#include <cmath>

#include "harp/error.hpp"

namespace harp {

GradientField compute_gradient(const GrayImage& img) {
  if (img.width < 2 || img.height < 2)
    throw DimensionError("compute_gradient needs an image of at least 2x2");

  GradientField f;
  f.width = img.width - 1;
  f.height = img.height - 1;
  const std::size_t n = static_cast<std::size_t>(f.width) * f.height;
  f.gx.resize(n);
  f.gy.resize(n);
  f.magnitude.resize(n);
  f.angle.resize(n);

  for (int j = 0; j < f.height; ++j) {
    for (int i = 0; i < f.width; ++i) {
      const double a = img.at(i, j);
      const double b = img.at(i + 1, j);
      const double c = img.at(i, j + 1);
      const double d = img.at(i + 1, j + 1);
      const double gx = 0.5 * (b + d - a - c);
      const double gy = 0.5 * (c + d - a - b);
      const std::size_t k = f.idx(i, j);
      f.gx[k] = gx;
      f.gy[k] = gy;
      f.magnitude[k] = std::sqrt(gx * gx + gy * gy);
      double ang = std::atan2(gx, -gy);  // level-line angle
      if (ang <= -M_PI) ang = M_PI;
      f.angle[k] = ang;
    }
  }
  return f;
}

std::vector<SubpixelEdgePoint> detect_edges(const GradientField& field,
                                            double threshold) {
  if (threshold < 0.0)
    throw ParameterError("edge threshold must be non-negative");

  constexpr double kTan67_5 = 2.414213562373095;  // tan(67.5 deg)
  std::vector<SubpixelEdgePoint> points;

  for (int j = 0; j < field.height; ++j) {
    for (int i = 0; i < field.width; ++i) {
      const std::size_t k = field.idx(i, j);
      const double m0 = field.magnitude[k];
      if (!(m0 > threshold)) continue;

      // Quantize the gradient direction to the nearer of the four axes.
      const double ax = std::fabs(field.gx[k]);
      const double ay = std::fabs(field.gy[k]);
      int dx, dy;
      if (ax >= kTan67_5 * ay) {
        dx = 1;
        dy = 0;
      } else if (ay >= kTan67_5 * ax) {
        dx = 0;
        dy = 1;
      } else {
        dx = 1;
        dy = field.gx[k] * field.gy[k] >= 0.0 ? 1 : -1;
      }

      const int ip = i + dx, jp = j + dy;
      const int im = i - dx, jm = j - dy;
      if (ip < 0 || ip >= field.width || jp < 0 || jp >= field.height ||
          im < 0 || im >= field.width || jm < 0 || jm >= field.height)
        continue;

      const double m_plus = field.magnitude[field.idx(ip, jp)];
      const double m_minus = field.magnitude[field.idx(im, jm)];
      if (!(m0 >= m_minus && m0 > m_plus)) continue;

      // Vertex of the parabola through (-1, m-), (0, m0), (+1, m+), in
      // units of one grid step along the quantized direction. The maximum
      // condition above makes the denominator strictly negative.
      const double den = m_plus + m_minus - 2.0 * m0;
      double offset = den < 0.0 ? (m_minus - m_plus) / (2.0 * den) : 0.0;
      if (!(std::fabs(offset) <= 0.5)) offset = 0.0;

      points.push_back({i + GradientField::kGridOffset + offset * dx,
                        j + GradientField::kGridOffset + offset * dy, m0, i,
                        j});
    }
  }
  return points;
}

}  // namespace harp
