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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "harp/geometry.hpp"

namespace harp {

// Orthogonal regression line alpha*x + beta*y - gamma = 0 with unit normal
// (alpha, beta) = (sin theta, cos theta). The line passes through the
// centroid of the generating points.
struct RegressionLine {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  double theta = 0.0;
};

struct LineFitStats {
  double ax = 0.0, ay = 0.0;             // centroid
  double vxx = 0.0, vxy = 0.0, vyy = 0.0;  // second central moments
  int n = 0;
  bool degenerate_orientation = false;  // isotropic cloud, theta = 0 chosen
};

struct PerLineStats {
  int id = 0;
  int n = 0;
  double rms = 0.0;    // RMS signed distance to the line
  double range = 0.0;  // max - min signed distance
};

// The two straightness measures over a set of chains: d_rms is the RMS of
// all signed distances pooled over every point, d_max the RMS over lines of
// each line's signed-distance range.
struct MeasurementReport {
  double d_rms = 0.0;
  double d_max = 0.0;
  std::vector<PerLineStats> per_line;
  long long total_points = 0;
  int line_count = 0;
  std::vector<int> degenerate_orientation_lines;
};

// Orthogonal regression through the centroid; the double-angle relation
// tan(2*theta) = -2*Vxy / (Vxx - Vyy) yields two candidates, resolved by
// comparing the summed squared distances. An isotropic cloud picks theta = 0
// and flags the fit.
std::pair<RegressionLine, LineFitStats> fit_regression_line(
    std::span<const Vec2> points);

std::vector<double> signed_distances(const RegressionLine& line,
                                     std::span<const Vec2> points);

// Fits every chain and fills both measures; throws DegenerateError naming
// the chain index when a chain cannot be fit.
MeasurementReport rms_distance(const std::vector<std::vector<Vec2>>& chains);

// The d_max measure alone.
double max_error(const std::vector<std::vector<Vec2>>& chains);

// Plain-text report: d_rms / d_max / lines / points header, one row per
// line, floats with 6 significant digits.
void write_report(std::ostream& out, const MeasurementReport& report);
std::string report_to_string(const MeasurementReport& report);

}  // namespace harp
