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

#include "harp/straightness.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "harp/error.hpp"

namespace harp {

namespace {

double sum_sq_at(double theta, const LineFitStats& s) {
  const double a = std::sin(theta);
  const double b = std::cos(theta);
  return s.n * (a * a * s.vxx + 2.0 * a * b * s.vxy + b * b * s.vyy);
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

std::pair<RegressionLine, LineFitStats> fit_regression_line(
    std::span<const Vec2> points) {
  if (points.size() < 2)
    throw DegenerateError("regression line needs at least 2 points");

  LineFitStats s;
  s.n = static_cast<int>(points.size());
  for (const Vec2& p : points) {
    s.ax += p.x;
    s.ay += p.y;
  }
  s.ax /= s.n;
  s.ay /= s.n;
  for (const Vec2& p : points) {
    const double dx = p.x - s.ax;
    const double dy = p.y - s.ay;
    s.vxx += dx * dx;
    s.vxy += dx * dy;
    s.vyy += dy * dy;
  }
  s.vxx /= s.n;
  s.vxy /= s.n;
  s.vyy /= s.n;

  const double spread = s.vxx + s.vyy;
  if (spread <= 0.0)
    throw DegenerateError("regression line fit on coincident points");

  double theta;
  if (std::fabs(s.vxx - s.vyy) <= 1e-12 * spread &&
      std::fabs(s.vxy) <= 1e-12 * spread) {
    theta = 0.0;  // isotropic: orientation undetermined
    s.degenerate_orientation = true;
  } else {
    const double t0 = 0.5 * std::atan2(-2.0 * s.vxy, s.vxx - s.vyy);
    const double t1 = t0 + M_PI / 2.0;
    theta = sum_sq_at(t0, s) <= sum_sq_at(t1, s) ? t0 : t1;
  }

  RegressionLine line;
  line.theta = theta;
  line.alpha = std::sin(theta);
  line.beta = std::cos(theta);
  line.gamma = s.ax * line.alpha + s.ay * line.beta;
  return {line, s};
}

std::vector<double> signed_distances(const RegressionLine& line,
                                     std::span<const Vec2> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const Vec2& p : points)
    out.push_back(line.alpha * p.x + line.beta * p.y - line.gamma);
  return out;
}

MeasurementReport rms_distance(const std::vector<std::vector<Vec2>>& chains) {
  MeasurementReport report;
  report.line_count = static_cast<int>(chains.size());

  double total_sq = 0.0;
  double total_range_sq = 0.0;
  for (std::size_t l = 0; l < chains.size(); ++l) {
    std::pair<RegressionLine, LineFitStats> fit;
    try {
      fit = fit_regression_line(chains[l]);
    } catch (const DegenerateError& e) {
      throw DegenerateError("chain " + std::to_string(l) + ": " + e.what());
    }
    if (fit.second.degenerate_orientation)
      report.degenerate_orientation_lines.push_back(static_cast<int>(l));

    const auto dist = signed_distances(fit.first, chains[l]);
    double sq = 0.0, lo = dist[0], hi = dist[0];
    for (double v : dist) {
      sq += v * v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }

    PerLineStats per;
    per.id = static_cast<int>(l);
    per.n = static_cast<int>(dist.size());
    per.rms = std::sqrt(sq / dist.size());
    per.range = hi - lo;
    report.per_line.push_back(per);

    total_sq += sq;
    total_range_sq += per.range * per.range;
    report.total_points += per.n;
  }

  if (report.total_points > 0)
    report.d_rms = std::sqrt(total_sq / report.total_points);
  if (report.line_count > 0)
    report.d_max = std::sqrt(total_range_sq / report.line_count);
  return report;
}

double max_error(const std::vector<std::vector<Vec2>>& chains) {
  return rms_distance(chains).d_max;
}

void write_report(std::ostream& out, const MeasurementReport& report) {
  out << "d_rms = " << fmt6(report.d_rms) << "\n";
  out << "d_max = " << fmt6(report.d_max) << "\n";
  out << "lines = " << report.line_count << "\n";
  out << "points = " << report.total_points << "\n";
  for (const PerLineStats& per : report.per_line) {
    out << "line " << per.id << " n=" << per.n << " rms=" << fmt6(per.rms)
        << " range=" << fmt6(per.range) << "\n";
  }
  for (int id : report.degenerate_orientation_lines)
    out << "warning line " << id << " degenerate orientation\n";
}

std::string report_to_string(const MeasurementReport& report) {
  std::ostringstream os;
  write_report(os, report);
  return os.str();
}

}  // namespace harp
