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

#include "harp/distortion_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "harp/error.hpp"
#include "harp/parallel.hpp"

namespace harp {

namespace {

constexpr int kValidationSamples = 2048;
constexpr double kInverseTolerance = 1e-11;
constexpr int kInverseMaxIterations = 200;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double poly_eval(const std::vector<double>& k, double r) {
  double f = 0.0;
  for (auto it = k.rbegin(); it != k.rend(); ++it) f = f * r + *it;
  return f;
}

double poly_derivative(const std::vector<double>& k, double r) {
  double d = 0.0;
  for (int m = static_cast<int>(k.size()) - 1; m >= 1; --m)
    d = d * r + m * k[m];
  return d;
}

}  // namespace

std::optional<DistortionModel> DistortionModel::try_create(
    Vec2 center, std::vector<double> k, double radius_scale,
    double max_radius) {
  if (k.empty() || !(k[0] > 0.0) || !(radius_scale > 0.0)) return std::nullopt;
  if (max_radius <= 0.0) max_radius = 1.5 * radius_scale;

  // Sampled validation of f > 0 and strict monotonicity of the radial map.
  double prev = 0.0;
  for (int i = 0; i <= kValidationSamples; ++i) {
    const double r = max_radius * i / kValidationSamples;
    const double f = poly_eval(k, r / radius_scale);
    if (!(f > 0.0) || !std::isfinite(f)) return std::nullopt;
    const double mapped = r * f;
    if (i > 0 && !(mapped > prev)) return std::nullopt;
    prev = mapped;
  }

  DistortionModel m;
  m.center_ = center;
  m.k_ = std::move(k);
  m.radius_scale_ = radius_scale;
  m.max_radius_ = max_radius;
  return m;
}

DistortionModel DistortionModel::create(Vec2 center, std::vector<double> k,
                                        double radius_scale,
                                        double max_radius) {
  if (k.empty()) throw ModelError("model needs at least coefficient k0");
  if (!(k[0] > 0.0)) throw ModelError("k0 must be positive");
  if (!(radius_scale > 0.0)) throw ModelError("radius_scale must be positive");
  if (max_radius <= 0.0) max_radius = 1.5 * radius_scale;

  double prev = 0.0;
  for (int i = 0; i <= kValidationSamples; ++i) {
    const double r = max_radius * i / kValidationSamples;
    const double f = poly_eval(k, r / radius_scale);
    if (!(f > 0.0) || !std::isfinite(f)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "correction factor not positive at radius %.6g px", r);
      throw ModelError(buf);
    }
    const double mapped = r * f;
    if (i > 0 && !(mapped > prev)) {
      char buf[96];
      std::snprintf(buf, sizeof(buf),
                    "radial map not increasing near radius %.6g px", r);
      throw ModelError(buf);
    }
    prev = mapped;
  }

  DistortionModel m;
  m.center_ = center;
  m.k_ = std::move(k);
  m.radius_scale_ = radius_scale;
  m.max_radius_ = max_radius;
  return m;
}

DistortionModel DistortionModel::identity(Vec2 center, double radius_scale) {
  return create(center, {1.0}, radius_scale);
}

double DistortionModel::factor(double r_normalized) const {
  return poly_eval(k_, r_normalized);
}

Vec2 DistortionModel::correct(Vec2 p) const {
  const Vec2 d = p - center_;
  const double r = norm(d);
  const double f = poly_eval(k_, r / radius_scale_);
  if (f == 1.0) return p;  // keep identity corrections exact
  return center_ + f * d;
}

Vec2 DistortionModel::distort(Vec2 p) const {
  const Vec2 d = p - center_;
  const double ru = norm(d);
  if (ru == 0.0) return p;

  // Solve r * f(r / r0) = ru for the distorted radius r.
  auto forward = [&](double r) { return r * poly_eval(k_, r / radius_scale_); };
  double lo = 0.0, hi = max_radius_;
  if (forward(hi) < ru)
    throw ModelError("corrected radius outside the validated model range");

  double r = std::min(ru, hi);
  for (int it = 0; it < kInverseMaxIterations; ++it) {
    const double g = forward(r);
    if (g == ru) {  // exact hit (identity models land here immediately)
      const double scale = r / ru;
      return scale == 1.0 ? p : center_ + scale * d;
    }
    if (g > ru)
      hi = r;
    else
      lo = r;
    const double rho = r / radius_scale_;
    const double slope =
        poly_eval(k_, rho) + rho * poly_derivative(k_, rho);
    double next = slope > 0.0 ? r - (g - ru) / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::fabs(next - r);
    r = next;
    if (change <= kInverseTolerance) {
      const double scale = r / ru;
      if (scale == 1.0) return p;  // keep identity corrections exact
      return center_ + scale * d;
    }
  }
  throw ConvergenceError("radial inversion did not converge in 200 iterations");
}

GrayImage correct_image(const DistortionModel& m, const GrayImage& img) {
  GrayImage out = GrayImage::filled(img.width, img.height, 0.0);

  parallel_for_rows(img.height, [&](int j) {
    for (int i = 0; i < img.width; ++i) {
      const Vec2 src =
          m.distort({static_cast<double>(i), static_cast<double>(j)});
      out.at(i, j) = sample_bilinear(img, src.x, src.y);
    }
  });
  return out;
}

Homography Homography::inverse() const {
  Eigen::Matrix3d m;
  m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  const double det = m.determinant();
  if (!(std::fabs(det) > 1e-300))
    throw NumericalError("homography is singular");
  Eigen::Matrix3d inv = m.inverse();
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.h[3 * r + c] = inv(r, c);
  return out;
}

Vec2 apply_homography(const Homography& h, Vec2 p) {
  const double w = h.h[6] * p.x + h.h[7] * p.y + h.h[8];
  if (!(std::fabs(w) >= 1e-12))
    throw ProjectiveError("point maps to infinity under homography");
  return {(h.h[0] * p.x + h.h[1] * p.y + h.h[2]) / w,
          (h.h[3] * p.x + h.h[4] * p.y + h.h[5]) / w};
}

Homography normalize_homography(const PointMap& corrector, int width,
                                int height) {
  if (width < 2 || height < 2)
    throw DimensionError("normalize_homography needs a frame of at least 2x2");

  const Vec2 corners[4] = {{0.0, 0.0},
                           {static_cast<double>(width - 1), 0.0},
                           {static_cast<double>(width - 1),
                            static_cast<double>(height - 1)},
                           {0.0, static_cast<double>(height - 1)}};
  Vec2 mapped[4];
  for (int i = 0; i < 4; ++i) mapped[i] = corrector(corners[i]);

  // The corrected corners must be in general position.
  const double scale = std::hypot(width, height);
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) {
        const double area =
            cross(mapped[b] - mapped[a], mapped[c] - mapped[a]);
        if (std::fabs(area) <= 1e-9 * scale * scale)
          throw DegenerateError("three corrected corners are collinear");
      }

  // Exact 4-point homography mapping corrected corners back to the original
  // ones, with h22 pinned to 1 (8x8 linear system).
  Eigen::Matrix<double, 8, 8> a = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const double x = mapped[i].x, y = mapped[i].y;
    const double u = corners[i].x, v = corners[i].y;
    a(2 * i, 0) = x;
    a(2 * i, 1) = y;
    a(2 * i, 2) = 1.0;
    a(2 * i, 6) = -u * x;
    a(2 * i, 7) = -u * y;
    b(2 * i) = u;
    a(2 * i + 1, 3) = x;
    a(2 * i + 1, 4) = y;
    a(2 * i + 1, 5) = 1.0;
    a(2 * i + 1, 6) = -v * x;
    a(2 * i + 1, 7) = -v * y;
    b(2 * i + 1) = v;
  }

  Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
  if (!lu.isInvertible())
    throw NumericalError("singular system in homography normalization");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);

  Homography out;
  for (int i = 0; i < 8; ++i) out.h[i] = h(i);
  out.h[8] = 1.0;
  return out;
}

void write_model(std::ostream& out, const DistortionModel& m) {
  out << "radial_poly v1\n";
  out << "center " << fmt17(m.center().x) << " " << fmt17(m.center().y) << "\n";
  out << "radius_scale " << fmt17(m.radius_scale()) << "\n";
  out << "k";
  for (double v : m.coefficients()) out << " " << fmt17(v);
  out << "\n";
}

void write_model_file(const std::string& path, const DistortionModel& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_model(out, m);
  if (!out) throw IoError("write failed for " + path);
}

DistortionModel read_model(std::istream& in) {
  std::string tag, version;
  if (!(in >> tag >> version) || tag != "radial_poly" || version != "v1")
    throw FormatError("not a radial_poly v1 model file");

  Vec2 center;
  double radius_scale = 0.0;
  std::vector<double> k;
  std::string key;
  while (in >> key) {
    if (key == "center") {
      if (!(in >> center.x >> center.y))
        throw FormatError("malformed center line in model file");
    } else if (key == "radius_scale") {
      if (!(in >> radius_scale))
        throw FormatError("malformed radius_scale line in model file");
    } else if (key == "k") {
      std::string rest;
      std::getline(in, rest);
      std::istringstream row(rest);
      double v;
      while (row >> v) k.push_back(v);
    } else {
      throw FormatError("unexpected key '" + key + "' in model file");
    }
  }
  if (k.empty()) throw FormatError("model file missing coefficient line");
  return DistortionModel::create(center, std::move(k), radius_scale);
}

DistortionModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_model(in);
}

}  // namespace harp
