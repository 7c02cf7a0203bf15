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

#include "harp/synth_harp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "harp/error.hpp"
#include "harp/parallel.hpp"
#include "harp/plumbline.hpp"

namespace harp {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Unit normal deviate for one pixel: two splitmix64 streams keyed by
// (seed, index), Box-Muller transform.
double gaussian_noise(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t h1 = splitmix64(seed ^ (2 * index + 1));
  const std::uint64_t h2 = splitmix64(seed ^ (2 * index + 2));
  const double u1 = ((h1 >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = (h2 >> 11) * 0x1.0p-53;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct BandGeometry {
  Vec2 normal;
  double offset;
  double half_width;
  double luminance;
};

std::vector<BandGeometry> band_geometry(const HarpScene& scene) {
  std::vector<BandGeometry> bands;
  bands.reserve(scene.strings.size());
  for (const HarpString& s : scene.strings) {
    if (!(s.width >= 1.0))
      throw ParameterError("string width must be at least 1 px");
    if (norm(s.direction) <= 0.0)
      throw ParameterError("string direction must be nonzero");
    const Vec2 d = normalized(s.direction);
    BandGeometry b;
    b.normal = {-d.y, d.x};
    b.offset = dot(b.normal, s.point);
    b.half_width = 0.5 * s.width;
    b.luminance = s.luminance;
    bands.push_back(b);
  }
  return bands;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

GrayImage render(const HarpScene& scene, int width, int height) {
  if (width < 1 || height < 1)
    throw DimensionError("render needs a positive frame size");
  if (scene.supersample < 1)
    throw ParameterError("supersample factor must be at least 1");

  const std::vector<BandGeometry> bands = band_geometry(scene);
  const int ss = scene.supersample;
  const double inv_ss = 1.0 / ss;
  const double inv_count = 1.0 / (static_cast<double>(ss) * ss);

  GrayImage img = GrayImage::filled(width, height, 0.0);
  parallel_for_rows(height, [&](int j) {
    for (int i = 0; i < width; ++i) {
      double acc = 0.0;
      for (int b = 0; b < ss; ++b) {
        const double sy = j + (b + 0.5) * inv_ss - 0.5;
        for (int a = 0; a < ss; ++a) {
          const double sx = i + (a + 0.5) * inv_ss - 0.5;
          const Vec2 plane = scene.distortion.correct({sx, sy});
          double v = scene.background;
          for (const BandGeometry& band : bands) {
            if (std::fabs(dot(band.normal, plane) - band.offset) <=
                band.half_width) {
              v = band.luminance;
              break;
            }
          }
          acc += v;
        }
      }
      double value = acc * inv_count;
      if (scene.noise_sigma > 0.0) {
        const std::uint64_t index =
            static_cast<std::uint64_t>(j) * width + i;
        value += scene.noise_sigma * gaussian_noise(scene.seed, index);
      }
      img.at(i, j) = std::clamp(value, 0.0, 1.0);
    }
  });
  return img;
}

SynthChains synth_chains(const HarpScene& scene, int width, int height,
                         int points_per_string) {
  if (points_per_string < 2)
    throw ParameterError("points_per_string must be at least 2");
  if (width < 2 || height < 2)
    throw DimensionError("synth_chains needs a positive frame size");

  SynthChains out;
  out.model = scene.distortion;

  // Undistorted positions of strings can leave the frame slightly; scan a
  // margin wide enough to cover the correction displacement.
  const double margin = 0.1 * std::max(width, height);

  for (std::size_t s = 0; s < scene.strings.size(); ++s) {
    const HarpString& str = scene.strings[s];
    const Vec2 d = normalized(str.direction);

    // Clip the center line against the inflated frame (Liang-Barsky).
    double t0 = -1e300, t1 = 1e300;
    const double lo[2] = {-margin, -margin};
    const double hi[2] = {width - 1.0 + margin, height - 1.0 + margin};
    const double p0[2] = {str.point.x, str.point.y};
    const double dir[2] = {d.x, d.y};
    bool visible = true;
    for (int axis = 0; axis < 2; ++axis) {
      if (std::fabs(dir[axis]) < 1e-15) {
        if (p0[axis] < lo[axis] || p0[axis] > hi[axis]) visible = false;
        continue;
      }
      double a = (lo[axis] - p0[axis]) / dir[axis];
      double b = (hi[axis] - p0[axis]) / dir[axis];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    }
    if (!visible || t0 >= t1)
      throw ParameterError("string " + std::to_string(s) +
                           " does not cross the frame");

    // Dense scan of the visible span, keeping samples whose distorted
    // position lands inside the frame.
    const int scan = 8 * points_per_string;
    std::vector<Vec2> kept;
    kept.reserve(scan);
    for (int i = 0; i < scan; ++i) {
      const double t = t0 + (t1 - t0) * (i + 0.5) / scan;
      const Vec2 plane = str.point + t * d;
      Vec2 distorted;
      try {
        distorted = scene.distortion.distort(plane);
      } catch (const ModelError&) {
        continue;  // beyond the validated radius range
      }
      if (distorted.x >= 0.0 && distorted.x <= width - 1.0 &&
          distorted.y >= 0.0 && distorted.y <= height - 1.0)
        kept.push_back(distorted);
    }
    if (static_cast<int>(kept.size()) < points_per_string)
      throw ParameterError("string " + std::to_string(s) +
                           " yields too few in-frame points");

    std::vector<Vec2> chain;
    chain.reserve(points_per_string);
    for (int i = 0; i < points_per_string; ++i) {
      const std::size_t idx = static_cast<std::size_t>(
          (i + 0.5) * kept.size() / points_per_string);
      chain.push_back(kept[std::min(idx, kept.size() - 1)]);
    }
    out.chains.push_back(std::move(chain));
  }
  return out;
}

SceneFile read_scene(std::istream& in) {
  int width = 0, height = 0;
  double background = 0.85, noise_sigma = 0.0;
  int supersample = 16;
  std::uint64_t seed = 0;
  Vec2 center{0.0, 0.0};
  bool has_center = false;
  double radius_scale = 0.0;
  std::vector<double> k;
  std::vector<HarpString> strings;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string key;
    row >> key;
    bool ok = true;
    if (key == "width") {
      ok = static_cast<bool>(row >> width);
    } else if (key == "height") {
      ok = static_cast<bool>(row >> height);
    } else if (key == "background") {
      ok = static_cast<bool>(row >> background);
    } else if (key == "noise_sigma") {
      ok = static_cast<bool>(row >> noise_sigma);
    } else if (key == "supersample") {
      ok = static_cast<bool>(row >> supersample);
    } else if (key == "seed") {
      ok = static_cast<bool>(row >> seed);
    } else if (key == "center") {
      ok = static_cast<bool>(row >> center.x >> center.y);
      has_center = true;
    } else if (key == "radius_scale") {
      ok = static_cast<bool>(row >> radius_scale);
    } else if (key == "k") {
      double v;
      while (row >> v) k.push_back(v);
      ok = !k.empty();
    } else if (key == "string") {
      HarpString s;
      ok = static_cast<bool>(row >> s.point.x >> s.point.y >> s.direction.x >>
                             s.direction.y >> s.width >> s.luminance);
      strings.push_back(s);
    } else {
      throw FormatError("unknown scene key '" + key + "' at line " +
                        std::to_string(line_no));
    }
    if (!ok)
      throw FormatError("malformed scene line " + std::to_string(line_no));
  }

  if (width < 2 || height < 2)
    throw FormatError("scene file must set width and height (>= 2)");

  SceneFile out;
  out.width = width;
  out.height = height;
  out.scene.background = background;
  out.scene.noise_sigma = noise_sigma;
  out.scene.supersample = supersample;
  out.scene.seed = seed;
  out.scene.strings = std::move(strings);

  if (!has_center) center = image_center(width, height);
  if (radius_scale <= 0.0) radius_scale = default_radius_scale(width, height);
  if (k.empty()) k = {1.0};
  out.scene.distortion = DistortionModel::create(center, std::move(k),
                                                 radius_scale);
  return out;
}

SceneFile read_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_scene(in);
}

void write_scene(std::ostream& out, const SceneFile& scene) {
  out << "width " << scene.width << "\n";
  out << "height " << scene.height << "\n";
  out << "background " << fmt17(scene.scene.background) << "\n";
  out << "noise_sigma " << fmt17(scene.scene.noise_sigma) << "\n";
  out << "supersample " << scene.scene.supersample << "\n";
  out << "seed " << scene.scene.seed << "\n";
  const DistortionModel& m = scene.scene.distortion;
  out << "center " << fmt17(m.center().x) << " " << fmt17(m.center().y) << "\n";
  out << "radius_scale " << fmt17(m.radius_scale()) << "\n";
  out << "k";
  for (double v : m.coefficients()) out << " " << fmt17(v);
  out << "\n";
  for (const HarpString& s : scene.scene.strings) {
    out << "string " << fmt17(s.point.x) << " " << fmt17(s.point.y) << " "
        << fmt17(s.direction.x) << " " << fmt17(s.direction.y) << " "
        << fmt17(s.width) << " " << fmt17(s.luminance) << "\n";
  }
}

void write_scene_file(const std::string& path, const SceneFile& scene) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_scene(out, scene);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace harp
