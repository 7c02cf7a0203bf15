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

#include <cstdint>
#include <string>
#include <vector>

#include "harp/distortion_model.hpp"
#include "harp/geometry.hpp"
#include "harp/image.hpp"

namespace harp {

// One stretched string: an infinite straight band in the undistorted plane.
struct HarpString {
  Vec2 point;        // any point on the center line
  Vec2 direction;    // line direction (normalized on use)
  double width = 4;  // band width, px
  double luminance = 0.15;
};

// Synthetic scene. The stored model is the CORRECTION whose correct() lookup
// straightens the rendered image, so it is the exact ground truth that any
// calibration run against the rendering should recover.
struct HarpScene {
  std::vector<HarpString> strings;
  double background = 0.85;
  DistortionModel distortion;  // identity when absent from the scene file
  double noise_sigma = 0.0;    // additive Gaussian noise, luminance units
  int supersample = 16;
  std::uint64_t seed = 0;
};

struct SceneFile {
  HarpScene scene;
  int width = 0;
  int height = 0;
};

// Renders the distorted view of the scene: every sample position in the
// output is looked up in the undistorted plane through the model's correct
// map, takes the luminance of the first string band covering it (the
// background otherwise), and pixels average supersample^2 such samples.
// Noise is drawn per pixel from a counter-based generator (splitmix64
// streams keyed by seed and pixel index, Box-Muller transform), so renders
// are reproducible regardless of threading.
GrayImage render(const HarpScene& scene, int width, int height);

struct SynthChains {
  std::vector<std::vector<Vec2>> chains;  // distorted positions
  DistortionModel model;                  // exact ground truth
};

// Point-level oracle that bypasses rendering: samples exact points on every
// string line and maps them through the inverse correction. Correcting the
// returned chains with the returned model restores collinearity to solver
// precision. Each chain carries exactly points_per_string points whose
// distorted positions fall inside the frame.
SynthChains synth_chains(const HarpScene& scene, int width, int height,
                         int points_per_string);

// Scene text format: "width/height/background/supersample/noise_sigma/seed"
// key-value lines, optional model lines ("center", "radius_scale", "k"),
// and one "string px py dx dy width luminance" line per string.
SceneFile read_scene(std::istream& in);
SceneFile read_scene_file(const std::string& path);
void write_scene(std::ostream& out, const SceneFile& scene);
void write_scene_file(const std::string& path, const SceneFile& scene);

}  // namespace harp
