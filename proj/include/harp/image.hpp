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
#include <string>
#include <vector>

namespace harp {

// Grayscale raster with samples normalized to [0, 1].
//
// Coordinate convention used by every module: pixel (i, j) is the sample at
// column i, row j, and the sub-pixel coordinate (x, y) = (i, j) is the
// CENTER of that pixel. Pixel (i, j) therefore covers the square
// [i - 0.5, i + 0.5] x [j - 0.5, j + 0.5].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> samples;  // row-major, width * height

  double at(int x, int y) const {
    return samples[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return samples[static_cast<std::size_t>(y) * width + x];
  }

  static GrayImage filled(int width, int height, double value);
};

// Reads a binary PGM (P5) file, 8-bit or 16-bit big-endian. Samples are
// scaled by the file's maxval so the result lies in [0, 1]. Other formats
// are rejected with a FormatError naming the format.
GrayImage load_image(const std::string& path);

// Writes a binary PGM (P5) file. bit_depth must be 8 or 16; 16-bit output
// round-trips quantized samples exactly.
void save_image(const GrayImage& img, const std::string& path,
                int bit_depth = 16);

// Bilinear interpolation at sub-pixel position (x, y) under the
// pixel-center convention; samples outside the frame read as 0.
double sample_bilinear(const GrayImage& img, double x, double y);

// Separable Gaussian blur, kernel truncated at +-4 sigma and renormalized,
// mirror boundary. sigma <= 0 returns the input unchanged.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

}  // namespace harp
