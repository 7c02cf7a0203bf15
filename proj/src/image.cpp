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

#include "harp/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "harp/error.hpp"

namespace harp {

namespace {

// Skips PGM whitespace and '#' comment lines, then reads one decimal value.
int read_pnm_value(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c))
    throw FormatError("truncated PGM header in " + path);
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    if (value > 1 << 30) throw FormatError("PGM header value overflow in " + path);
    c = in.get();
  }
  // The character after the value must be whitespace per the PGM spec.
  if (c != EOF && !std::isspace(c))
    throw FormatError("malformed PGM header in " + path);
  return static_cast<int>(value);
}

std::string sniff_format(const unsigned char* magic) {
  if (magic[0] == 0x89 && magic[1] == 'P') return "PNG";
  if (magic[0] == 0xFF && magic[1] == 0xD8) return "JPEG";
  if (magic[0] == 'B' && magic[1] == 'M') return "BMP";
  if (magic[0] == 'P' && magic[1] >= '1' && magic[1] <= '7')
    return std::string("PNM type P") + static_cast<char>(magic[1]);
  return "unknown";
}

}  // namespace

GrayImage GrayImage::filled(int width, int height, double value) {
  GrayImage img;
  img.width = width;
  img.height = height;
  img.samples.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

GrayImage load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  if (in.gcount() != 2) throw FormatError("truncated file " + path);
  if (magic[0] != 'P' || magic[1] != '5') {
    throw FormatError("unsupported format '" + sniff_format(magic) + "' in " +
                      path + " (binary PGM P5 expected)");
  }

  const int width = read_pnm_value(in, path);
  const int height = read_pnm_value(in, path);
  const int maxval = read_pnm_value(in, path);
  if (width <= 0 || height <= 0)
    throw FormatError("invalid PGM dimensions in " + path);
  if (maxval <= 0 || maxval > 65535)
    throw FormatError("invalid PGM maxval in " + path);

  const std::size_t count = static_cast<std::size_t>(width) * height;
  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(count * bytes_per_sample);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError("truncated PGM raster in " + path);

  GrayImage img;
  img.width = width;
  img.height = height;
  img.samples.resize(count);
  const double scale = 1.0 / maxval;
  if (bytes_per_sample == 1) {
    for (std::size_t i = 0; i < count; ++i) img.samples[i] = raw[i] * scale;
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const unsigned v = (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
      img.samples[i] = v * scale;
    }
  }
  return img;
}

double sample_bilinear(const GrayImage& img, double x, double y) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  double acc = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int xi = x0 + dx;
      const int yi = y0 + dy;
      if (xi < 0 || yi < 0 || xi >= img.width || yi >= img.height) continue;
      acc += (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy) * img.at(xi, yi);
    }
  }
  return acc;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  if (sigma <= 0.0) return img;

  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(2 * half + 1);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    kernel[i + half] = std::exp(-0.5 * (i / sigma) * (i / sigma));
    sum += kernel[i + half];
  }
  for (double& v : kernel) v /= sum;

  auto mirror = [](int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
  };

  GrayImage tmp = GrayImage::filled(img.width, img.height, 0.0);
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k)
        acc += kernel[k + half] * img.at(mirror(i + k, img.width), j);
      tmp.at(i, j) = acc;
    }
  }
  GrayImage out = GrayImage::filled(img.width, img.height, 0.0);
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      double acc = 0.0;
      for (int k = -half; k <= half; ++k)
        acc += kernel[k + half] * tmp.at(i, mirror(j + k, img.height));
      out.at(i, j) = acc;
    }
  }
  return out;
}

void save_image(const GrayImage& img, const std::string& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16)
    throw ParameterError("bit_depth must be 8 or 16");
  if (img.width <= 0 || img.height <= 0 ||
      img.samples.size() != static_cast<std::size_t>(img.width) * img.height)
    throw ParameterError("invalid image passed to save_image");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);

  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";

  std::vector<unsigned char> raw;
  raw.reserve(img.samples.size() * (bit_depth / 8));
  for (double s : img.samples) {
    const double clamped = std::clamp(s, 0.0, 1.0);
    const unsigned v = static_cast<unsigned>(std::lround(clamped * maxval));
    if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(v >> 8));
    raw.push_back(static_cast<unsigned char>(v & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace harp
