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

#include <span>
#include <string>
#include <vector>

#include "harp/geometry.hpp"
#include "harp/line_support.hpp"

namespace harp {

// Chain re-sampled to a uniform arc-length step along its polyline.
struct ResampledChain {
  std::vector<Vec2> points;
  double step = 0.0;         // arc-length spacing, px
  int subsample_factor = 1;  // decimation already applied
  int origin_chain = -1;
};

// Chain expressed in the coordinate frame of its regression line: s is the
// arc position along the line from the endpoint with the smaller
// projection, v the signed distance to the line.
struct IntrinsicSignal {
  std::vector<double> s;
  std::vector<double> v;
};

// Smoothing factor balancing oscillation removal against keeping the
// (low frequency) geometric distortion; exposed as a CLI flag.
inline constexpr int kDefaultSubsampleFactor = 30;

// Smoothing scale of the string-quality diagnostic, px of arc length.
inline constexpr double kDiagnosticSigma = 40.0;

// Re-samples to step d = L/N (L polyline length, N input point count) by
// linear interpolation between bracketing points; both endpoints are kept,
// so the output has N+1 points.
ResampledChain resample_polyline(std::span<const Vec2> points,
                                 int origin_chain = -1);
ResampledChain resample_chain(const EdgeChain& chain);

// Convolves x(s) and y(s), as 1-D signals indexed by sample position, with
// a discrete Gaussian of sigma = 0.8*sqrt(t^2-1) (kernel truncated at
// +-4 sigma and renormalized, mirror boundary), then keeps every t-th
// point. t = 1 is the identity.
ResampledChain smooth_subsample(const ResampledChain& chain, int t);

// (s, v) intrinsic coordinates; mean(v) = 0 since the regression line
// passes through the centroid.
IntrinsicSignal intrinsic_coordinates(std::span<const Vec2> points);

// High-frequency component of the intrinsic signal: v minus a Gaussian
// smoothing of v over arc length (mirror boundary). Values within 3 sigma
// of either end carry the usual convolution border artifact; diagnostics
// exclude that margin.
IntrinsicSignal high_frequency_component(std::span<const Vec2> points,
                                         double sigma = kDiagnosticSigma);
IntrinsicSignal high_frequency_component(const EdgeChain& chain,
                                         double sigma = kDiagnosticSigma);

// Chain text format: one block per chain, header "# chain <id> <n>", then
// n lines "x y" (>= 9 significant digits), blocks separated by blank lines.
void write_chains(std::ostream& out,
                  const std::vector<std::vector<Vec2>>& chains);
void write_chains_file(const std::string& path,
                       const std::vector<std::vector<Vec2>>& chains);
std::vector<std::vector<Vec2>> read_chains(std::istream& in);
std::vector<std::vector<Vec2>> read_chains_file(const std::string& path);

}  // namespace harp
