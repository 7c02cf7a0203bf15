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

#include <vector>

#include "harp/chain_resample.hpp"
#include "harp/image.hpp"
#include "harp/line_support.hpp"

namespace harp {

struct ExtractOptions {
  // Image smoothing ahead of the gradient. Sharp renders and re-sampled
  // (warped) inputs alias the sub-pixel correction without it.
  double pre_blur_sigma = 1.4;
  double edge_threshold = kDefaultEdgeThreshold;
  int subsample_factor = kDefaultSubsampleFactor;  // t
  LsdOptions lsd;
  MergeOptions merge;
  // Chains confined to a band this close to one frame edge are artifacts of
  // the frame boundary (warp fill), not strings.
  double border_margin = 10.0;
  // Points this close to the frame boundary sit inside the blur's boundary
  // support (and a warp's fill transition) and are dropped.
  double border_trim = 6.0;
  std::size_t min_chain_points = 2;  // after smoothing
};

// Full edge-extraction pipeline: gradient, sub-pixel edge points, line
// support regions, point-to-region assignment, chain merging, arc-length
// re-sampling, and Gaussian smoothing with subsampling by t.
std::vector<std::vector<Vec2>> extract_chains(const GrayImage& img,
                                              const ExtractOptions& opts = {});

}  // namespace harp
