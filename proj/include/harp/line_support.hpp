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

#include <cmath>
#include <utility>
#include <vector>

#include "harp/subpixel_edges.hpp"

namespace harp {

// Rectangle summarizing a line support region, in image coordinates.
struct OrientedRect {
  double cx = 0.0;
  double cy = 0.0;
  double theta = 0.0;  // axis angle, radians
  double length = 0.0;
  double width = 0.0;
};

// Connected set of gradient-grid cells sharing a level-line orientation,
// validated a-contrario. A detection is kept when log10(NFA) <= 0, i.e.
// the expected number of equally structured events in noise is at most 1.
struct LineSupportRegion {
  std::vector<std::pair<int, int>> pixels;  // gradient-grid coordinates
  double mean_angle = 0.0;                  // level-line angle, radians
  OrientedRect rect;
  double nfa_log10 = 0.0;
};

// Ordered sub-pixel edge points belonging to one side of one string.
struct EdgeChain {
  std::vector<SubpixelEdgePoint> points;
  int source_region = -1;
  int side = 0;  // which of the two string edges; diagnostics only
};

struct LsdOptions {
  double angle_tolerance = 22.5 * M_PI / 180.0;  // region growing tolerance
  double quantization = 2.0 / 255.0;  // gradient quantization error bound
  double density_threshold = 0.7;     // aligned-point density for refinement
  double max_log_nfa = 0.0;           // keep regions with log10(NFA) <= this
};

struct MergeOptions {
  double angle_tolerance = 3.0 * M_PI / 180.0;
  double gap_tolerance = 100.0;    // px, along the shared axis
  double offset_tolerance = 3.0;   // px, perpendicular
};

// Greedy level-line region growing over the gradient grid, rectangle
// approximation by second moments, and a-contrario validation with the
// binomial tail over the enclosing rectangle.
std::vector<LineSupportRegion> detect_line_segments(const GradientField& field,
                                                    const LsdOptions& opts = {});

// Assigns each edge point to the region containing its anchor cell (at most
// one), drops unassigned points, and orders every chain by projection onto
// its region axis. Chains with fewer than two points are dropped.
std::vector<EdgeChain> assign_edges_to_regions(
    const std::vector<SubpixelEdgePoint>& points,
    const std::vector<LineSupportRegion>& regions);

// Concatenates chains that continue one another: orientations agree within
// angle_tolerance, the axis gap between them is at most gap_tolerance, and
// the perpendicular offset at most offset_tolerance. Merging is transitive
// and runs to a fixed point, so merging the output again changes nothing.
std::vector<EdgeChain> merge_chains(const std::vector<EdgeChain>& chains,
                                    const MergeOptions& opts = {});

}  // namespace harp
