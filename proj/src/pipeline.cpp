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

#include "harp/pipeline.hpp"

#include <algorithm>

#include "harp/subpixel_edges.hpp"

namespace harp {

namespace {

bool confined_to_border(const EdgeChain& chain, int width, int height,
                        double margin) {
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& p : chain.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  return max_x < margin || min_x > width - 1.0 - margin || max_y < margin ||
         min_y > height - 1.0 - margin;
}

}  // namespace

std::vector<std::vector<Vec2>> extract_chains(const GrayImage& img,
                                              const ExtractOptions& opts) {
  const GrayImage smoothed_img = gaussian_blur(img, opts.pre_blur_sigma);
  const GradientField field = compute_gradient(smoothed_img);
  const auto points = detect_edges(field, opts.edge_threshold);
  const auto regions = detect_line_segments(field, opts.lsd);
  auto chains = assign_edges_to_regions(points, regions);
  chains = merge_chains(chains, opts.merge);

  std::vector<std::vector<Vec2>> out;
  out.reserve(chains.size());
  const double trim = opts.border_trim;
  for (EdgeChain chain : chains) {
    if (opts.border_margin > 0.0 &&
        confined_to_border(chain, img.width, img.height, opts.border_margin))
      continue;
    if (trim > 0.0) {
      std::erase_if(chain.points, [&](const SubpixelEdgePoint& p) {
        return p.x < trim || p.x > img.width - 1.0 - trim || p.y < trim ||
               p.y > img.height - 1.0 - trim;
      });
    }
    if (chain.points.size() < 2) continue;
    const ResampledChain uniform = resample_chain(chain);
    const ResampledChain smoothed =
        smooth_subsample(uniform, opts.subsample_factor);
    if (smoothed.points.size() >= opts.min_chain_points)
      out.push_back(smoothed.points);
  }
  return out;
}

}  // namespace harp
