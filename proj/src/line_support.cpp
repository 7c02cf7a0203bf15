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

#include "harp/line_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "harp/error.hpp"
#include "harp/geometry.hpp"
#include "harp/straightness.hpp"

namespace harp {

namespace {

struct GridPoint {
  int x, y;
};

// Rectangle candidate in gradient-grid coordinates, endpoints on the axis.
struct Rect {
  double x1, y1, x2, y2;
  double width;
  double cx, cy;
  double theta;
  double dx, dy;  // (cos theta, sin theta)
  double prec;    // angle tolerance
  double p;       // alignment probability = prec / pi
};

double angle_diff_signed(double a, double b) {
  double d = a - b;
  while (d <= -M_PI) d += 2.0 * M_PI;
  while (d > M_PI) d -= 2.0 * M_PI;
  return d;
}

double angle_diff_abs(double a, double b) {
  return std::fabs(angle_diff_signed(a, b));
}

// Level-line angles are compared as directions mod 2*pi.
bool is_aligned(double angle, double theta, double prec) {
  double t = std::fabs(theta - angle);
  if (t > 1.5 * M_PI) t = std::fabs(t - 2.0 * M_PI);
  return t <= prec;
}

// log10 of the binomial upper tail P[B(n, p) >= k], by the multiplicative
// term recursion with an early stop once the truncation error is negligible.
double log10_binomial_tail(int n, int k, double p) {
  if (k <= 0) return 0.0;
  if (n <= 0 || k > n) return -1e300;
  if (n == k) return n * std::log10(p);

  const double p_term = p / (1.0 - p);
  const double log1term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                          std::lgamma(n - k + 1.0) + k * std::log(p) +
                          (n - k) * std::log(1.0 - p);
  double term = std::exp(log1term);
  if (term == 0.0) {
    // Tail dominated by the first term, or indistinguishable from 1.
    if (k > n * p) return log1term / std::log(10.0);
    return 0.0;
  }

  double tail = term;
  for (int i = k + 1; i <= n; ++i) {
    const double bin_term = static_cast<double>(n - i + 1) / i;
    const double mult = bin_term * p_term;
    term *= mult;
    tail += term;
    if (bin_term < 1.0 && mult < 1.0) {
      const double err =
          term * ((1.0 - std::pow(mult, static_cast<double>(n - i + 1))) /
                      (1.0 - mult) -
                  1.0);
      if (err < 1e-10 * tail) break;
    }
  }
  return std::log10(tail);
}

// Enumerates integer grid cells inside the closed rectangle.
template <typename Fn>
void for_each_rect_cell(const Rect& r, int gw, int gh, Fn&& fn) {
  const double half_len =
      0.5 * std::hypot(r.x2 - r.x1, r.y2 - r.y1);
  const double half_wid = 0.5 * r.width;
  const double cx = 0.5 * (r.x1 + r.x2);
  const double cy = 0.5 * (r.y1 + r.y2);

  const double ex = half_len * std::fabs(r.dx) + half_wid * std::fabs(r.dy);
  const int x_lo = std::max(0, static_cast<int>(std::ceil(cx - ex)));
  const int x_hi = std::min(gw - 1, static_cast<int>(std::floor(cx + ex)));

  for (int x = x_lo; x <= x_hi; ++x) {
    const double u = x - cx;
    // Intersect the two slab constraints, solved for v = y - cy:
    //   dx*u + dy*v in [-half_len, half_len]
    //  -dy*u + dx*v in [-half_wid, half_wid]
    double v_lo = -1e300, v_hi = 1e300;
    const struct {
      double a, b, half;
    } slabs[2] = {{r.dx, r.dy, half_len}, {-r.dy, r.dx, half_wid}};
    bool empty = false;
    for (const auto& s : slabs) {
      if (std::fabs(s.b) > 1e-12) {
        double lo = (-s.half - s.a * u) / s.b;
        double hi = (s.half - s.a * u) / s.b;
        if (lo > hi) std::swap(lo, hi);
        v_lo = std::max(v_lo, lo);
        v_hi = std::min(v_hi, hi);
      } else if (std::fabs(s.a * u) > s.half) {
        empty = true;
      }
    }
    if (empty || v_lo > v_hi) continue;
    const int y_lo = std::max(0, static_cast<int>(std::ceil(cy + v_lo)));
    const int y_hi = std::min(gh - 1, static_cast<int>(std::floor(cy + v_hi)));
    for (int y = y_lo; y <= y_hi; ++y) fn(x, y);
  }
}

double rect_log_nfa(const Rect& r, const GradientField& field,
                    const std::vector<char>& usable, double log_nt) {
  int total = 0, aligned = 0;
  for_each_rect_cell(r, field.width, field.height, [&](int x, int y) {
    ++total;
    const std::size_t k = field.idx(x, y);
    if (usable[k] && is_aligned(field.angle[k], r.theta, r.prec)) ++aligned;
  });
  return log_nt + log10_binomial_tail(total, aligned, r.p);
}

void region_grow(int seed_x, int seed_y, const GradientField& field,
                 const std::vector<char>& usable, std::vector<char>& used,
                 double prec, std::vector<GridPoint>& region,
                 double& region_angle) {
  region.clear();
  region.push_back({seed_x, seed_y});
  region_angle = field.angle[field.idx(seed_x, seed_y)];
  double sum_dx = std::cos(region_angle);
  double sum_dy = std::sin(region_angle);
  used[field.idx(seed_x, seed_y)] = 1;

  for (std::size_t i = 0; i < region.size(); ++i) {
    const GridPoint p = region[i];
    for (int yy = p.y - 1; yy <= p.y + 1; ++yy) {
      for (int xx = p.x - 1; xx <= p.x + 1; ++xx) {
        if (xx < 0 || yy < 0 || xx >= field.width || yy >= field.height)
          continue;
        const std::size_t k = field.idx(xx, yy);
        if (used[k] || !usable[k]) continue;
        if (!is_aligned(field.angle[k], region_angle, prec)) continue;
        used[k] = 1;
        region.push_back({xx, yy});
        sum_dx += std::cos(field.angle[k]);
        sum_dy += std::sin(field.angle[k]);
        region_angle = std::atan2(sum_dy, sum_dx);
      }
    }
  }
}

// Axis angle of the region from the gradient-weighted inertia matrix,
// flipped if needed to stay within prec of the region's level-line angle.
double region_axis_angle(const std::vector<GridPoint>& region,
                         const GradientField& field, double cx, double cy,
                         double region_angle, double prec) {
  double ixx = 0.0, iyy = 0.0, ixy = 0.0;
  for (const GridPoint& p : region) {
    const double w = field.magnitude[field.idx(p.x, p.y)];
    ixx += (p.y - cy) * (p.y - cy) * w;
    iyy += (p.x - cx) * (p.x - cx) * w;
    ixy -= (p.x - cx) * (p.y - cy) * w;
  }
  const double lambda =
      0.5 * (ixx + iyy - std::sqrt((ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy));
  double theta = std::fabs(ixx) > std::fabs(iyy)
                     ? std::atan2(lambda - ixx, ixy)
                     : std::atan2(ixy, lambda - iyy);
  if (angle_diff_abs(theta, region_angle) > prec) theta += M_PI;
  return wrap_angle(theta);
}

Rect region_to_rect(const std::vector<GridPoint>& region,
                    const GradientField& field, double region_angle,
                    double prec, double p) {
  double cx = 0.0, cy = 0.0, sum = 0.0;
  for (const GridPoint& q : region) {
    const double w = field.magnitude[field.idx(q.x, q.y)];
    cx += q.x * w;
    cy += q.y * w;
    sum += w;
  }
  cx /= sum;
  cy /= sum;

  const double theta = region_axis_angle(region, field, cx, cy, region_angle, prec);
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);

  double l_min = 0.0, l_max = 0.0, w_min = 0.0, w_max = 0.0;
  for (const GridPoint& q : region) {
    const double l = (q.x - cx) * dx + (q.y - cy) * dy;
    const double w = -(q.x - cx) * dy + (q.y - cy) * dx;
    l_min = std::min(l_min, l);
    l_max = std::max(l_max, l);
    w_min = std::min(w_min, w);
    w_max = std::max(w_max, w);
  }

  Rect r;
  r.x1 = cx + l_min * dx;
  r.y1 = cy + l_min * dy;
  r.x2 = cx + l_max * dx;
  r.y2 = cy + l_max * dy;
  r.width = std::max(w_max - w_min, 1.0);
  r.cx = cx;
  r.cy = cy;
  r.theta = theta;
  r.dx = dx;
  r.dy = dy;
  r.prec = prec;
  r.p = p;
  return r;
}

double region_density(const std::vector<GridPoint>& region, const Rect& r) {
  const double len = std::hypot(r.x2 - r.x1, r.y2 - r.y1);
  if (len * r.width <= 0.0) return 0.0;
  return static_cast<double>(region.size()) / (len * r.width);
}

bool reduce_region_radius(std::vector<GridPoint>& region,
                          const GradientField& field, std::vector<char>& used,
                          double region_angle, double prec, double p,
                          Rect& rect, double density_threshold) {
  const double xc = region[0].x;
  const double yc = region[0].y;
  double rad = std::max(std::hypot(xc - rect.x1, yc - rect.y1),
                        std::hypot(xc - rect.x2, yc - rect.y2));
  double density = region_density(region, rect);

  while (density < density_threshold) {
    rad *= 0.75;
    for (std::size_t i = 0; i < region.size();) {
      if (std::hypot(xc - region[i].x, yc - region[i].y) > rad) {
        used[field.idx(region[i].x, region[i].y)] = 0;
        region[i] = region.back();
        region.pop_back();
      } else {
        ++i;
      }
    }
    if (region.size() < 2) return false;
    rect = region_to_rect(region, field, region_angle, prec, p);
    density = region_density(region, rect);
  }
  return true;
}

// When the aligned-cell density is low the region mixes two structures:
// retry with a tolerance estimated from the angle spread near the seed,
// then shrink the radius as a last resort.
bool refine_region(std::vector<GridPoint>& region, const GradientField& field,
                   const std::vector<char>& usable, std::vector<char>& used,
                   double& region_angle, double prec, double p, Rect& rect,
                   double density_threshold) {
  double density = region_density(region, rect);
  if (density >= density_threshold) return true;

  const int seed_x = region[0].x;
  const int seed_y = region[0].y;
  const double seed_angle = field.angle[field.idx(seed_x, seed_y)];
  double sum = 0.0, s_sum = 0.0;
  int n = 0;
  for (const GridPoint& q : region) {
    used[field.idx(q.x, q.y)] = 0;
    if (std::hypot(seed_x - static_cast<double>(q.x),
                   seed_y - static_cast<double>(q.y)) < rect.width) {
      const double d = angle_diff_signed(field.angle[field.idx(q.x, q.y)],
                                         seed_angle);
      sum += d;
      s_sum += d * d;
      ++n;
    }
  }
  if (n == 0) return false;
  const double mean = sum / n;
  const double tau =
      2.0 * std::sqrt(std::max(0.0, (s_sum - 2.0 * mean * sum) / n + mean * mean));

  region_grow(seed_x, seed_y, field, usable, used, tau, region, region_angle);
  if (region.size() < 2) return false;
  rect = region_to_rect(region, field, region_angle, prec, p);
  density = region_density(region, rect);

  if (density < density_threshold)
    return reduce_region_radius(region, field, used, region_angle, prec, p,
                                rect, density_threshold);
  return true;
}

// Tries the rectangle as is, then at finer angle precisions and reduced
// widths/sides, keeping the variant with the lowest log10(NFA).
double rect_improve(Rect& rect, const GradientField& field,
                    const std::vector<char>& usable, double log_nt,
                    double max_log_nfa) {
  constexpr double kDelta = 0.5;
  double log_nfa = rect_log_nfa(rect, field, usable, log_nt);
  if (log_nfa <= max_log_nfa) return log_nfa;

  Rect r = rect;
  for (int i = 0; i < 5; ++i) {  // finer precision
    r.p /= 2.0;
    r.prec = r.p * M_PI;
    const double v = rect_log_nfa(r, field, usable, log_nt);
    if (v < log_nfa) {
      log_nfa = v;
      rect = r;
    }
  }
  if (log_nfa <= max_log_nfa) return log_nfa;

  r = rect;
  for (int i = 0; i < 5; ++i) {  // thinner rectangle
    if (r.width - kDelta < 0.5) break;
    r.width -= kDelta;
    const double v = rect_log_nfa(r, field, usable, log_nt);
    if (v < log_nfa) {
      log_nfa = v;
      rect = r;
    }
  }
  if (log_nfa <= max_log_nfa) return log_nfa;

  r = rect;
  for (int i = 0; i < 5; ++i) {  // trim one side
    if (r.width - kDelta < 0.5) break;
    r.x1 += -r.dy * kDelta / 2.0;
    r.y1 += r.dx * kDelta / 2.0;
    r.x2 += -r.dy * kDelta / 2.0;
    r.y2 += r.dx * kDelta / 2.0;
    r.width -= kDelta;
    const double v = rect_log_nfa(r, field, usable, log_nt);
    if (v < log_nfa) {
      log_nfa = v;
      rect = r;
    }
  }
  if (log_nfa <= max_log_nfa) return log_nfa;

  r = rect;
  for (int i = 0; i < 5; ++i) {  // trim the other side
    if (r.width - kDelta < 0.5) break;
    r.x1 -= -r.dy * kDelta / 2.0;
    r.y1 -= r.dx * kDelta / 2.0;
    r.x2 -= -r.dy * kDelta / 2.0;
    r.y2 -= r.dx * kDelta / 2.0;
    r.width -= kDelta;
    const double v = rect_log_nfa(r, field, usable, log_nt);
    if (v < log_nfa) {
      log_nfa = v;
      rect = r;
    }
  }
  if (log_nfa <= max_log_nfa) return log_nfa;

  r = rect;
  for (int i = 0; i < 5; ++i) {  // even finer precision
    r.p /= 2.0;
    r.prec = r.p * M_PI;
    const double v = rect_log_nfa(r, field, usable, log_nt);
    if (v < log_nfa) {
      log_nfa = v;
      rect = r;
    }
  }
  return log_nfa;
}

}  // namespace

std::vector<LineSupportRegion> detect_line_segments(const GradientField& field,
                                                    const LsdOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(field.width) * field.height;
  if (n == 0) return {};

  const double prec = opts.angle_tolerance;
  const double p = prec / M_PI;
  const double rho = opts.quantization / std::sin(prec);

  std::vector<char> usable(n);
  for (std::size_t k = 0; k < n; ++k) usable[k] = field.magnitude[k] > rho;

  // Number of tests: (W*H)^(5/2) rectangle candidates times the 11 variants
  // tried per rectangle during refinement.
  const double log_nt =
      2.5 * std::log10(static_cast<double>(field.width) * field.height) +
      std::log10(11.0);
  const std::size_t min_region_size = static_cast<std::size_t>(
      std::max(0.0, -log_nt / std::log10(p)));

  // Seeds in order of decreasing gradient magnitude.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field.magnitude[a] > field.magnitude[b];
  });

  std::vector<char> used(n, 0);
  std::vector<GridPoint> region;
  std::vector<LineSupportRegion> out;

  for (std::size_t seed : order) {
    if (used[seed] || !usable[seed]) continue;
    const int sx = static_cast<int>(seed % field.width);
    const int sy = static_cast<int>(seed / field.width);

    double region_angle = 0.0;
    region_grow(sx, sy, field, usable, used, prec, region, region_angle);
    if (region.size() < min_region_size) continue;

    Rect rect = region_to_rect(region, field, region_angle, prec, p);
    if (!refine_region(region, field, usable, used, region_angle, prec, p,
                       rect, opts.density_threshold))
      continue;

    const double log_nfa =
        rect_improve(rect, field, usable, log_nt, opts.max_log_nfa);
    if (log_nfa > opts.max_log_nfa) continue;

    LineSupportRegion lsr;
    lsr.pixels.reserve(region.size());
    for (const GridPoint& q : region) lsr.pixels.emplace_back(q.x, q.y);
    lsr.mean_angle = region_angle;
    lsr.rect.cx = 0.5 * (rect.x1 + rect.x2) + GradientField::kGridOffset;
    lsr.rect.cy = 0.5 * (rect.y1 + rect.y2) + GradientField::kGridOffset;
    lsr.rect.theta = rect.theta;
    lsr.rect.length = std::hypot(rect.x2 - rect.x1, rect.y2 - rect.y1);
    lsr.rect.width = rect.width;
    lsr.nfa_log10 = log_nfa;
    out.push_back(std::move(lsr));
  }
  return out;
}

std::vector<EdgeChain> assign_edges_to_regions(
    const std::vector<SubpixelEdgePoint>& points,
    const std::vector<LineSupportRegion>& regions) {
  std::unordered_map<long long, int> cell_to_region;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    for (const auto& [x, y] : regions[r].pixels) {
      const long long key = (static_cast<long long>(y) << 32) |
                            static_cast<unsigned>(x);
      cell_to_region.emplace(key, static_cast<int>(r));
    }
  }

  std::vector<EdgeChain> chains(regions.size());
  for (const SubpixelEdgePoint& pt : points) {
    const long long key = (static_cast<long long>(pt.anchor_y) << 32) |
                          static_cast<unsigned>(pt.anchor_x);
    const auto it = cell_to_region.find(key);
    if (it == cell_to_region.end()) continue;
    chains[it->second].points.push_back(pt);
  }

  std::vector<EdgeChain> out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    EdgeChain& c = chains[r];
    if (c.points.size() < 2) continue;
    const double dx = std::cos(regions[r].rect.theta);
    const double dy = std::sin(regions[r].rect.theta);
    std::stable_sort(c.points.begin(), c.points.end(),
                     [&](const SubpixelEdgePoint& a, const SubpixelEdgePoint& b) {
                       return a.x * dx + a.y * dy < b.x * dx + b.y * dy;
                     });
    c.source_region = static_cast<int>(r);
    // Side of the string: orientation of the level lines along the axis.
    c.side = std::cos(regions[r].mean_angle - regions[r].rect.theta) >= 0.0 ? 0 : 1;
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

struct ChainSummary {
  RegressionLine line;
  Vec2 centroid;
  Vec2 dir;          // unit direction along the fitted line
  double lo, hi;     // projection extent of the points onto dir
};

ChainSummary summarize(const EdgeChain& chain) {
  std::vector<Vec2> pts;
  pts.reserve(chain.points.size());
  for (const auto& p : chain.points) pts.push_back({p.x, p.y});
  auto [line, stats] = fit_regression_line(pts);
  ChainSummary s;
  s.line = line;
  s.centroid = {stats.ax, stats.ay};
  s.dir = {std::cos(line.theta), -std::sin(line.theta)};
  s.lo = 1e300;
  s.hi = -1e300;
  for (const Vec2& p : pts) {
    const double t = dot(p - s.centroid, s.dir);
    s.lo = std::min(s.lo, t);
    s.hi = std::max(s.hi, t);
  }
  return s;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

bool mergeable(const ChainSummary& a, const ChainSummary& b,
               const MergeOptions& opts) {
  // Orientation difference mod pi.
  double dt = std::remainder(a.line.theta - b.line.theta, M_PI);
  if (std::fabs(dt) > opts.angle_tolerance) return false;

  // Perpendicular offset: each centroid against the other line.
  const double off_a = std::fabs(a.line.alpha * b.centroid.x +
                                 a.line.beta * b.centroid.y - a.line.gamma);
  const double off_b = std::fabs(b.line.alpha * a.centroid.x +
                                 b.line.beta * a.centroid.y - b.line.gamma);
  if (std::max(off_a, off_b) > opts.offset_tolerance) return false;

  // Gap along a shared axis through the midpoint of the two centroids.
  Vec2 u = a.dir;
  if (dot(u, b.dir) < 0.0) u = -1.0 * u;
  u = normalized(u + b.dir);
  const Vec2 origin = 0.5 * (a.centroid + b.centroid);
  const double a_lo = dot(a.centroid - origin, u) + a.lo;
  const double a_hi = dot(a.centroid - origin, u) + a.hi;
  const double b_lo = dot(b.centroid - origin, u) + b.lo;
  const double b_hi = dot(b.centroid - origin, u) + b.hi;
  const double gap = std::max(b_lo - a_hi, a_lo - b_hi);
  return gap <= opts.gap_tolerance;
}

}  // namespace

std::vector<EdgeChain> merge_chains(const std::vector<EdgeChain>& chains,
                                    const MergeOptions& opts) {
  std::vector<EdgeChain> current = chains;

  // Iterate to a fixed point so that re-merging the output is a no-op.
  for (;;) {
    const int n = static_cast<int>(current.size());
    if (n < 2) break;

    std::vector<ChainSummary> summaries;
    summaries.reserve(n);
    for (const EdgeChain& c : current) summaries.push_back(summarize(c));

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    bool merged_any = false;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (mergeable(summaries[i], summaries[j], opts)) {
          const int ri = find_root(parent, i);
          const int rj = find_root(parent, j);
          if (ri != rj) {
            parent[std::max(ri, rj)] = std::min(ri, rj);
            merged_any = true;
          }
        }
      }
    }
    if (!merged_any) break;

    std::vector<EdgeChain> next;
    std::vector<int> group_of(n, -1);
    for (int i = 0; i < n; ++i) {
      const int root = find_root(parent, i);
      if (group_of[root] < 0) {
        group_of[root] = static_cast<int>(next.size());
        next.push_back(EdgeChain{});
        next.back().source_region = current[i].source_region;
        next.back().side = current[i].side;
      }
      EdgeChain& g = next[group_of[root]];
      g.points.insert(g.points.end(), current[i].points.begin(),
                      current[i].points.end());
    }

    for (EdgeChain& g : next) {
      std::vector<Vec2> pts;
      pts.reserve(g.points.size());
      for (const auto& p : g.points) pts.push_back({p.x, p.y});
      auto [line, stats] = fit_regression_line(pts);
      const double dx = std::cos(line.theta);
      const double dy = -std::sin(line.theta);
      (void)stats;
      std::stable_sort(g.points.begin(), g.points.end(),
                       [&](const SubpixelEdgePoint& a, const SubpixelEdgePoint& b) {
                         return a.x * dx + a.y * dy < b.x * dx + b.y * dy;
                       });
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace harp
