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

#include "harp/chain_resample.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "harp/error.hpp"
#include "harp/straightness.hpp"

namespace harp {

namespace {

// Mirror (whole-sample symmetric) index extension into [0, n-1].
int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * half + 1);
  double sum = 0.0;
  for (int i = -half; i <= half; ++i) {
    const double v = std::exp(-0.5 * (i / sigma) * (i / sigma));
    k[i + half] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;  // unit DC gain keeps straight chains straight
  return k;
}

std::string fmt15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace

ResampledChain resample_polyline(std::span<const Vec2> points,
                                 int origin_chain) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw DegenerateError("resample needs at least 2 points");

  std::vector<double> arc(n, 0.0);
  for (int i = 1; i < n; ++i)
    arc[i] = arc[i - 1] + distance(points[i - 1], points[i]);
  const double length = arc[n - 1];
  if (length <= 0.0) throw DegenerateError("zero-length chain");

  const double step = length / n;
  ResampledChain out;
  out.step = step;
  out.subsample_factor = 1;
  out.origin_chain = origin_chain;
  out.points.reserve(n + 1);

  int seg = 0;
  for (int k = 0; k <= n; ++k) {
    if (k == n) {
      out.points.push_back(points[n - 1]);  // keep the exact endpoint
      break;
    }
    const double target = std::min(k * step, length);
    while (seg < n - 2 && arc[seg + 1] < target) ++seg;
    const double seg_len = arc[seg + 1] - arc[seg];
    const double t = seg_len > 0.0 ? (target - arc[seg]) / seg_len : 0.0;
    out.points.push_back(points[seg] + t * (points[seg + 1] - points[seg]));
  }
  return out;
}

ResampledChain resample_chain(const EdgeChain& chain) {
  std::vector<Vec2> pts;
  pts.reserve(chain.points.size());
  for (const auto& p : chain.points) pts.push_back({p.x, p.y});
  return resample_polyline(pts, chain.source_region);
}

ResampledChain smooth_subsample(const ResampledChain& chain, int t) {
  if (t < 1) throw ParameterError("subsample factor must be >= 1");
  if (t == 1) return chain;

  const int n = static_cast<int>(chain.points.size());
  if (n < 2) throw DegenerateError("smooth_subsample needs at least 2 points");

  const double sigma = 0.8 * std::sqrt(static_cast<double>(t) * t - 1.0);
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int half = static_cast<int>(kernel.size() / 2);

  ResampledChain out;
  out.step = chain.step * t;
  out.subsample_factor = t;
  out.origin_chain = chain.origin_chain;
  for (int j = 0; j < n; j += t) {
    Vec2 acc{0.0, 0.0};
    for (int k = -half; k <= half; ++k) {
      const Vec2 p = chain.points[mirror_index(j + k, n)];
      acc = acc + kernel[k + half] * p;
    }
    out.points.push_back(acc);
  }
  return out;
}

IntrinsicSignal intrinsic_coordinates(std::span<const Vec2> points) {
  if (points.size() < 2)
    throw DegenerateError("intrinsic coordinates need at least 2 points");
  auto [line, stats] = fit_regression_line(points);

  Vec2 dir{std::cos(line.theta), -std::sin(line.theta)};
  const Vec2 centroid{stats.ax, stats.ay};
  // Reference endpoint: the chain end with the smaller projection.
  const double u_front = dot(points.front() - centroid, dir);
  const double u_back = dot(points.back() - centroid, dir);
  if (u_front > u_back) dir = -1.0 * dir;

  struct Sample {
    double s, v;
  };
  std::vector<Sample> samples;
  samples.reserve(points.size());
  for (const Vec2& p : points) {
    samples.push_back({dot(p - centroid, dir),
                       line.alpha * p.x + line.beta * p.y - line.gamma});
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.s < b.s; });

  IntrinsicSignal sig;
  sig.s.reserve(samples.size());
  sig.v.reserve(samples.size());
  const double s0 = samples.front().s;
  for (const Sample& smp : samples) {
    if (!sig.s.empty() && smp.s - s0 <= sig.s.back()) {
      // Collapse coincident arc positions so s stays strictly increasing.
      sig.v.back() = 0.5 * (sig.v.back() + smp.v);
      continue;
    }
    sig.s.push_back(smp.s - s0);
    sig.v.push_back(smp.v);
  }
  return sig;
}

IntrinsicSignal high_frequency_component(std::span<const Vec2> points,
                                         double sigma) {
  IntrinsicSignal sig = intrinsic_coordinates(points);
  const int n = static_cast<int>(sig.s.size());
  if (n < 2) throw DegenerateError("degenerate chain in high-frequency diagnostic");

  // Gaussian over arc length at the exact (irregular) sample positions,
  // mirror-extended at both ends and renormalized to unit weight.
  const double reach = 4.0 * sigma;
  const double span = sig.s.back();
  std::vector<double> smooth(n, 0.0);
  auto weight = [&](double ds) { return std::exp(-0.5 * (ds / sigma) * (ds / sigma)); };

  for (int i = 0; i < n; ++i) {
    const double si = sig.s[i];
    double acc = 0.0, wsum = 0.0;
    for (int j = 0; j < n; ++j) {
      // Main sample plus its mirror images about both endpoints; the
      // endpoints themselves are not duplicated.
      double positions[3];
      int count = 0;
      positions[count++] = sig.s[j];
      if (j > 0) positions[count++] = -sig.s[j];
      if (j < n - 1) positions[count++] = 2.0 * span - sig.s[j];
      for (int c = 0; c < count; ++c) {
        const double ds = si - positions[c];
        if (std::fabs(ds) > reach) continue;
        const double w = weight(ds);
        acc += w * sig.v[j];
        wsum += w;
      }
    }
    smooth[i] = wsum > 0.0 ? acc / wsum : sig.v[i];
  }

  IntrinsicSignal out;
  out.s = sig.s;
  out.v.resize(n);
  for (int i = 0; i < n; ++i) out.v[i] = sig.v[i] - smooth[i];
  return out;
}

IntrinsicSignal high_frequency_component(const EdgeChain& chain, double sigma) {
  std::vector<Vec2> pts;
  pts.reserve(chain.points.size());
  for (const auto& p : chain.points) pts.push_back({p.x, p.y});
  return high_frequency_component(pts, sigma);
}

void write_chains(std::ostream& out,
                  const std::vector<std::vector<Vec2>>& chains) {
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (i > 0) out << "\n";
    out << "# chain " << i << " " << chains[i].size() << "\n";
    for (const Vec2& p : chains[i])
      out << fmt15(p.x) << " " << fmt15(p.y) << "\n";
  }
}

void write_chains_file(const std::string& path,
                       const std::vector<std::vector<Vec2>>& chains) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_chains(out, chains);
  if (!out) throw IoError("write failed for " + path);
}

std::vector<std::vector<Vec2>> read_chains(std::istream& in) {
  std::vector<std::vector<Vec2>> chains;
  std::string word;
  while (in >> word) {
    if (word == "#") {
      std::string tag;
      long id = 0;
      std::size_t count = 0;
      if (!(in >> tag >> id >> count) || tag != "chain")
        throw FormatError("malformed chain header");
      std::vector<Vec2> chain;
      chain.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        Vec2 p;
        if (!(in >> p.x >> p.y))
          throw FormatError("truncated chain block (id " + std::to_string(id) + ")");
        chain.push_back(p);
      }
      chains.push_back(std::move(chain));
    } else {
      throw FormatError("unexpected token '" + word + "' in chain file");
    }
  }
  return chains;
}

std::vector<std::vector<Vec2>> read_chains_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_chains(in);
}

}  // namespace harp
