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

#include "harp/plumbline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "harp/error.hpp"
#include "harp/straightness.hpp"

namespace harp {

namespace {

constexpr double kLmStep = 1e-6;           // forward-difference step
constexpr double kLmEnergyTol = 1e-12;     // relative decrease
constexpr double kLmGradientTol = 1e-10;   // infinity norm
constexpr int kLmMaxIterations = 500;
constexpr double kPairTolerance = 1e-14;   // simplex relative f spread
constexpr int kMaxSweeps = 100;
constexpr double kSweepTolerance = 1e-12;  // relative decrease per sweep

double apply_factor(const std::vector<double>& k, double rho) {
  double f = 0.0;
  for (auto it = k.rbegin(); it != k.rend(); ++it) f = f * rho + *it;
  return f;
}

// Correction applied without model validation; the optimizers probe
// parameter values that a constructed model would reject.
Vec2 raw_correct(Vec2 p, Vec2 center, const std::vector<double>& k,
                 double radius_scale) {
  const Vec2 d = p - center;
  const double rho = norm(d) / radius_scale;
  return center + apply_factor(k, rho) * d;
}

// Geometric energy of a raw parameter vector; infinity when a corrected
// chain degenerates, so a trial step is simply rejected.
double raw_energy_D(const std::vector<std::vector<Vec2>>& chains, Vec2 center,
                    const std::vector<double>& k, double radius_scale) {
  double energy = 0.0;
  std::vector<Vec2> corrected;
  for (const auto& chain : chains) {
    corrected.clear();
    corrected.reserve(chain.size());
    for (Vec2 p : chain)
      corrected.push_back(raw_correct(p, center, k, radius_scale));
    try {
      auto [line, stats] = fit_regression_line(corrected);
      (void)stats;
      double sq = 0.0;
      for (const Vec2& p : corrected) {
        const double s = line.alpha * p.x + line.beta * p.y - line.gamma;
        sq += s * s;
      }
      energy += sq / chain.size();
    } catch (const DegenerateError&) {
      return std::numeric_limits<double>::infinity();
    }
  }
  return energy / chains.size();
}

void append_residuals(const std::vector<std::vector<Vec2>>& chains,
                      Vec2 center, const std::vector<double>& k,
                      double radius_scale, Eigen::VectorXd& r) {
  const double line_count = static_cast<double>(chains.size());
  std::vector<Vec2> corrected;
  int row = 0;
  for (const auto& chain : chains) {
    corrected.clear();
    corrected.reserve(chain.size());
    for (Vec2 p : chain)
      corrected.push_back(raw_correct(p, center, k, radius_scale));
    auto [line, stats] = fit_regression_line(corrected);
    (void)stats;
    const double scale = 1.0 / std::sqrt(line_count * chain.size());
    for (const Vec2& p : corrected)
      r(row++) = (line.alpha * p.x + line.beta * p.y - line.gamma) * scale;
  }
}

void validate_problem(const CalibrationProblem& problem,
                      std::vector<std::string>* warnings) {
  if (problem.chains.empty())
    throw ParameterError("calibration needs at least one chain");
  if (problem.model_order < 0)
    throw ParameterError("model order must be non-negative");
  const std::size_t min_points = 2 * (problem.model_order + 1);
  for (std::size_t l = 0; l < problem.chains.size(); ++l) {
    if (problem.chains[l].size() < min_points)
      throw ParameterError("chain " + std::to_string(l) + " has fewer than " +
                           std::to_string(min_points) + " points");
  }

  // Few chains or few orientations make the fit poorly constrained.
  if (warnings) {
    std::vector<double> thetas;
    for (const auto& chain : problem.chains) {
      auto [line, stats] = fit_regression_line(chain);
      (void)stats;
      double t = std::remainder(line.theta, M_PI);
      bool found = false;
      for (double seen : thetas)
        if (std::fabs(std::remainder(t - seen, M_PI)) < 10.0 * M_PI / 180.0)
          found = true;
      if (!found) thetas.push_back(t);
    }
    if (problem.chains.size() < 3 || thetas.size() < 3)
      warnings->push_back(
          "fewer than 3 chains or distinct orientations; the estimate may be "
          "poorly constrained");
  }
}

// Nelder-Mead over n = 1 or 2 variables; returns the best vertex ever seen,
// so a pair step never increases the objective.
double nelder_mead(const std::function<double(const double*)>& f, double* x,
                   int n, double step, double ftol_rel, int max_evals) {
  const int m = n + 1;
  std::vector<std::vector<double>> v(m, std::vector<double>(n));
  std::vector<double> fv(m);
  for (int i = 0; i < m; ++i) {
    v[i].assign(x, x + n);
    if (i > 0) v[i][i - 1] += step;
    fv[i] = f(v[i].data());
  }
  int evals = m;

  std::vector<double> best(v[0]);
  double fbest = fv[0];
  auto track = [&](const std::vector<double>& p, double fp) {
    if (fp < fbest) {
      fbest = fp;
      best = p;
    }
  };
  for (int i = 0; i < m; ++i) track(v[i], fv[i]);

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < max_evals) {
    // Order vertices best..worst.
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int lo = idx[0], hi = idx[m - 1], second = idx[m - 2];

    const double spread = std::fabs(fv[hi] - fv[lo]);
    if (spread <= ftol_rel * (std::fabs(fv[lo]) + std::fabs(fv[hi]) + 1e-300))
      break;

    for (int j = 0; j < n; ++j) {
      centroid[j] = 0.0;
      for (int i = 0; i < m; ++i)
        if (i != hi) centroid[j] += v[i][j];
      centroid[j] /= n;
    }

    for (int j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - v[hi][j]);
    double fr = f(xr.data());
    ++evals;
    track(xr, fr);

    if (fr < fv[lo]) {
      for (int j = 0; j < n; ++j)
        xe[j] = centroid[j] + 2.0 * (centroid[j] - v[hi][j]);
      const double fe = f(xe.data());
      ++evals;
      track(xe, fe);
      if (fe < fr) {
        v[hi] = xe;
        fv[hi] = fe;
      } else {
        v[hi] = xr;
        fv[hi] = fr;
      }
    } else if (fr < fv[second]) {
      v[hi] = xr;
      fv[hi] = fr;
    } else {
      for (int j = 0; j < n; ++j)
        xc[j] = centroid[j] + 0.5 * (v[hi][j] - centroid[j]);
      const double fc = f(xc.data());
      ++evals;
      track(xc, fc);
      if (fc < fv[hi]) {
        v[hi] = xc;
        fv[hi] = fc;
      } else {
        for (int i = 0; i < m; ++i) {
          if (i == lo) continue;
          for (int j = 0; j < n; ++j)
            v[i][j] = v[lo][j] + 0.5 * (v[i][j] - v[lo][j]);
          fv[i] = f(v[i].data());
          ++evals;
          track(v[i], fv[i]);
        }
      }
    }
  }

  std::copy(best.begin(), best.end(), x);
  return fbest;
}

}  // namespace

namespace {
CalibrationResult minimize_D_joint(const CalibrationProblem& problem,
                                   const DistortionModel& init, double r0);
}  // namespace

double default_radius_scale(int width, int height) {
  return 0.5 * std::hypot(width - 1.0, height - 1.0);
}

Vec2 image_center(int width, int height) {
  return {0.5 * (width - 1.0), 0.5 * (height - 1.0)};
}

double energy_D(const DistortionModel& model,
                const std::vector<std::vector<Vec2>>& chains) {
  if (chains.empty()) throw ParameterError("energy needs at least one chain");
  double energy = 0.0;
  for (std::size_t l = 0; l < chains.size(); ++l) {
    std::vector<Vec2> corrected;
    corrected.reserve(chains[l].size());
    for (Vec2 p : chains[l]) corrected.push_back(model.correct(p));
    std::pair<RegressionLine, LineFitStats> fit;
    try {
      fit = fit_regression_line(corrected);
    } catch (const DegenerateError& e) {
      throw DegenerateError("chain " + std::to_string(l) + ": " + e.what());
    }
    double sq = 0.0;
    for (const Vec2& p : corrected) {
      const double s =
          fit.first.alpha * p.x + fit.first.beta * p.y - fit.first.gamma;
      sq += s * s;
    }
    energy += sq / chains[l].size();
  }
  return energy / chains.size();
}

CalibrationResult minimize_D(const CalibrationProblem& problem,
                             const DistortionModel& init) {
  CalibrationResult result;
  validate_problem(problem, &result.warnings);

  const double r0 = problem.radius_scale > 0.0
                        ? problem.radius_scale
                        : default_radius_scale(problem.width, problem.height);
  const int order = problem.model_order;
  const bool free_center = problem.center_mode == CenterMode::kFree;

  // A free center from a cold start can drift into the flat far-center
  // valley of the model family. Fit the coefficients at the fixed initial
  // center first and release the center from that basin.
  if (free_center && order >= 1) {
    CalibrationProblem staged = problem;
    staged.center_mode = CenterMode::kFixed;
    const CalibrationResult warm = minimize_D(staged, init);
    CalibrationResult res = minimize_D_joint(problem, warm.model, r0);
    res.warnings = result.warnings;
    res.energy_initial = warm.energy_initial;
    res.iterations += warm.iterations;
    res.energy_history.insert(res.energy_history.begin(),
                              warm.energy_history.begin(),
                              warm.energy_history.end() - 1);
    return res;
  }
  CalibrationResult res = minimize_D_joint(problem, init, r0);
  res.warnings = result.warnings;
  return res;
}

namespace {

CalibrationResult minimize_D_joint(const CalibrationProblem& problem,
                                   const DistortionModel& init, double r0) {
  CalibrationResult result;
  const int order = problem.model_order;
  const bool free_center = problem.center_mode == CenterMode::kFree;

  // Parameter vector in normalized units: k1..kN, then the center / r0.
  const int n_params = order + (free_center ? 2 : 0);
  std::vector<double> k(order + 1, 0.0);
  k[0] = 1.0;
  for (std::size_t i = 1; i < init.coefficients().size() && i <= std::size_t(order); ++i)
    k[i] = init.coefficients()[i];
  Vec2 center = init.center();

  auto unpack = [&](const Eigen::VectorXd& x, std::vector<double>& kk, Vec2& c) {
    kk.assign(order + 1, 0.0);
    kk[0] = 1.0;
    for (int i = 0; i < order; ++i) kk[i + 1] = x(i);
    c = center;
    if (free_center) {
      c.x = x(order) * r0;
      c.y = x(order + 1) * r0;
    }
  };

  Eigen::VectorXd x(std::max(n_params, 1));
  x.setZero();
  for (int i = 0; i < order; ++i) x(i) = k[i + 1];
  if (free_center) {
    x(order) = center.x / r0;
    x(order + 1) = center.y / r0;
  }

  long long total_points = 0;
  for (const auto& chain : problem.chains) total_points += chain.size();

  std::vector<double> kk;
  Vec2 cc;
  auto energy_at = [&](const Eigen::VectorXd& p) {
    unpack(p, kk, cc);
    return raw_energy_D(problem.chains, cc, kk, r0);
  };
  auto residuals_at = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    unpack(p, kk, cc);
    append_residuals(problem.chains, cc, kk, r0, r);
  };

  double energy = energy_at(x);
  if (!std::isfinite(energy))
    throw NumericalError("non-finite energy at the initial model");
  result.energy_initial = energy;
  result.energy_history.push_back(energy);

  if (n_params == 0) {
    // Order-0 family with k0 pinned: nothing to optimize.
    result.energy_final = energy;
    result.converged = true;
    result.model = DistortionModel::create(center, k, r0);
    return result;
  }

  Eigen::VectorXd r(total_points), r_step(total_points);
  Eigen::MatrixXd jac(total_points, n_params);
  double lambda = 1e-3;
  bool converged = false;
  int iterations = 0;

  while (iterations < kLmMaxIterations) {
    residuals_at(x, r);

    for (int p = 0; p < n_params; ++p) {
      Eigen::VectorXd xs = x;
      xs(p) += kLmStep;
      if (!std::isfinite(energy_at(xs))) {
        xs(p) = x(p) - kLmStep;  // probe the other side near a boundary
        if (!std::isfinite(energy_at(xs))) {
          jac.col(p).setZero();
          continue;
        }
      }
      residuals_at(xs, r_step);
      jac.col(p) = (r_step - r) / (xs(p) - x(p));
    }

    const Eigen::VectorXd gradient = jac.transpose() * r;
    if (gradient.lpNorm<Eigen::Infinity>() < kLmGradientTol) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    bool accepted = false;
    bool small_decrease = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int p = 0; p < n_params; ++p)
        damped(p, p) += lambda * std::max(jtj(p, p), 1e-12);
      const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
      const Eigen::VectorXd trial = x + delta;
      const double e_trial = energy_at(trial);
      if (std::isfinite(e_trial) && e_trial < energy) {
        small_decrease =
            (energy - e_trial) / std::max(energy, 1e-300) < kLmEnergyTol;
        x = trial;
        energy = e_trial;
        lambda = std::max(lambda * 0.2, 1e-12);
        accepted = true;
        ++iterations;
        result.energy_history.push_back(energy);
      } else {
        lambda *= 5.0;
        if (lambda > 1e14) break;
      }
    }
    if (!accepted || small_decrease) {
      // Either no descent direction remains at maximal damping or the
      // energy has stopped moving: treat both as convergence.
      converged = true;
      break;
    }
  }

  unpack(x, k, center);
  result.energy_final = energy;
  result.iterations = iterations;
  result.converged = converged;
  auto model = DistortionModel::try_create(center, k, r0);
  if (!model)
    throw NumericalError(
        "optimizer ended on an invalid model (non-positive or non-monotone "
        "correction); last energy " +
        std::to_string(energy));
  result.model = *model;
  return result;
}

}  // namespace

double energy_E(std::span<const double> k,
                const std::vector<std::vector<Vec2>>& chains, Vec2 center,
                double radius_scale) {
  if (chains.empty()) throw ParameterError("energy needs at least one chain");
  const std::vector<double> kv(k.begin(), k.end());
  double energy = 0.0;
  for (const auto& chain : chains) {
    const double n = static_cast<double>(chain.size());
    double sx = 0.0, sy = 0.0;
    std::vector<Vec2> corrected;
    corrected.reserve(chain.size());
    for (Vec2 p : chain) {
      const Vec2 u = raw_correct(p, center, kv, radius_scale);
      corrected.push_back(u);
      sx += u.x;
      sy += u.y;
    }
    sx /= n;
    sy /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const Vec2& u : corrected) {
      sxx += (u.x - sx) * (u.x - sx);
      sxy += (u.x - sx) * (u.y - sy);
      syy += (u.y - sy) * (u.y - sy);
    }
    sxx /= n;
    sxy /= n;
    syy /= n;
    energy += sxx * syy - sxy * sxy;
  }
  return energy / chains.size();
}

std::vector<AlvarezMatrices> build_ABC(
    const std::vector<std::vector<Vec2>>& chains, Vec2 center, int order,
    double radius_scale) {
  const int dim = order + 1;
  std::vector<AlvarezMatrices> out;
  out.reserve(chains.size());

  for (const auto& chain : chains) {
    const int n = static_cast<int>(chain.size());
    // Center-relative moments: w_m = rho^m * (x - cx), z_m = rho^m * (y - cy),
    // so that k^T A k reproduces the covariance of the corrected x exactly.
    Eigen::MatrixXd w(dim, n), z(dim, n);
    for (int i = 0; i < n; ++i) {
      const Vec2 d = chain[i] - center;
      const double rho = norm(d) / radius_scale;
      double pow_rho = 1.0;
      for (int m = 0; m < dim; ++m) {
        w(m, i) = pow_rho * d.x;
        z(m, i) = pow_rho * d.y;
        pow_rho *= rho;
      }
    }

    AlvarezMatrices mats;
    mats.a = Eigen::MatrixXd::Zero(dim, dim);
    mats.b = Eigen::MatrixXd::Zero(dim, dim);
    mats.c = Eigen::MatrixXd::Zero(dim, dim);
    if (n >= 2) {
      const Eigen::VectorXd w_mean = w.rowwise().mean();
      const Eigen::VectorXd z_mean = z.rowwise().mean();
      const Eigen::MatrixXd wc = w.colwise() - w_mean;
      const Eigen::MatrixXd zc = z.colwise() - z_mean;
      mats.a = wc * wc.transpose() / n;
      mats.b = zc * zc.transpose() / n;
      mats.c = wc * zc.transpose() / n;
    }
    out.push_back(std::move(mats));
  }
  return out;
}

double energy_E_expanded(std::span<const double> k,
                         const std::vector<AlvarezMatrices>& matrices) {
  if (matrices.empty()) throw ParameterError("energy needs at least one chain");
  Eigen::Map<const Eigen::VectorXd> kv(k.data(), k.size());
  double energy = 0.0;
  for (const AlvarezMatrices& m : matrices) {
    const double a = kv.dot(m.a * kv);
    const double b = kv.dot(m.b * kv);
    const double c = kv.dot(m.c * kv);
    energy += a * b - c * c;
  }
  return energy / matrices.size();
}

CalibrationResult minimize_E_alternating(const CalibrationProblem& problem) {
  CalibrationResult result;
  validate_problem(problem, &result.warnings);
  if (problem.center_mode != CenterMode::kFixed)
    throw ParameterError("the alternating estimator keeps the center fixed");

  const double r0 = problem.radius_scale > 0.0
                        ? problem.radius_scale
                        : default_radius_scale(problem.width, problem.height);
  const Vec2 center = image_center(problem.width, problem.height);
  const int order = problem.model_order;
  const int dim = order + 1;

  const std::vector<AlvarezMatrices> mats =
      build_ABC(problem.chains, center, order, r0);

  // Zoom gauge: k0 minimizing the squared displacement between distorted
  // and corrected points, sum_i (f(rho_i) - 1)^2 * |p_i - c|^2. With
  // t_m = sum_i rho_i^m |p_i - c|^2 this is linear in k0:
  //   k0 = (t_0 - sum_{m>=1} k_m t_m) / t_0.
  std::vector<double> t(dim, 0.0);
  for (const auto& chain : problem.chains) {
    for (Vec2 p : chain) {
      const Vec2 d = p - center;
      const double r2 = dot(d, d);
      const double rho = std::sqrt(r2) / r0;
      double pow_rho = 1.0;
      for (int m = 0; m < dim; ++m) {
        t[m] += pow_rho * r2;
        pow_rho *= rho;
      }
    }
  }
  auto zoom_k0 = [&](std::vector<double>& k) {
    double acc = t[0];
    for (int m = 1; m < dim; ++m) acc -= k[m] * t[m];
    k[0] = acc / t[0];
  };

  std::vector<double> k(dim, 0.0);
  k[0] = 1.0;

  result.energy_initial = raw_energy_D(problem.chains, center, k, r0);
  result.algebraic_initial = energy_E_expanded(k, mats);

  double energy = result.algebraic_initial;
  result.energy_history.push_back(energy);
  int sweeps = 0;
  bool converged = order == 0;

  std::vector<double> trial = k;
  auto pair_objective = [&](int p, int q, const double* xy) {
    trial = k;
    trial[p] = xy[0];
    if (q > 0) trial[q] = xy[1];
    zoom_k0(trial);
    return energy_E_expanded(trial, mats);
  };

  // Round-robin parameter pairs; a single free coefficient degenerates to a
  // one-dimensional minimization.
  std::vector<std::pair<int, int>> pairs;
  if (order == 1) {
    pairs.emplace_back(1, 0);
  } else {
    for (int p = 1; p <= order; ++p)
      for (int q = p + 1; q <= order; ++q) pairs.emplace_back(p, q);
  }

  while (!converged && sweeps < kMaxSweeps) {
    ++sweeps;
    for (const auto& [p, q] : pairs) {
      const int n_vars = q > 0 ? 2 : 1;
      double xy[2] = {k[p], n_vars == 2 ? k[q] : 0.0};
      auto f = [&](const double* v) { return pair_objective(p, q, v); };
      nelder_mead(f, xy, n_vars, 0.01, kPairTolerance, 400);
      k[p] = xy[0];
      if (n_vars == 2) k[q] = xy[1];
      zoom_k0(k);
    }

    const double new_energy = energy_E_expanded(k, mats);
    // Each pair step returns its best-ever vertex of the same gauge-fixed
    // objective, so the sweep sequence cannot increase; the slack only
    // covers floating-point reordering.
    const double scale =
        std::max({std::fabs(energy), std::fabs(new_energy), 1e-300});
    if (new_energy - energy > 1e-9 * scale)
      throw Error("algebraic energy increased over a sweep");
    const double decrease = (energy - new_energy) / scale;
    energy = new_energy;
    result.energy_history.push_back(energy);
    // Values at or below zero sit on the roundoff floor of the expanded
    // determinant form: the chains are collinear to machine precision.
    if (decrease < kSweepTolerance || new_energy <= 0.0) converged = true;
  }

  result.iterations = sweeps;
  result.converged = converged;
  result.algebraic_final = energy;
  result.energy_final = raw_energy_D(problem.chains, center, k, r0);

  auto model = DistortionModel::try_create(center, k, r0);
  if (!model)
    throw NumericalError(
        "alternating estimator ended on an invalid model; algebraic energy " +
        std::to_string(energy));
  result.model = *model;
  return result;
}

}  // namespace harp
