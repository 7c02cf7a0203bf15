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

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "harp/distortion_model.hpp"
#include "harp/geometry.hpp"

namespace harp {

enum class CenterMode { kFixed, kFree };

// Input to the estimators: distorted edge chains plus the model family.
struct CalibrationProblem {
  std::vector<std::vector<Vec2>> chains;
  int model_order = 4;  // N: coefficients k0..kN
  CenterMode center_mode = CenterMode::kFixed;
  int width = 0;   // distorted image size, px
  int height = 0;
  double radius_scale = 0.0;  // <= 0: half the image diagonal
};

struct CalibrationResult {
  DistortionModel model;
  double energy_initial = 0.0;  // geometric energy at the start
  double energy_final = 0.0;    // geometric energy at the result
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_history;  // one value per accepted step / sweep
  // Algebraic energy before/after, filled by the alternating estimator.
  double algebraic_initial = 0.0;
  double algebraic_final = 0.0;
  std::vector<std::string> warnings;
};

// Mean over chains of the mean squared distance from the corrected points
// to their own regression line.
double energy_D(const DistortionModel& model,
                const std::vector<std::vector<Vec2>>& chains);

// Levenberg-Marquardt over (k1..kN) with k0 pinned to 1, optionally also
// over the center. Residuals are the per-point signed distances scaled by
// 1/sqrt(L*N_l); the Jacobian uses forward differences with step 1e-6 in
// normalized parameter units. Stops when the relative energy decrease drops
// below 1e-12, the gradient infinity norm below 1e-10, or after 500
// iterations. The accepted energy sequence is non-increasing.
CalibrationResult minimize_D(const CalibrationProblem& problem,
                             const DistortionModel& init);

// Mean over chains of the covariance determinant of the corrected points:
// zero exactly when every corrected chain is collinear. Coordinates are
// taken relative to the center, radii normalized by radius_scale.
double energy_E(std::span<const double> k,
                const std::vector<std::vector<Vec2>>& chains, Vec2 center,
                double radius_scale);

// Per-chain moment matrices turning the covariance energy into
//   E = mean_l( k^T A_l k * k^T B_l k - (k^T C_l k)^2 ).
struct AlvarezMatrices {
  Eigen::MatrixXd a, b, c;
};

std::vector<AlvarezMatrices> build_ABC(
    const std::vector<std::vector<Vec2>>& chains, Vec2 center, int order,
    double radius_scale);

double energy_E_expanded(std::span<const double> k,
                         const std::vector<AlvarezMatrices>& matrices);

// Alternating two-parameter minimization of the algebraic energy: k starts
// at (1, 0, ..., 0); coefficient pairs are taken round-robin and minimized
// numerically with all other entries fixed, while k0 always carries the
// least-squares zoom that keeps corrected and distorted points closest.
// Folding the zoom into the pair objective makes every sweep non-increasing
// in the gauge-fixed energy. Center stays fixed.
CalibrationResult minimize_E_alternating(const CalibrationProblem& problem);

// Half-diagonal default for the normalized radius.
double default_radius_scale(int width, int height);
Vec2 image_center(int width, int height);

}  // namespace harp
