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

#include <stdexcept>

namespace harp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// File content does not match the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Input raster too small for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid argument value (factors, thresholds, orders).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Point configuration carries no usable geometry (coincident points,
// zero-length chains).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Distortion model rejected at construction (non-positive correction
// factor or non-monotone radial map over the working radius range).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Linear algebra failure (singular system, non-finite energy).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Projective mapping sent a point to infinity.
class ProjectiveError : public Error {
 public:
  using Error::Error;
};

}  // namespace harp
