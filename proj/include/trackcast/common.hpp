/* Copyright 2026 The Trackcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Error taxonomy and the deterministic random source shared by all modules.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace trackcast {

inline constexpr double kPi = 3.14159265358979323846;

// Base class for all library errors. The CLI maps ConfigError,
// ValidationError and VersionError to exit code 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller passed data that violates an operation's preconditions.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A configuration value is out of its admissible range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Structural violation in external data; carries the offending field path.
class ValidationError : public Error {
 public:
  ValidationError(std::string field_path, const std::string& message)
      : Error(field_path.empty() ? message : field_path + ": " + message),
        field_path_(std::move(field_path)) {}

  const std::string& field_path() const { return field_path_; }

 private:
  std::string field_path_;
};

// Schema version of an input file does not match the supported version.
class VersionError : public Error {
 public:
  using Error::Error;
};

// Frames were fed to a streaming pipeline out of chronological order.
class SequencingError : public Error {
 public:
  using Error::Error;
};

// An internal invariant was broken; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Deterministic random source. Wraps mt19937_64 with fixed bit-to-double
// mappings (53-bit mantissa uniforms, Box-Muller gaussians) so that a seed
// produces the same stream on every platform and standard library.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in (0, 1].
  double uniform01() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return radius * std::cos(2.0 * kPi * u2);
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stable seed derivation for independent substreams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace trackcast
