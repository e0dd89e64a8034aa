// Copyright 2026 The plcmimic Authors
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

// Boundary triplets and derivative-weighted x sampling.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "plcmimic/config.hpp"
#include "plcmimic/rng.hpp"

namespace plcmimic {

/// [low, r, high - elem] with r uniform in [low + 1, high - elem - 1].
/// Throws Error(kEmptyRange) unless high - elem > low + 1.
std::array<std::int64_t, 3> triplet(std::int64_t low, std::int64_t high, std::int64_t elem, Rng& rng);

/// Boundary values of one kind: the value triplet for analog points,
/// {0, random bit, 1} for digital points.
std::array<std::uint16_t, 3> value_triplet(const ProtocolConfig& cfg, DataKind kind, Rng& rng);

/// Every tuple of `width` values drawn from `values`, in lexicographic index
/// order (3^width tuples). Throws Error(kEmptyRange) when width is 0.
std::vector<std::vector<std::uint16_t>> combs(const std::array<std::uint16_t, 3>& values, std::uint32_t width);

/// Intermediate products of the weighted sampler, exposed for inspection.
struct WeightedGrid {
  std::vector<double> x;
  std::vector<double> derivative;  // after discontinuity masking
  std::vector<double> density;     // mixed and normalized
  std::vector<double> cdf;         // trapezoid integral, last value 1
};

/// Central-difference derivative of `ys` on a uniform grid of spacing `h`.
/// Points where the estimate at h and at 2h disagree by more than a quarter
/// of the largest magnitude are jumps and get derivative 0.
std::vector<double> masked_derivative(const std::vector<double>& ys, double h);

/// Throws Error(kDegenerateDensity) when the mixed density has no mass.
WeightedGrid weighted_grid(const SamplerConfig& cfg, const std::function<double(double)>& probe);

/// Inverse-CDF draw through linear interpolation for a uniform variate u.
double inverse_cdf(const WeightedGrid& grid, double u);

/// n_samples sorted x values distributed like the adjusted density.
std::vector<double> weighted_x_samples(const SamplerConfig& cfg, const std::function<double(double)>& probe,
                                       Rng& rng);

}  // namespace plcmimic
