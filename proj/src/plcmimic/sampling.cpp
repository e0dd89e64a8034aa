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

#include "plcmimic/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "plcmimic/error.hpp"

namespace plcmimic {

std::array<std::int64_t, 3> triplet(std::int64_t low, std::int64_t high, std::int64_t elem, Rng& rng) {
  if (!(high - elem > low + 1))
    throw Error(Errc::kEmptyRange, "triplet",
                "[" + std::to_string(low) + ", " + std::to_string(high) + "] with elem " + std::to_string(elem));
  return {low, rng.uniform_int(low + 1, high - elem - 1), high - elem};
}

std::array<std::uint16_t, 3> value_triplet(const ProtocolConfig& cfg, DataKind kind, Rng& rng) {
  if (kind == DataKind::kDigital) return {0, static_cast<std::uint16_t>(rng.uniform_int(0, 1)), 1};
  const auto t = triplet(cfg.val_low, cfg.val_high, 0, rng);
  return {static_cast<std::uint16_t>(t[0]), static_cast<std::uint16_t>(t[1]), static_cast<std::uint16_t>(t[2])};
}

std::vector<std::vector<std::uint16_t>> combs(const std::array<std::uint16_t, 3>& values, std::uint32_t width) {
  if (width == 0) throw Error(Errc::kEmptyRange, "elem", "no zero-width writes");
  std::vector<std::vector<std::uint16_t>> out{{}};
  for (std::uint32_t w = 0; w < width; ++w) {
    std::vector<std::vector<std::uint16_t>> next;
    next.reserve(out.size() * 3);
    for (const auto& prefix : out)
      for (auto v : values) {
        next.push_back(prefix);
        next.back().push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

std::vector<double> masked_derivative(const std::vector<double>& ys, double h) {
  const std::size_t n = ys.size();
  std::vector<double> d1(n, 0.0), d2(n, 0.0);
  if (n < 2) return d1;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      d1[i] = (ys[1] - ys[0]) / h;
    } else if (i + 1 == n) {
      d1[i] = (ys[i] - ys[i - 1]) / h;
    } else {
      d1[i] = (ys[i + 1] - ys[i - 1]) / (2 * h);
    }
    d2[i] = (i >= 2 && i + 2 < n) ? (ys[i + 2] - ys[i - 2]) / (4 * h) : d1[i];
  }
  double peak = 0.0;
  for (auto d : d1) peak = std::max(peak, std::abs(d));
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(d1[i] - d2[i]) > 0.25 * peak) d1[i] = 0.0;
  return d1;
}

WeightedGrid weighted_grid(const SamplerConfig& cfg, const std::function<double(double)>& probe) {
  const std::size_t n = cfg.n_samples;
  if (n < 2 || !(cfg.x_low < cfg.x_high))
    throw Error(Errc::kInvalidConfig, "sampler", "need n_samples >= 2 and x_low < x_high");
  WeightedGrid g;
  g.x.resize(n);
  const double h = (cfg.x_high - cfg.x_low) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g.x[i] = i + 1 == n ? cfg.x_high : cfg.x_low + h * static_cast<double>(i);
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = probe(g.x[i]);
  g.derivative = masked_derivative(ys, h);

  const double uni = 1.0 / static_cast<double>(n);
  g.density.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    g.density[i] = (1.0 - cfg.mix_ratio) * std::pow(std::abs(g.derivative[i]), cfg.power) + cfg.mix_ratio * uni;

  double mass = 0.0;
  for (std::size_t i = 1; i < n; ++i) mass += 0.5 * (g.density[i - 1] + g.density[i]) * h;
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(Errc::kDegenerateDensity, "density", "adjusted density integrates to " + std::to_string(mass));
  for (auto& d : g.density) d /= mass;

  g.cdf.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) g.cdf[i] = g.cdf[i - 1] + 0.5 * (g.density[i - 1] + g.density[i]) * h;
  const double last = g.cdf.back();
  for (auto& c : g.cdf) c /= last;
  return g;
}

double inverse_cdf(const WeightedGrid& grid, double u) {
  const auto& c = grid.cdf;
  auto it = std::upper_bound(c.begin(), c.end(), u);
  if (it == c.begin()) return grid.x.front();
  if (it == c.end()) return grid.x.back();
  const std::size_t hi = static_cast<std::size_t>(it - c.begin());
  const std::size_t lo = hi - 1;
  const double span = c[hi] - c[lo];
  if (span <= 0.0) return grid.x[lo];
  return grid.x[lo] + (u - c[lo]) / span * (grid.x[hi] - grid.x[lo]);
}

std::vector<double> weighted_x_samples(const SamplerConfig& cfg, const std::function<double(double)>& probe,
                                       Rng& rng) {
  const auto grid = weighted_grid(cfg, probe);
  std::vector<double> xs(cfg.n_samples);
  for (auto& x : xs) x = inverse_cdf(grid, rng.uniform01());
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace plcmimic
