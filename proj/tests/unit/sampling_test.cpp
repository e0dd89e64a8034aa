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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plcmimic/error.hpp"
#include "plcmimic/plant.hpp"
#include "plcmimic/sampling.hpp"
#include "ks.hpp"

namespace plcmimic {
namespace {

using testing::fraction_inside;
using testing::ks_distance;
using testing::ReferenceCdf;
using testing::sigmoid;

TEST(Triplet, Examples) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    auto t = triplet(0, 39, 2, rng);
    EXPECT_EQ(t[0], 0);
    EXPECT_EQ(t[2], 37);
    EXPECT_GE(t[1], 1);
    EXPECT_LE(t[1], 36);
  }
  auto e = triplet(40, 65535, 1, rng);
  EXPECT_EQ(e[0], 40);
  EXPECT_EQ(e[2], 65534);
  // smallest admissible range has exactly one middle value
  auto tight = triplet(0, 3, 1, rng);
  EXPECT_EQ(tight, (std::array<std::int64_t, 3>{0, 1, 2}));
}

TEST(Triplet, EmptyRange) {
  Rng rng(1);
  try {
    triplet(0, 2, 1, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kEmptyRange);
  }
  EXPECT_THROW(triplet(10, 5, 0, rng), Error);
}

TEST(Triplet, MiddleCoversTheInterior) {
  Rng rng(2);
  std::vector<int> seen(10, 0);
  for (int i = 0; i < 5000; ++i) ++seen[static_cast<std::size_t>(triplet(0, 10, 0, rng)[1])];
  EXPECT_EQ(seen[0], 0);
  for (int v = 1; v <= 9; ++v) EXPECT_GT(seen[static_cast<std::size_t>(v)], 400) << v;
}

TEST(ValueTriplet, Kinds) {
  Rng rng(3);
  ProtocolConfig cfg;
  cfg.val_low = 100;
  cfg.val_high = 200;
  for (int i = 0; i < 100; ++i) {
    auto d = value_triplet(cfg, DataKind::kDigital, rng);
    EXPECT_EQ(d[0], 0);
    EXPECT_LE(d[1], 1);
    EXPECT_EQ(d[2], 1);
    auto a = value_triplet(cfg, DataKind::kAnalog, rng);
    EXPECT_EQ(a[0], 100);
    EXPECT_EQ(a[2], 200);
    EXPECT_GT(a[1], 100);
    EXPECT_LT(a[1], 200);
  }
}

TEST(Combs, CountAndOrder) {
  const std::array<std::uint16_t, 3> v{0, 5, 9};
  EXPECT_EQ(combs(v, 1), (std::vector<std::vector<std::uint16_t>>{{0}, {5}, {9}}));
  auto two = combs(v, 2);
  ASSERT_EQ(two.size(), 9u);
  EXPECT_EQ(two[1], (std::vector<std::uint16_t>{0, 5}));
  EXPECT_EQ(two[3], (std::vector<std::uint16_t>{5, 0}));
  EXPECT_EQ(combs(v, 3).size(), 27u);
  EXPECT_EQ(combs(v, 5).size(), 243u);
  EXPECT_THROW(combs(v, 0), Error);
}

TEST(MaskedDerivative, LinearAndQuadratic) {
  std::vector<double> lin, quad;
  for (int i = 0; i < 50; ++i) {
    lin.push_back(3.0 * i * 0.1 + 1.0);
    quad.push_back((i * 0.1) * (i * 0.1));
  }
  for (double d : masked_derivative(lin, 0.1)) EXPECT_NEAR(d, 3.0, 1e-9);
  auto dq = masked_derivative(quad, 0.1);
  for (std::size_t i = 1; i + 1 < dq.size(); ++i) EXPECT_NEAR(dq[i], 2.0 * static_cast<double>(i) * 0.1, 1e-9);
}

TEST(MaskedDerivative, JumpIsZeroed) {
  std::vector<double> step;
  for (int i = 0; i < 40; ++i) step.push_back(i < 20 ? -1.0 : 1.0);
  for (double d : masked_derivative(step, 0.5)) EXPECT_EQ(d, 0.0);
}

TEST(WeightedGrid, DensityAndCdfInvariants) {
  SamplerConfig s;
  s.n_samples = 1000;
  auto g = weighted_grid(s, sigmoid);
  ASSERT_EQ(g.x.size(), 1000u);
  EXPECT_DOUBLE_EQ(g.x.front(), -10.0);
  EXPECT_DOUBLE_EQ(g.x.back(), 10.0);
  EXPECT_DOUBLE_EQ(g.cdf.front(), 0.0);
  EXPECT_DOUBLE_EQ(g.cdf.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(g.cdf.begin(), g.cdf.end()));
  for (double d : g.density) EXPECT_GT(d, 0.0);
  double mass = 0.0;
  const double h = g.x[1] - g.x[0];
  for (std::size_t i = 1; i < g.density.size(); ++i) mass += 0.5 * (g.density[i - 1] + g.density[i]) * h;
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(WeightedGrid, MassNearTheSigmoidCentreMatchesOracle) {
  SamplerConfig s;  // n 1000, mix 0.2, power 0.5 on [-10, 10]
  auto g = weighted_grid(s, sigmoid);
  const auto& x = g.x;
  auto cdf_at = [&](double v) {
    auto it = std::lower_bound(x.begin(), x.end(), v);
    const auto i = static_cast<std::size_t>(it - x.begin());
    return g.cdf[i - 1] + (v - x[i - 1]) / (x[i] - x[i - 1]) * (g.cdf[i] - g.cdf[i - 1]);
  };
  EXPECT_NEAR(cdf_at(2.0) - cdf_at(-2.0), 0.555365, 2e-3);
}

TEST(WeightedGrid, DegenerateDensity) {
  SamplerConfig s;
  s.mix_ratio = 0.0;
  try {
    weighted_grid(s, [](double) { return 4.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateDensity);
  }
  s.mix_ratio = 0.1;
  EXPECT_NO_THROW(weighted_grid(s, [](double) { return 4.0; }));
}

TEST(InverseCdf, EndpointsAndMonotone) {
  SamplerConfig s;
  s.n_samples = 200;
  auto g = weighted_grid(s, sigmoid);
  EXPECT_DOUBLE_EQ(inverse_cdf(g, 0.0), -10.0);
  EXPECT_DOUBLE_EQ(inverse_cdf(g, 1.0), 10.0);
  double prev = -11.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = inverse_cdf(g, i / 1000.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(inverse_cdf(g, 0.5), 0.0, 0.05);
}

TEST(WeightedSamples, SigmoidMatchesReferenceCdf) {
  SamplerConfig s;
  s.n_samples = 10000;
  Rng rng(2024);
  auto xs = weighted_x_samples(s, sigmoid, rng);
  ASSERT_EQ(xs.size(), 10000u);
  EXPECT_TRUE(std::is_sorted(xs.begin(), xs.end()));
  ReferenceCdf ref([](double x) { return sigmoid(x) * (1 - sigmoid(x)); }, s);
  EXPECT_LT(ks_distance(xs, ref), 0.02);
  EXPECT_GE(fraction_inside(xs, 2.0), 1.2 * 0.2);
}

TEST(WeightedSamples, SgnIsNearUniform) {
  SamplerConfig s;
  s.n_samples = 10000;
  Rng rng(7);
  auto xs = weighted_x_samples(s, [](double x) { return eval_block(BlockKind::kSgn, x); }, rng);
  EXPECT_LT(ks_distance(xs, [](double x) { return (x + 10.0) / 20.0; }), 0.02);
}

TEST(WeightedSamples, CauchyConcentrates) {
  SamplerConfig s;
  s.n_samples = 10000;
  Rng rng(8);
  auto xs = weighted_x_samples(s, [](double x) { return eval_block(BlockKind::kCauchy, x); }, rng);
  ReferenceCdf ref([](double x) { return -2 * x / (std::numbers::pi * (1 + x * x) * (1 + x * x)); }, s);
  EXPECT_LT(ks_distance(xs, ref), 0.02);
  EXPECT_NEAR(fraction_inside(xs, 2.0), 0.5467, 0.02);
}

TEST(WeightedSamples, Reproducible) {
  SamplerConfig s;
  Rng a(5), b(5);
  EXPECT_EQ(weighted_x_samples(s, sigmoid, a), weighted_x_samples(s, sigmoid, b));
}

}  // namespace
}  // namespace plcmimic
