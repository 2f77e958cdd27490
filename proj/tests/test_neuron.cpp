// Copyright 2026 The spikenas Authors.
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikenas/error.hpp"
#include "spikenas/neuron/lif.hpp"
#include "support.hpp"

using namespace spikenas;

namespace {

LifState single(float u, float y) { return {Tensor({1}, u), Tensor({1}, y)}; }

}  // namespace

TEST_CASE("lif step hand cases") {
  const LifParams p{1.0, 2.0, 1.0};
  auto s = lif_step(single(0.8f, 0.0f), Tensor({1}, 0.3f), p);
  CHECK(s.u[0] == doctest::Approx(0.7));
  CHECK(s.y[0] == 0.0f);

  s = lif_step(single(0.8f, 0.0f), Tensor({1}, 0.7f), p);
  CHECK(s.u[0] == doctest::Approx(1.1));
  CHECK(s.y[0] == 1.0f);
  s = lif_step(s, Tensor({1}, 0.0f), p);
  CHECK(s.u[0] == 0.0f);
  CHECK(s.y[0] == 0.0f);
}

TEST_CASE("subthreshold input converges to tau * I") {
  const LifParams p{10.0, 2.0, 1.0};
  const auto seq = lif_sequence(Tensor({50, 1}, 0.3f), p);
  CHECK(seq.stats.spikes_emitted == 0);
  auto s = LifState::zeros({1});
  for (int t = 1; t <= 50; ++t) {
    s = lif_step(s, Tensor({1}, 0.3f), p);
    // Geometric series: u_t = I * (1 - d^t) / (1 - d).
    const double d = p.decay();
    CHECK(s.u[0] == doctest::Approx(0.3 * (1 - std::pow(d, t)) / (1 - d)).epsilon(1e-5));
  }
  CHECK(std::abs(s.u[0] - 0.6) < 1e-6);
}

TEST_CASE("suprathreshold input fires every step") {
  const auto seq = lif_sequence(Tensor({4, 1}, 0.6f), LifParams{0.5, 2.0, 1.0});
  CHECK(seq.stats.fr() == 1.0);
  CHECK(seq.stats.neuron_steps == 4);
}

TEST_CASE("raising the threshold never adds spikes") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor in = testing::random_tensor({8, 16}, rng, -0.5, 1.5);
    const double tau = 1.25 + 0.25 * double(rng.below(36));
    std::uint64_t prev = ~0ULL;
    for (double th = 0.6; th <= 2.0 + 1e-9; th += 0.2) {
      const auto n = lif_sequence(in, LifParams{th, tau, 1.0}).stats.spikes_emitted;
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("surrogate is nonzero exactly inside the window") {
  Rng rng(5);
  const LifParams p{1.2, 2.0, 0.5};
  const Tensor u = testing::random_tensor({200}, rng, -1.0, 3.0);
  const Tensor g = surrogate_grad(u, p);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const bool inside = std::abs(double(u[i]) - p.u_th) < p.surrogate_width;
    CHECK(g[i] == (inside ? doctest::Approx(1.0 / (2 * p.surrogate_width)) : doctest::Approx(0.0)));
  }
}

TEST_CASE("differentiable lif matches the reference recurrence") {
  Rng rng(6);
  const Tensor in = testing::random_tensor({5, 3, 7}, rng, 0.0, 1.5);
  const LifParams p{0.8, 3.0, 1.0};
  FiringStats stats;
  const Variable out = lif(Variable(in), p, &stats);
  const auto ref = lif_sequence(in, p);
  CHECK(out.value() == ref.spikes);
  CHECK(stats == ref.stats);
  CHECK(count_spikes(ref.spikes) == ref.stats);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((LifParams{1.0, 1.0, 1.0}.validate()), ValueError);
  CHECK_THROWS_AS((LifParams{0.0, 2.0, 1.0}.validate()), ValueError);
  CHECK_THROWS_AS((LifParams{1.0, 2.0, 0.0}.validate()), ValueError);
  CHECK_NOTHROW((LifParams{1.0, 1.25, 1.0}.validate()));
}
