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

#pragma once

#include <cstdint>

#include "spikenas/tensor/autograd.hpp"

namespace spikenas {

/// Traits of a leaky integrate-and-fire neuron.
struct LifParams {
  double u_th = 1.0;             // firing threshold
  double tau = 2.0;              // membrane time constant, > 1
  double surrogate_width = 1.0;  // half-width a of the rectangular surrogate window

  /// Leak factor 1 - 1/tau applied to the carried-over potential.
  double decay() const noexcept { return 1.0 - 1.0 / tau; }
  /// Throws ValueError unless tau > 1, u_th > 0 and width > 0.
  void validate() const;
};

struct LifState {
  Tensor u;  // membrane potential
  Tensor y;  // last spikes, {0,1}

  static LifState zeros(const Shape& shape) { return {Tensor(shape, 0.0f), Tensor(shape, 0.0f)}; }
};

struct FiringStats {
  std::uint64_t spikes_emitted = 0;
  std::uint64_t neuron_steps = 0;

  double fr() const noexcept {
    return neuron_steps == 0 ? 0.0 : static_cast<double>(spikes_emitted) / static_cast<double>(neuron_steps);
  }
  FiringStats& operator+=(const FiringStats& o) noexcept {
    spikes_emitted += o.spikes_emitted;
    neuron_steps += o.neuron_steps;
    return *this;
  }
  friend bool operator==(const FiringStats&, const FiringStats&) = default;
};

/// Counts the ones in a {0,1} tensor.
FiringStats count_spikes(const Tensor& spikes);

/// One step: u = decay * u_prev * (1 - y_prev) + I; y = [u >= u_th].
LifState lif_step(const LifState& prev, const Tensor& input_current, const LifParams& params);

struct LifSequence {
  Tensor spikes;  // [T, ...]
  FiringStats stats;
};

/// Runs lif_step over the leading (time) axis starting from u = 0, y = 0.
LifSequence lif_sequence(const Tensor& inputs, const LifParams& params);

/// Rectangular surrogate dy/du: 1/(2a) where |u - u_th| < a, else 0.
Tensor surrogate_grad(const Tensor& u, const LifParams& params);

/// Spike nonlinearity used in the forward pass. `Ramp` replaces the hard step
/// with clamp((u - u_th + a) / 2a, 0, 1), whose derivative is exactly the
/// rectangular surrogate; it exists for finite-difference gradient checks.
enum class SpikeFunction { Heaviside, Ramp };

/// Differentiable LIF over inputs [T, ...] with backpropagation through time.
/// If `stats` is given, the emitted spikes are added to it.
Variable lif(const Variable& inputs, const LifParams& params, FiringStats* stats = nullptr,
             SpikeFunction fn = SpikeFunction::Heaviside);

}  // namespace spikenas
