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

#include "spikenas/neuron/lif.hpp"

#include <algorithm>
#include <cmath>

#include "spikenas/error.hpp"

namespace spikenas {

void LifParams::validate() const {
  if (!(tau > 1.0) || !std::isfinite(tau)) throw ValueError("LIF tau must be > 1, got " + std::to_string(tau));
  if (!(u_th > 0.0) || !std::isfinite(u_th)) throw ValueError("LIF u_th must be > 0, got " + std::to_string(u_th));
  if (!(surrogate_width > 0.0)) throw ValueError("LIF surrogate width must be > 0");
}

FiringStats count_spikes(const Tensor& spikes) {
  FiringStats s;
  for (float v : spikes.data()) s.spikes_emitted += v != 0.0f ? 1 : 0;
  s.neuron_steps = spikes.size();
  return s;
}

LifState lif_step(const LifState& prev, const Tensor& input_current, const LifParams& params) {
  params.validate();
  if (prev.u.shape() != input_current.shape() || prev.y.shape() != input_current.shape()) {
    throw ShapeError("lif_step: state " + to_string(prev.u.shape()) + " vs input " +
                     to_string(input_current.shape()));
  }
  check_finite(input_current, "lif_step input");
  const auto decay = static_cast<float>(params.decay());
  const auto th = static_cast<float>(params.u_th);
  LifState next{Tensor(input_current.shape()), Tensor(input_current.shape())};
  for (std::size_t i = 0; i < input_current.size(); ++i) {
    const float u = decay * prev.u[i] * (1.0f - prev.y[i]) + input_current[i];
    next.u[i] = u;
    next.y[i] = u >= th ? 1.0f : 0.0f;
  }
  return next;
}

LifSequence lif_sequence(const Tensor& inputs, const LifParams& params) {
  if (inputs.rank() == 0 || inputs.dim(0) == 0) throw ValueError("lif_sequence needs at least one time step");
  const std::size_t steps = inputs.dim(0);
  const Shape step_shape(inputs.shape().begin() + 1, inputs.shape().end());
  const std::size_t n = numel(step_shape);
  LifState state = LifState::zeros(step_shape);
  LifSequence out{Tensor(inputs.shape()), {}};
  Tensor current(step_shape);
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy_n(inputs.data().begin() + static_cast<std::ptrdiff_t>(t * n), n, current.data().begin());
    state = lif_step(state, current, params);
    std::copy_n(state.y.data().begin(), n, out.spikes.data().begin() + static_cast<std::ptrdiff_t>(t * n));
  }
  out.stats = count_spikes(out.spikes);
  return out;
}

Tensor surrogate_grad(const Tensor& u, const LifParams& params) {
  Tensor g(u.shape());
  const double a = params.surrogate_width;
  const auto height = static_cast<float>(1.0 / (2.0 * a));
  for (std::size_t i = 0; i < u.size(); ++i) {
    g[i] = std::abs(static_cast<double>(u[i]) - params.u_th) < a ? height : 0.0f;
  }
  return g;
}

Variable lif(const Variable& inputs, const LifParams& params, FiringStats* stats, SpikeFunction fn) {
  params.validate();
  const Tensor& x = inputs.value();
  if (x.rank() == 0 || x.dim(0) == 0) throw ValueError("lif needs at least one time step");
  check_finite(x, "lif input");
  const std::size_t steps = x.dim(0);
  const std::size_t n = x.size() / steps;
  const auto decay = static_cast<float>(params.decay());
  const auto th = static_cast<float>(params.u_th);
  const auto a = static_cast<float>(params.surrogate_width);

  Tensor spikes(x.shape());
  Tensor potentials(x.shape());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = t * n + i;
      const float carried = t == 0 ? 0.0f : decay * potentials[k - n] * (1.0f - spikes[k - n]);
      const float u = carried + x[k];
      potentials[k] = u;
      if (fn == SpikeFunction::Heaviside) {
        spikes[k] = u >= th ? 1.0f : 0.0f;
      } else {
        spikes[k] = std::clamp((u - th + a) / (2.0f * a), 0.0f, 1.0f);
      }
    }
  }
  if (stats != nullptr) *stats += count_spikes(spikes);

  Tensor saved_spikes = inputs.requires_grad() ? spikes : Tensor();
  return Variable::make(
      std::move(spikes), {inputs},
      [potentials = std::move(potentials), saved_spikes = std::move(saved_spikes), steps, n, decay, th,
       a](Node& node) {
        const float height = 1.0f / (2.0f * a);
        Tensor g(potentials.shape());
        std::vector<float> grad_u_next(n, 0.0f);
        for (std::size_t t = steps; t-- > 0;) {
          for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = t * n + i;
            const float u = potentials[k];
            const float y = saved_spikes[k];
            const float sg = std::abs(u - th) < a ? height : 0.0f;
            // y_t feeds the output and the reset term of u_{t+1}.
            const float grad_y = node.grad[k] - grad_u_next[i] * decay * u;
            const float grad_u = grad_y * sg + grad_u_next[i] * decay * (1.0f - y);
            g[k] = grad_u;
            grad_u_next[i] = grad_u;
          }
        }
        node.parents[0]->accumulate(std::move(g));
      });
}

}  // namespace spikenas
