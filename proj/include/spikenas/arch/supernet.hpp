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
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "spikenas/arch/candidate.hpp"
#include "spikenas/neuron/lif.hpp"
#include "spikenas/tensor/ops.hpp"
#include "spikenas/tensor/rng.hpp"

namespace spikenas {

/// Input geometry and fixed hyperparameters shared by every subnet.
struct ModelSettings {
  int in_channels = 3;
  int num_classes = 10;
  int image_size = 32;
  LifParams sps_lif{1.0, 2.0, 1.0};
  double attn_scale = 0.125;

  /// Tokens after patch splitting: (image_size / 4)^2.
  int tokens() const noexcept { return (image_size / 4) * (image_size / 4); }
  void validate() const;
};

using BnStore = std::map<std::string, ops::BnState>;

/// Maximal-dimension weight store. Every subnet weight is a leading slice of
/// one of these tensors.
class Supernet {
 public:
  Supernet(const SearchSpace& space, const ModelSettings& settings, std::uint64_t seed);

  const SearchSpace& space() const noexcept { return space_; }
  const ModelSettings& settings() const noexcept { return settings_; }

  /// Parameters in registration order.
  const std::vector<std::pair<std::string, Variable>>& parameters() const noexcept { return params_; }
  const Variable& param(const std::string& name) const;
  BnStore& bn_stats() noexcept { return bn_; }
  const BnStore& bn_stats() const noexcept { return bn_; }

  void zero_grad();

 private:
  void add_param(const std::string& name, Tensor value);
  void add_conv(const std::string& name, int cout, int cin, Rng& rng);
  void add_bn(const std::string& name, int channels);

  SearchSpace space_;
  ModelSettings settings_;
  std::vector<std::pair<std::string, Variable>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  BnStore bn_;
};

}  // namespace spikenas
