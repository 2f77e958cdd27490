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

#include <map>
#include <string>
#include <vector>

#include "spikenas/arch/supernet.hpp"

namespace spikenas {

/// Firing counts at the input spike train of each spike-consuming layer
/// (a position counts once per step whenever any spike arrives there),
/// keyed by layer id ("sps.conv1", "block0.q", "block0.attn", "head", ...).
using LayerFiring = std::map<std::string, FiringStats>;

struct ForwardOptions {
  ops::BnMode bn_mode = ops::BnMode::Eval;
  SpikeFunction spike_fn = SpikeFunction::Heaviside;
  bool grad = false;  // build the autograd graph
};

struct ForwardResult {
  Variable logits;         // [B, num_classes]
  Variable features;       // [B, embed] rate-decoded head input
  LayerFiring layer_input;  // firing at each layer input
  LayerFiring lif_output;   // firing of each LIF population
};

/// Weights of one concrete network; either leading-slice views of a
/// supernet or standalone leaves.
struct ModelWeights {
  struct Conv {
    Variable weight;
    Variable gamma;
    Variable beta;
  };
  struct Block {
    Conv q, k, v, proj, fc1, fc2;  // linear weight + BN affine
  };
  std::vector<Conv> sps;  // four stages
  Conv rpe;
  std::vector<Block> blocks;
  Variable head_weight;
  Variable head_bias;
};

/// Runs the spiking transformer: patch splitting, relative position stage,
/// `config.depth()` attention blocks, rate-decoded linear head. `images` is
/// [B, C, H, W] (static), replicated over `config.time_step` steps.
ForwardResult run_model(const ModelWeights& weights, const SubnetConfig& config, const ModelSettings& settings,
                        BnStore& bn, const Tensor& images, const ForwardOptions& options);

/// Patch-splitting front end alone: returns spike tokens [T, B, N, embed].
Variable sps_forward(const ModelWeights& weights, const SubnetConfig& config, const ModelSettings& settings,
                     BnStore& bn, const Tensor& images, const ForwardOptions& options, LayerFiring* layer_input,
                     LayerFiring* lif_output);

/// One spiking self-attention + MLP block over spike tokens x [T*B, N, D]:
/// y = x + SSA(x), out = y + MLP(y), each branch ending in a LIF.
Variable block_forward(const ModelWeights::Block& w, const BlockConfig& block, int time_step, double attn_scale,
                       BnStore& bn, const std::string& prefix, const Variable& x, const ForwardOptions& options,
                       LayerFiring* layer_input, LayerFiring* lif_output);

/// Softmax-free attention (Q K^T) V * scale per head; q, k, v are
/// [T*B, N, D] and the result is [T*B, N, D] before its LIF.
Variable spiking_attention(const Variable& q, const Variable& k, const Variable& v, int heads, double scale);

/// Mean over tokens then time of spikes [T, B, N, D] -> [B, D].
Variable rate_decode(const Variable& spikes);

/// A network materialized from a supernet: weights are leading slices of
/// the shared tensors, BN statistics are private copies.
class Subnet {
 public:
  Subnet(Supernet& supernet, SubnetConfig config);
  Subnet(Supernet& supernet, const Candidate& candidate);

  const SubnetConfig& config() const noexcept { return config_; }
  Supernet& supernet() const noexcept { return *supernet_; }
  BnStore& bn_stats() noexcept { return bn_; }
  const BnStore& bn_stats() const noexcept { return bn_; }

  /// Slices the supernet. With grad=true the slices are graph nodes that
  /// route gradient back into the shared tensors.
  ModelWeights weights(bool grad) const;

  ForwardResult forward(const Tensor& images, const ForwardOptions& options);

  /// Writes the private BN statistics back into the supernet's slices.
  void commit_bn_stats() const;

  /// Shape of every parameter slice this subnet uses, by parameter name.
  std::map<std::string, Shape> slice_shapes() const;

 private:
  Supernet* supernet_;
  SubnetConfig config_;
  BnStore bn_;
};

/// A self-contained network holding copies of a subnet's slices.
class StandaloneModel {
 public:
  explicit StandaloneModel(const Subnet& subnet);

  ForwardResult forward(const Tensor& images, const ForwardOptions& options);
  const ModelWeights& weights() const noexcept { return weights_; }

 private:
  SubnetConfig config_;
  ModelSettings settings_;
  ModelWeights weights_;
  BnStore bn_;
};

/// Weights of the full supernet used without slicing.
ModelWeights full_weights(const Supernet& supernet);

/// Builds the subnet for `candidate` (validated).
Subnet build_subnet(Supernet& supernet, const Candidate& candidate);

}  // namespace spikenas
