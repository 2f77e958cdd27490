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

#include <cstddef>
#include <vector>

#include "spikenas/tensor/autograd.hpp"

namespace spikenas::ops {

Variable add(const Variable& a, const Variable& b);
Variable mul(const Variable& a, const Variable& b);
Variable scale(const Variable& a, float s);
Variable sum(const Variable& a);
Variable mean(const Variable& a);
/// Mean over one axis; the axis is removed.
Variable mean_axis(const Variable& a, std::size_t axis);

/// Batched matrix product over matching leading dims: [..,m,k] x [..,k,n].
Variable matmul(const Variable& a, const Variable& b);
/// y = x W^T + b for x [M, in], W [out, in], optional bias [out].
Variable linear(const Variable& x, const Variable& weight, const Variable& bias = {});

Variable reshape(const Variable& a, Shape shape);
Variable permute(const Variable& a, const std::vector<std::size_t>& perm);
Variable transpose_last2(const Variable& a);
/// Leading slice [0:shape[i]) of every axis; gradient lands in that region only.
Variable narrow_leading(const Variable& a, const Shape& shape);

/// Cross-correlation with zero padding, no bias. x [B,Cin,H,W], w [Cout,Cin,kh,kw].
Variable conv2d(const Variable& x, const Variable& w, std::size_t stride, std::size_t padding);
Variable max_pool2d(const Variable& x, std::size_t kernel, std::size_t stride, std::size_t padding);

enum class BnMode { Train, Eval, Calibrate };

struct BnState {
  Tensor running_mean;
  Tensor running_var;
  std::size_t calibration_batches = 0;

  static BnState fresh(std::size_t channels);
};

inline constexpr float kBnEpsilon = 1e-5f;
inline constexpr float kBnMomentum = 0.1f;

/// Batch normalization over axis 1 of x (shape [N, C, ...]).
/// Train: batch statistics, running stats updated with momentum.
/// Eval: running statistics.
/// Calibrate: batch statistics for the output; running stats become the
///   cumulative average of the per-batch statistics seen since the last reset.
Variable batchnorm(const Variable& x, const Variable& gamma, const Variable& beta, BnState& state,
                   BnMode mode);

/// Mean softmax cross-entropy of logits [B, K] against integer labels.
Variable cross_entropy(const Variable& logits, const std::vector<int>& labels);

}  // namespace spikenas::ops
