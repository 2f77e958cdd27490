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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spikenas/arch/model.hpp"
#include "spikenas/data/dataset.hpp"
#include "spikenas/energy/energy.hpp"
#include "spikenas/evo/evolution.hpp"

namespace spikenas {

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double lr = 1e-3;  // peak, cosine-decayed per epoch to min_lr
  double min_lr = 0.0;
  double weight_decay = 1e-2;  // decoupled, on ".weight" tensors only
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  bool flip = false;  // random horizontal flip

  void validate() const;
};

/// Learning rate for `epoch` (0-based) of `config.epochs`.
double cosine_lr(const TrainConfig& config, int epoch);

/// AdamW restricted to elements that received gradient since the last
/// zero_grad(); untouched elements keep their weights and moments.
class AdamW {
 public:
  struct Slot {
    Tensor m;
    Tensor v;
    std::vector<std::uint32_t> steps;  // per element
  };

  AdamW(const Supernet& supernet, const TrainConfig& config);

  void step(Supernet& supernet, double lr);

  std::map<std::string, Slot>& slots() noexcept { return slots_; }
  const std::map<std::string, Slot>& slots() const noexcept { return slots_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::map<std::string, Slot> slots_;
};

/// Single-path supernet training: every batch samples one candidate
/// uniformly and updates only its slices.
class SupernetTrainer {
 public:
  SupernetTrainer(Supernet& supernet, const Dataset& train, TrainConfig config);

  /// Runs one epoch and returns its mean loss. Throws NumericError on a
  /// non-finite loss.
  double train_epoch();
  /// Trains until `config.epochs`; `on_epoch(epoch, loss)` runs after each.
  void run(const std::function<void(int, double)>& on_epoch = {});

  /// Candidate drawn for (epoch, step).
  Candidate sample(int epoch, std::size_t step) const;

  int epoch() const noexcept { return epoch_; }
  const std::vector<double>& loss_history() const noexcept { return history_; }
  const TrainConfig& config() const noexcept { return config_; }
  const Normalization& normalization() const noexcept { return norm_; }
  AdamW& optimizer() noexcept { return adam_; }
  const AdamW& optimizer() const noexcept { return adam_; }

  /// Resume point: completed epochs and their losses.
  void restore(int epoch, std::vector<double> history);

 private:
  Supernet* supernet_;
  const Dataset* train_;
  TrainConfig config_;
  Normalization norm_;
  AdamW adam_;
  int epoch_ = 0;
  std::vector<double> history_;
};

struct CalibrationConfig {
  int batches = 20;
  int batch_size = 64;
  std::uint64_t seed = 0;
};

/// Resets the subnet's BN statistics and re-estimates them as the
/// cumulative average over `batches` training batches (cycling through the
/// data if it is shorter). Weights are not touched.
void recalibrate_bn(Subnet& subnet, const Dataset& data, const Normalization& norm, const CalibrationConfig& config);

struct EvalResult {
  Candidate candidate;
  double accuracy = 0.0;
  FrTrace fr_trace;
  EnergyReport energy;
  double energy_joules() const noexcept { return energy.total_joules; }
};

/// Top-1 accuracy over the whole of `data` with per-layer firing rates
/// measured in the same pass and the energy those rates imply.
EvalResult evaluate(Subnet& subnet, const Candidate& candidate, const Dataset& data, const Normalization& norm,
                    int batch_size = 64);

/// Inherited-weight evaluation of candidates against one supernet: build,
/// recalibrate, evaluate. The supernet is read only.
class InheritedEvaluator {
 public:
  InheritedEvaluator(Supernet& supernet, const Dataset& calibration, const Dataset& eval, Normalization norm,
                     CalibrationConfig calib, int batch_size = 64);

  EvalResult run(const Candidate& c) const;
  Evaluation operator()(const Candidate& c) const;

 private:
  Supernet* supernet_;
  const Dataset* calibration_;
  const Dataset* eval_;
  Normalization norm_;
  CalibrationConfig calib_;
  int batch_size_;
};

}  // namespace spikenas
