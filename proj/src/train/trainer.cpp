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

#include "spikenas/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spikenas/error.hpp"

namespace spikenas {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValueError("epochs must be >= 1");
  if (batch_size < 1) throw ValueError("batch_size must be >= 1");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValueError("lr must be positive");
  if (!(min_lr >= 0.0) || min_lr > lr) throw ValueError("min_lr must lie in [0, lr]");
  if (!(weight_decay >= 0.0)) throw ValueError("weight_decay must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ValueError("betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ValueError("eps must be positive");
}

double cosine_lr(const TrainConfig& config, int epoch) {
  const double progress = static_cast<double>(epoch) / static_cast<double>(config.epochs);
  return config.min_lr + 0.5 * (config.lr - config.min_lr) * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(const Supernet& supernet, const TrainConfig& config)
    : beta1_(config.beta1), beta2_(config.beta2), eps_(config.eps), weight_decay_(config.weight_decay) {
  for (const auto& [name, p] : supernet.parameters()) {
    slots_.emplace(name, Slot{Tensor(p.shape()), Tensor(p.shape()), std::vector<std::uint32_t>(p.value().size(), 0)});
  }
}

namespace {

bool decays(const std::string& name) {
  const std::string suffix = ".weight";
  return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void AdamW::step(Supernet& supernet, double lr) {
  for (const auto& [name, p] : supernet.parameters()) {
    Node& node = p.node();
    if (node.touched.empty()) continue;
    Slot& s = slots_.at(name);
    Tensor& w = node.value;
    const double wd = decays(name) ? weight_decay_ : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!node.touched[i]) continue;
      const double g = node.grad[i];
      const std::uint32_t t = ++s.steps[i];
      const double m = beta1_ * s.m[i] + (1.0 - beta1_) * g;
      const double v = beta2_ * s.v[i] + (1.0 - beta2_) * g * g;
      s.m[i] = static_cast<float>(m);
      s.v[i] = static_cast<float>(v);
      const double mhat = m / (1.0 - std::pow(beta1_, t));
      const double vhat = v / (1.0 - std::pow(beta2_, t));
      const double updated = w[i] - lr * (mhat / (std::sqrt(vhat) + eps_) + wd * w[i]);
      w[i] = static_cast<float>(updated);
    }
    check_finite(w, name.c_str());
  }
}

SupernetTrainer::SupernetTrainer(Supernet& supernet, const Dataset& train, TrainConfig config)
    : supernet_(&supernet),
      train_(&train),
      config_(config),
      norm_(Normalization::for_dataset(train.name, train.channels())),
      adam_(supernet, config) {
  config_.validate();
  if (train.size() == 0) throw DataError("training set is empty");
  train.validate();
  const auto& s = supernet.settings();
  if (static_cast<int>(train.channels()) != s.in_channels || static_cast<int>(train.height()) != s.image_size ||
      static_cast<int>(train.width()) != s.image_size) {
    throw DataError("training images do not match the supernet input geometry");
  }
  if (train.num_classes > s.num_classes) throw DataError("dataset has more classes than the supernet head");
}

Candidate SupernetTrainer::sample(int epoch, std::size_t step) const {
  Rng rng(mix_seed(mix_seed(config_.seed, static_cast<std::uint64_t>(epoch)), step));
  return random_candidate(supernet_->space(), rng);
}

double SupernetTrainer::train_epoch() {
  const auto batches = batch_indices(train_->size(), static_cast<std::size_t>(config_.batch_size), config_.seed,
                                     static_cast<std::uint64_t>(epoch_));
  const double lr = cosine_lr(config_, epoch_);
  double total = 0.0;
  for (std::size_t step = 0; step < batches.size(); ++step) {
    const Candidate c = sample(epoch_, step);
    Rng flip_rng = Rng(mix_seed(mix_seed(config_.seed, static_cast<std::uint64_t>(epoch_)), step)).fork(1);
    const Batch batch = make_batch(*train_, batches[step], norm_, config_.flip ? &flip_rng : nullptr);
    Subnet subnet(*supernet_, c);
    ForwardOptions opt{ops::BnMode::Train, SpikeFunction::Heaviside, true};
    const ForwardResult out = subnet.forward(batch.images, opt);
    const Variable loss = ops::cross_entropy(out.logits, batch.labels);
    const double value = loss.value().item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch_) + " step " + std::to_string(step) +
                         " for " + format_candidate(c));
    }
    loss.backward();
    adam_.step(*supernet_, lr);
    supernet_->zero_grad();
    subnet.commit_bn_stats();
    total += value;
  }
  const double mean = total / static_cast<double>(batches.size());
  history_.push_back(mean);
  ++epoch_;
  return mean;
}

void SupernetTrainer::run(const std::function<void(int, double)>& on_epoch) {
  while (epoch_ < config_.epochs) {
    const double loss = train_epoch();
    if (on_epoch) on_epoch(epoch_, loss);
  }
}

void SupernetTrainer::restore(int epoch, std::vector<double> history) {
  if (epoch < 0 || static_cast<std::size_t>(epoch) != history.size()) {
    throw ValueError("resume epoch does not match the loss history length");
  }
  epoch_ = epoch;
  history_ = std::move(history);
}

void recalibrate_bn(Subnet& subnet, const Dataset& data, const Normalization& norm,
                    const CalibrationConfig& config) {
  if (config.batches < 1) throw ValueError("calibration needs at least one batch");
  if (config.batch_size < 1) throw ValueError("calibration batch_size must be >= 1");
  if (data.size() == 0) throw DataError("calibration set is empty");
  for (auto& [key, state] : subnet.bn_stats()) state = ops::BnState::fresh(state.running_mean.size());
  const ForwardOptions opt{ops::BnMode::Calibrate, SpikeFunction::Heaviside, false};
  std::vector<std::vector<std::size_t>> batches;
  std::uint64_t pass = 0;
  for (int b = 0; b < config.batches; ++b) {
    if (batches.empty()) {
      batches = batch_indices(data.size(), static_cast<std::size_t>(config.batch_size), config.seed, pass++);
      std::reverse(batches.begin(), batches.end());
    }
    const Batch batch = make_batch(data, batches.back(), norm);
    batches.pop_back();
    subnet.forward(batch.images, opt);
  }
}

EvalResult evaluate(Subnet& subnet, const Candidate& candidate, const Dataset& data, const Normalization& norm,
                    int batch_size) {
  if (data.size() == 0) throw DataError("evaluation set is empty");
  if (batch_size < 1) throw ValueError("batch_size must be >= 1");
  const ForwardOptions opt{ops::BnMode::Eval, SpikeFunction::Heaviside, false};
  LayerFiring firing;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> idx;
    for (std::size_t i = start; i < std::min(data.size(), start + static_cast<std::size_t>(batch_size)); ++i) {
      idx.push_back(i);
    }
    const Batch batch = make_batch(data, idx, norm);
    const ForwardResult out = subnet.forward(batch.images, opt);
    for (const auto& [id, stats] : out.layer_input) firing[id] += stats;
    const Tensor& logits = out.logits.value();
    const std::size_t k = logits.dim(1);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      std::size_t arg = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (logits[b * k + j] > logits[b * k + arg]) arg = j;
      }
      if (static_cast<int>(arg) == batch.labels[b]) ++correct;
    }
  }
  EvalResult r;
  r.candidate = candidate;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  r.fr_trace = to_fr_trace(firing);
  r.energy = model_energy(candidate, subnet.supernet().space(), subnet.supernet().settings(), r.fr_trace);
  return r;
}

InheritedEvaluator::InheritedEvaluator(Supernet& supernet, const Dataset& calibration, const Dataset& eval,
                                       Normalization norm, CalibrationConfig calib, int batch_size)
    : supernet_(&supernet),
      calibration_(&calibration),
      eval_(&eval),
      norm_(std::move(norm)),
      calib_(calib),
      batch_size_(batch_size) {}

EvalResult InheritedEvaluator::run(const Candidate& c) const {
  Subnet subnet = build_subnet(*supernet_, c);
  recalibrate_bn(subnet, *calibration_, norm_, calib_);
  return evaluate(subnet, c, *eval_, norm_, batch_size_);
}

Evaluation InheritedEvaluator::operator()(const Candidate& c) const {
  const EvalResult r = run(c);
  return {r.accuracy, r.energy_joules()};
}

}  // namespace spikenas
