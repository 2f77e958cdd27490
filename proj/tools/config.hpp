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
#include <filesystem>
#include <string>

#include <json.hpp>

#include "spikenas/train/checkpoint.hpp"

namespace spikenas::cli {

/// Where samples come from. `kind` is synthetic, mnist, cifar10 or cifar100;
/// file-backed kinds read from `path`.
struct DataSpec {
  std::string kind = "synthetic";
  std::string path;
  int classes = 10;  // synthetic only
  int size = 32;     // synthetic only
  int channels = 3;  // synthetic only
  int train_per_class = 100;
  int val_per_class = 20;
  double noise = 0.1;
  std::uint64_t seed = 1;
  int limit = 0;  // keep the first `limit` samples of each split; 0 = all

  /// "synthetic", "mnist:DIR", "cifar10:DIR", "cifar100:DIR".
  static DataSpec parse(const std::string& text, DataSpec base);
  /// Input geometry and class count implied by the dataset kind.
  ModelSettings geometry(ModelSettings base) const;
  void validate() const;
};

struct Splits {
  Dataset train;
  Dataset val;
};

/// Loads train and validation splits. File-backed kinds validate on their
/// test split.
Splits load_data(const DataSpec& spec);

struct RunConfig {
  SpaceKind space = SpaceKind::Snn;
  FixedArch fixed;
  ModelSettings model;
  DataSpec data;
  TrainConfig train;
  EvoConfig evo;
  CalibrationConfig calibration;
  int eval_batch_size = 64;
  int top = 100;
  bool baseline = false;
  std::string evaluator = "supernet";  // or "analytic"
  int checkpoint_every = 10;
  std::filesystem::path ckpt = "ckpt";
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;

  SearchSpace search_space() const { return SearchSpace::from_kind(space, fixed); }
  /// Applies the top-level seed to every stage.
  void propagate_seed();
  /// Throws ValueError on the first invalid field.
  void validate() const;
};

/// Reads a JSON config; any key outside the schema is rejected.
RunConfig load_config(const std::filesystem::path& path);
void apply_json(RunConfig& config, const nlohmann::json& j);
nlohmann::ordered_json to_json(const RunConfig& config);

}  // namespace spikenas::cli
