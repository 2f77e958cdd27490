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
#include <vector>

#include <json.hpp>

#include "spikenas/train/trainer.hpp"

namespace spikenas {

/// Everything besides tensors needed to rebuild and resume a supernet.
struct CheckpointInfo {
  SearchSpace space;
  ModelSettings settings;
  TrainConfig train;
  std::uint64_t init_seed = 0;
  int epoch = 0;
  std::vector<double> loss_history;
  std::string dataset;
  Normalization norm;
};

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kWeightsFile = "weights.bin";

/// Writes manifest.json and weights.bin (little-endian float32, manifest
/// order: parameters, BN running statistics, optimizer moments and step
/// counts). Both files are replaced atomically.
void save_checkpoint(const std::filesystem::path& dir, const Supernet& supernet, const AdamW* adam,
                     const CheckpointInfo& info);

/// Parses manifest.json. Throws DataError on a malformed manifest.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir);

/// Fills `supernet` (and `adam`, if given) from weights.bin. Every tensor
/// must be present with the shape the supernet declares.
void load_checkpoint_tensors(const std::filesystem::path& dir, Supernet& supernet, AdamW* adam);

/// Exclusive lock file inside a checkpoint directory, released on
/// destruction. Throws DataError when another writer holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

nlohmann::ordered_json to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ModelSettings& settings);
ModelSettings model_settings_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Field-wise equality of two search spaces.
bool same_space(const SearchSpace& a, const SearchSpace& b);

}  // namespace spikenas
