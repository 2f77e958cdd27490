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
#include <string_view>
#include <vector>

#include "spikenas/tensor/rng.hpp"
#include "spikenas/tensor/tensor.hpp"

namespace spikenas {

enum class Split { Train, Val, Test };
std::string_view split_name(Split s);

/// Images [N, C, H, W] with pixels in [0, 1] and labels in [0, num_classes).
struct Dataset {
  Tensor images;
  std::vector<int> labels;
  int num_classes = 0;
  Split split = Split::Train;
  std::string name;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t channels() const { return images.dim(1); }
  std::size_t height() const { return images.dim(2); }
  std::size_t width() const { return images.dim(3); }

  /// Throws DataError on a broken invariant.
  void validate() const;
  /// Samples `indices` in order, as a new dataset.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

/// Per-channel (x - mean) / std applied when batches are assembled.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> std;

  /// Fixed constants for "mnist", "cifar10", "cifar100" and "synthetic".
  static Normalization for_dataset(std::string_view name, std::size_t channels);
  void apply(Tensor& batch) const;
};

/// IDX pair (magic 0x00000803 images, 0x00000801 labels), pixels / 255.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 Split split = Split::Train);
/// Writes an IDX pair; pixels are rounded to round(255 * x).
void save_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
              const Dataset& dataset);

/// CIFAR-10 binary batches in `dir`: data_batch_1..5.bin for Train,
/// test_batch.bin for Test. 3073-byte records, CHW planes.
Dataset load_cifar10_bin(const std::filesystem::path& dir, Split split = Split::Train);
/// Explicit list of CIFAR-10 batch files.
Dataset load_cifar10_files(const std::vector<std::filesystem::path>& files, Split split);
/// CIFAR-100 binary (train.bin / test.bin), 3074-byte records, fine labels.
Dataset load_cifar100_bin(const std::filesystem::path& dir, Split split = Split::Train);

/// K fixed geometric prototypes (bars, diagonal, disk, frame, checker, with
/// shifts and channel tints for K > 6) plus Gaussian noise, clamped to [0, 1].
Dataset synthetic_patterns(std::uint64_t seed, int classes, int size, int samples_per_class, int channels = 3,
                           double noise = 0.1, Split split = Split::Train);
/// The noise-free image of one class.
Tensor synthetic_prototype(int label, int classes, int size, int channels);

/// Deterministic permutation for (seed, epoch), cut into batches; the final
/// short batch is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch);

struct Batch {
  Tensor images;  // normalized [B, C, H, W]
  std::vector<int> labels;
};

/// Gathers `indices`, optionally flipping each image horizontally with p = 1/2.
Batch make_batch(const Dataset& dataset, const std::vector<std::size_t>& indices, const Normalization& norm,
                 Rng* flip_rng = nullptr);

}  // namespace spikenas
