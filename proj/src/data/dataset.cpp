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

#include "spikenas/data/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iterator>

#include "spikenas/error.hpp"

namespace spikenas {

namespace fs = std::filesystem;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

void Dataset::validate() const {
  if (images.rank() != 4) throw DataError("dataset images must be [N, C, H, W]");
  if (images.dim(0) != labels.size()) throw DataError("dataset label count does not match image count");
  if (num_classes < 1) throw DataError("dataset needs at least one class");
  for (int l : labels) {
    if (l < 0 || l >= num_classes) throw DataError("label " + std::to_string(l) + " outside [0, num_classes)");
  }
  for (float v : images.data()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw DataError("pixel outside [0, 1]");
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  const std::size_t per = images.size() / std::max<std::size_t>(size(), 1);
  Shape shape = images.shape();
  shape[0] = indices.size();
  Dataset out{Tensor(shape), {}, num_classes, split, name};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices.at(i);
    if (src >= size()) throw ValueError("subset index out of range");
    std::copy_n(images.data().begin() + static_cast<std::ptrdiff_t>(src * per), per,
                out.images.data().begin() + static_cast<std::ptrdiff_t>(i * per));
    out.labels.push_back(labels[src]);
  }
  return out;
}

Normalization Normalization::for_dataset(std::string_view name, std::size_t channels) {
  Normalization n;
  if (name == "mnist") {
    n.mean = {0.1307f};
    n.std = {0.3081f};
  } else if (name == "cifar10") {
    n.mean = {0.4914f, 0.4822f, 0.4465f};
    n.std = {0.2470f, 0.2435f, 0.2616f};
  } else if (name == "cifar100") {
    n.mean = {0.5071f, 0.4865f, 0.4409f};
    n.std = {0.2673f, 0.2564f, 0.2762f};
  } else {
    n.mean = {0.5f};
    n.std = {0.5f};
  }
  if (n.mean.size() != channels) {
    n.mean.assign(channels, n.mean.front());
    n.std.assign(channels, n.std.front());
  }
  return n;
}

void Normalization::apply(Tensor& batch) const {
  if (batch.rank() != 4 || batch.dim(1) != mean.size()) throw ShapeError("normalization channel mismatch");
  const std::size_t n = batch.dim(0), c = batch.dim(1), hw = batch.dim(2) * batch.dim(3);
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = &batch[(b * c + ch) * hw];
      for (std::size_t i = 0; i < hw; ++i) p[i] = (p[i] - mean[ch]) / std[ch];
    }
  }
}

namespace {

std::vector<unsigned char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t off, const fs::path& path) {
  if (off + 4 > buf.size()) throw DataError(path.string() + ": truncated IDX header");
  return (std::uint32_t{buf[off]} << 24) | (std::uint32_t{buf[off + 1]} << 16) | (std::uint32_t{buf[off + 2]} << 8) |
         std::uint32_t{buf[off + 3]};
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                              static_cast<char>(v)};
  out.write(b.data(), 4);
}

constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

}  // namespace

Dataset load_idx(const fs::path& images_path, const fs::path& labels_path, Split split) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  if (read_be32(img, 0, images_path) != kIdxImages) throw DataError(images_path.string() + ": bad IDX image magic");
  if (read_be32(lab, 0, labels_path) != kIdxLabels) throw DataError(labels_path.string() + ": bad IDX label magic");
  const std::size_t n = read_be32(img, 4, images_path);
  const std::size_t rows = read_be32(img, 8, images_path);
  const std::size_t cols = read_be32(img, 12, images_path);
  const std::size_t nl = read_be32(lab, 4, labels_path);
  if (n != nl) {
    throw DataError("IDX count mismatch: " + std::to_string(n) + " images vs " + std::to_string(nl) + " labels");
  }
  const std::size_t pixels = n * rows * cols;
  if (img.size() < 16 + pixels) {
    throw DataError(images_path.string() + ": truncated, expected " + std::to_string(16 + pixels) + " bytes, got " +
                    std::to_string(img.size()));
  }
  if (img.size() > 16 + pixels) throw DataError(images_path.string() + ": trailing bytes after image data");
  if (lab.size() < 8 + n) throw DataError(labels_path.string() + ": truncated label data");
  if (lab.size() > 8 + n) throw DataError(labels_path.string() + ": trailing bytes after label data");

  Dataset ds{Tensor({n, 1, rows, cols}), std::vector<int>(n), 0, split, "mnist"};
  for (std::size_t i = 0; i < pixels; ++i) ds.images[i] = static_cast<float>(img[16 + i]) / 255.0f;
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = lab[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.num_classes = std::max(10, max_label + 1);
  return ds;
}

void save_idx(const fs::path& images_path, const fs::path& labels_path, const Dataset& dataset) {
  if (dataset.images.rank() != 4 || dataset.channels() != 1) throw ValueError("IDX stores single-channel images");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw DataError("cannot write IDX files");
  const auto n = static_cast<std::uint32_t>(dataset.size());
  put_be32(img, kIdxImages);
  put_be32(img, n);
  put_be32(img, static_cast<std::uint32_t>(dataset.height()));
  put_be32(img, static_cast<std::uint32_t>(dataset.width()));
  for (float v : dataset.images.data()) {
    img.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f))));
  }
  put_be32(lab, kIdxLabels);
  put_be32(lab, n);
  for (int l : dataset.labels) lab.put(static_cast<char>(static_cast<unsigned char>(l)));
}

namespace {

Dataset load_cifar_records(const std::vector<fs::path>& files, Split split, std::size_t label_bytes,
                           std::size_t label_offset, int classes, const char* name) {
  constexpr std::size_t kPixels = 3 * 32 * 32;
  const std::size_t record = label_bytes + kPixels;
  std::vector<std::vector<unsigned char>> blobs;
  std::size_t total = 0;
  for (const auto& f : files) {
    blobs.push_back(read_file(f));
    if (blobs.back().empty() || blobs.back().size() % record != 0) {
      throw DataError(f.string() + ": size " + std::to_string(blobs.back().size()) + " is not a multiple of the " +
                      std::to_string(record) + "-byte record");
    }
    total += blobs.back().size() / record;
  }
  Dataset ds{Tensor({total, 3, 32, 32}), std::vector<int>(total), classes, split, name};
  std::size_t k = 0;
  for (std::size_t fi = 0; fi < blobs.size(); ++fi) {
    const auto& b = blobs[fi];
    for (std::size_t off = 0; off < b.size(); off += record, ++k) {
      const int label = b[off + label_offset];
      if (label >= classes) {
        throw DataError(files[fi].string() + ": label " + std::to_string(label) + " >= " + std::to_string(classes));
      }
      ds.labels[k] = label;
      for (std::size_t p = 0; p < kPixels; ++p) {
        ds.images[k * kPixels + p] = static_cast<float>(b[off + label_bytes + p]) / 255.0f;
      }
    }
  }
  return ds;
}

}  // namespace

Dataset load_cifar10_files(const std::vector<fs::path>& files, Split split) {
  return load_cifar_records(files, split, 1, 0, 10, "cifar10");
}

Dataset load_cifar10_bin(const fs::path& dir, Split split) {
  std::vector<fs::path> files;
  if (split == Split::Test) {
    files.push_back(dir / "test_batch.bin");
  } else {
    for (int i = 1; i <= 5; ++i) files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
  }
  return load_cifar10_files(files, split);
}

Dataset load_cifar100_bin(const fs::path& dir, Split split) {
  const fs::path file = dir / (split == Split::Test ? "test.bin" : "train.bin");
  return load_cifar_records({file}, split, 2, 1, 100, "cifar100");
}

Tensor synthetic_prototype(int label, int classes, int size, int channels) {
  if (classes < 2) throw ValueError("synthetic data needs at least 2 classes");
  if (size < 4 || channels < 1 || label < 0 || label >= classes) throw ValueError("bad synthetic prototype request");
  const auto s = static_cast<std::size_t>(size);
  const auto c = static_cast<std::size_t>(channels);
  const int kind = label % 6;
  const int variant = label / 6;
  const int shift = variant * std::max(size / 8, 1);
  const int band = std::max(size / 8, 1);
  const int mid = size / 2;
  Tensor proto({c, s, s});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int sy = (y + shift) % size;
      const int sx = (x + shift) % size;
      bool on = false;
      switch (kind) {
        case 0:
          on = std::abs(sy - mid) < band;
          break;
        case 1:
          on = std::abs(sx - mid) < band;
          break;
        case 2:
          on = std::abs(sx - sy) < band;
          break;
        case 3: {
          const int dy = sy - mid, dx = sx - mid;
          on = dy * dy + dx * dx <= (size / 4) * (size / 4);
          break;
        }
        case 4:
          on = sx < band || sy < band || sx >= size - band || sy >= size - band;
          break;
        default:
          on = ((sx / std::max(size / 4, 1)) + (sy / std::max(size / 4, 1))) % 2 == 0;
          break;
      }
      if (!on) continue;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double tint = c == 1 ? 1.0 : 1.0 - 0.5 * static_cast<double>((ch + static_cast<std::size_t>(variant)) % c) /
                                                   static_cast<double>(c - 1);
        proto[(ch * s + static_cast<std::size_t>(y)) * s + static_cast<std::size_t>(x)] = static_cast<float>(tint);
      }
    }
  }
  return proto;
}

Dataset synthetic_patterns(std::uint64_t seed, int classes, int size, int samples_per_class, int channels,
                           double noise, Split split) {
  if (classes < 2) throw ValueError("synthetic data needs at least 2 classes");
  if (samples_per_class < 1) throw ValueError("samples_per_class must be >= 1");
  if (noise < 0.0) throw ValueError("noise must be non-negative");
  const auto s = static_cast<std::size_t>(size);
  const auto c = static_cast<std::size_t>(channels);
  const std::size_t per = c * s * s;
  const std::size_t n = static_cast<std::size_t>(classes) * static_cast<std::size_t>(samples_per_class);
  Dataset ds{Tensor({n, c, s, s}), std::vector<int>(n), classes, split, "synthetic"};
  std::vector<Tensor> protos;
  for (int k = 0; k < classes; ++k) protos.push_back(synthetic_prototype(k, classes, size, channels));
  Rng rng(seed);
  // Interleave classes so any prefix is roughly balanced.
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    ds.labels[i] = label;
    const Tensor& p = protos[static_cast<std::size_t>(label)];
    for (std::size_t j = 0; j < per; ++j) {
      const double v = p[j] + (noise > 0.0 ? noise * rng.normal() : 0.0);
      ds.images[i * per + j] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
  return ds;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::uint64_t epoch) {
  if (batch_size == 0) throw ValueError("batch_size must be >= 1");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(mix_seed(seed, epoch));
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += batch_size) {
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                     perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size)));
  }
  return out;
}

Batch make_batch(const Dataset& dataset, const std::vector<std::size_t>& indices, const Normalization& norm,
                 Rng* flip_rng) {
  const std::size_t c = dataset.channels(), h = dataset.height(), w = dataset.width();
  const std::size_t per = c * h * w;
  Batch b{Tensor({indices.size(), c, h, w}), {}};
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const std::size_t src = indices[i];
    if (src >= dataset.size()) throw ValueError("batch index out of range");
    const float* in = &dataset.images[src * per];
    float* out = &b.images[i * per];
    const bool flip = flip_rng != nullptr && flip_rng->bernoulli(0.5);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          out[(ch * h + y) * w + x] = in[(ch * h + y) * w + (flip ? w - 1 - x : x)];
        }
      }
    }
    b.labels.push_back(dataset.labels[src]);
  }
  norm.apply(b.images);
  return b;
}

}  // namespace spikenas
