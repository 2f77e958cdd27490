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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "spikenas/data/dataset.hpp"
#include "spikenas/error.hpp"
#include "support.hpp"

using namespace spikenas;
using testing::TempDir;
using testing::write_bytes;

namespace {

std::vector<unsigned char> be32(std::uint32_t v) {
  return {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
}

void append(std::vector<unsigned char>& a, const std::vector<unsigned char>& b) { a.insert(a.end(), b.begin(), b.end()); }

}  // namespace

TEST_CASE("IDX round trip is bit exact") {
  TempDir dir("idx");
  Dataset d;
  d.images = Tensor({2, 1, 3, 4});
  for (std::size_t i = 0; i < d.images.size(); ++i) d.images[i] = float(i * 11 % 256) / 255.0f;
  d.labels = {3, 9};
  d.num_classes = 10;
  save_idx(dir / "img", dir / "lbl", d);
  const Dataset back = load_idx(dir / "img", dir / "lbl");
  CHECK(back.images == d.images);
  CHECK(back.labels == d.labels);
  CHECK(back.height() == 3);
  CHECK(back.width() == 4);
  CHECK(back.name == "mnist");
  CHECK(back.num_classes == 10);
}

TEST_CASE("IDX header and length errors") {
  TempDir dir("idxbad");
  std::vector<unsigned char> img = be32(0x803);
  append(img, be32(2));
  append(img, be32(2));
  append(img, be32(2));
  img.resize(img.size() + 7);  // one byte short
  std::vector<unsigned char> lbl = be32(0x801);
  append(lbl, be32(2));
  lbl.push_back(1);
  lbl.push_back(2);
  write_bytes(dir / "img", img);
  write_bytes(dir / "lbl", lbl);
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl"), DataError);

  img.push_back(0);
  write_bytes(dir / "img", img);
  CHECK_NOTHROW(load_idx(dir / "img", dir / "lbl"));
  img.push_back(0);  // trailing garbage
  write_bytes(dir / "img", img);
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl"), DataError);
  img.pop_back();
  write_bytes(dir / "img", img);

  auto wrong_magic = lbl;
  wrong_magic[3] = 0x03;
  write_bytes(dir / "lbl", wrong_magic);
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl"), DataError);

  auto short_labels = be32(0x801);
  append(short_labels, be32(3));
  append(short_labels, {0, 1, 2});
  write_bytes(dir / "lbl", short_labels);
  CHECK_THROWS_AS(load_idx(dir / "img", dir / "lbl"), DataError);
  CHECK_THROWS_AS(load_idx(dir / "missing", dir / "lbl"), DataError);
}

TEST_CASE("CIFAR-10 record layout") {
  TempDir dir("cifar");
  std::vector<unsigned char> rec(3073);
  rec[0] = 7;
  for (std::size_t i = 0; i < 1024; ++i) {
    rec[1 + i] = 255;         // red plane
    rec[1 + 1024 + i] = 0;    // green plane
    rec[1 + 2048 + i] = 51;   // blue plane
  }
  write_bytes(dir / "test_batch.bin", rec);
  const Dataset d = load_cifar10_bin(dir.path(), Split::Test);
  REQUIRE(d.size() == 1);
  CHECK(d.labels[0] == 7);
  CHECK(d.images.shape() == Shape{1, 3, 32, 32});
  CHECK(d.images.at({0, 0, 5, 5}) == 1.0f);
  CHECK(d.images.at({0, 1, 5, 5}) == 0.0f);
  CHECK(d.images.at({0, 2, 5, 5}) == doctest::Approx(0.2));
  CHECK(d.num_classes == 10);

  rec.pop_back();
  write_bytes(dir / "test_batch.bin", rec);
  CHECK_THROWS_AS(load_cifar10_bin(dir.path(), Split::Test), DataError);
  rec.push_back(0);
  rec[0] = 12;
  write_bytes(dir / "test_batch.bin", rec);
  CHECK_THROWS_AS(load_cifar10_bin(dir.path(), Split::Test), DataError);
  CHECK_THROWS_AS(load_cifar10_bin(dir.path(), Split::Train), DataError);
}

TEST_CASE("CIFAR-100 uses the fine label") {
  TempDir dir("cifar100");
  std::vector<unsigned char> rec(3074, 0);
  rec[0] = 4;   // coarse
  rec[1] = 88;  // fine
  write_bytes(dir / "test.bin", rec);
  const Dataset d = load_cifar100_bin(dir.path(), Split::Test);
  CHECK(d.labels[0] == 88);
  CHECK(d.num_classes == 100);
}

TEST_CASE("synthetic patterns") {
  const Dataset d = synthetic_patterns(1, 3, 16, 10, 3, 0.1);
  CHECK(d.size() == 30);
  CHECK_NOTHROW(d.validate());
  std::vector<int> counts(3, 0);
  for (int l : d.labels) ++counts[l];
  CHECK(counts == std::vector<int>{10, 10, 10});
  CHECK(synthetic_patterns(1, 3, 16, 10).images == d.images);
  CHECK_FALSE(synthetic_patterns(2, 3, 16, 10).images == d.images);

  // Nearest prototype classifies noise-free samples perfectly.
  for (int classes : {3, 10, 12}) {
    const Dataset clean = synthetic_patterns(3, classes, 16, 4, 3, 0.0);
    std::vector<Tensor> protos;
    for (int k = 0; k < classes; ++k) protos.push_back(synthetic_prototype(k, classes, 16, 3));
    const std::size_t per = 3 * 16 * 16;
    int correct = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      int best = -1;
      double best_d = 1e300;
      for (int k = 0; k < classes; ++k) {
        double dist = 0;
        for (std::size_t j = 0; j < per; ++j) dist += std::pow(clean.images[i * per + j] - protos[k][j], 2);
        if (dist < best_d) best_d = dist, best = k;
      }
      correct += best == clean.labels[i];
    }
    CHECK(correct == int(clean.size()));
  }
}

TEST_CASE("batch order") {
  const auto b = batch_indices(10, 3, 5, 0);
  REQUIRE(b.size() == 4);
  CHECK(b[0].size() == 3);
  CHECK(b[3].size() == 1);
  std::set<std::size_t> all;
  for (const auto& v : b) all.insert(v.begin(), v.end());
  CHECK(all.size() == 10);
  CHECK(batch_indices(10, 3, 5, 0) == b);
  CHECK_FALSE(batch_indices(10, 3, 5, 1) == b);
}

TEST_CASE("batches are normalized and flipped") {
  Dataset d = synthetic_patterns(1, 3, 8, 2, 1, 0.0);
  const auto norm = Normalization::for_dataset("mnist", 1);
  CHECK(norm.mean[0] == doctest::Approx(0.1307));
  const auto batch = make_batch(d, {0, 1}, norm);
  CHECK(batch.images.at({1, 0, 2, 3}) == doctest::Approx((d.images.at({1, 0, 2, 3}) - 0.1307) / 0.3081));
  CHECK(batch.labels == std::vector<int>{d.labels[0], d.labels[1]});

  const auto none = Normalization{{0.0f}, {1.0f}};
  Rng rng(1);
  bool flipped = false;
  for (int i = 0; i < 20 && !flipped; ++i) {
    const auto f = make_batch(d, {1}, none, &rng);
    flipped = f.images.at({0, 0, 2, 0}) == d.images.at({1, 0, 2, 7}) && !(f.images == make_batch(d, {1}, none).images);
  }
  CHECK(flipped);
  CHECK(Normalization::for_dataset("cifar10", 3).std[2] == doctest::Approx(0.2616));
}

TEST_CASE("dataset invariants") {
  Dataset d = synthetic_patterns(1, 3, 8, 2, 1, 0.0);
  d.labels[0] = 3;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.labels[0] = 0;
  d.images[0] = 1.5f;
  CHECK_THROWS_AS(d.validate(), DataError);
  const Dataset s = synthetic_patterns(1, 3, 8, 2, 1, 0.0).subset({4, 1});
  CHECK(s.size() == 2);
}
