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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spikenas {

/// Arithmetic grid {lower, lower+step, ..., upper}.
struct SearchDim {
  double lower = 0.0;
  double upper = 0.0;
  double step = 1.0;

  /// Index of `v` on the grid, if it lies on it (1e-9 tolerance).
  std::optional<std::size_t> index_of(double v) const;
  bool contains(double v) const { return index_of(v).has_value(); }
  std::size_t size() const;
  double at(std::size_t i) const;
};

/// All grid values, inclusive of both ends. Throws ValueError for step <= 0,
/// upper < lower, or an upper bound not reachable in whole steps.
std::vector<double> enumerate_choices(const SearchDim& dim);

enum class SpaceKind { SmallTransformer, LargeTransformer, Snn };

/// "s_ts", "s_tl", "s_s".
std::string_view space_name(SpaceKind kind);
SpaceKind parse_space_kind(std::string_view name);

/// The network used while only neuron traits are searched.
struct FixedArch {
  int depth = 4;
  int embed_dim = 384;
  double mlp_ratio = 4.0;
  int heads = 12;
};

struct SearchSpace {
  SpaceKind kind = SpaceKind::Snn;
  SearchDim embed_dim;
  SearchDim mlp_ratio;
  SearchDim head_num;
  SearchDim depth;
  SearchDim u_th{0.6, 2.0, 0.2};
  SearchDim tau{1.25, 10.0, 0.25};
  SearchDim time_step{2.0, 4.0, 1.0};

  static SearchSpace small_transformer();
  static SearchSpace large_transformer();
  /// Neuron-trait space over a fixed network (Spikformer-4-384 by default).
  static SearchSpace snn(const FixedArch& arch = {});
  static SearchSpace from_kind(SpaceKind kind, const FixedArch& arch = {});

  bool is_snn() const noexcept { return kind == SpaceKind::Snn; }
  int max_depth() const;
  int min_depth() const;
  int max_embed() const;
  int max_heads() const;
  /// round(max mlp ratio * max embed).
  int max_hidden() const;
  /// Throws ValueError if any dim is malformed or a head count fails to
  /// divide an embed choice.
  void validate() const;
};

/// Snaps away accumulated binary error, e.g. 0.6 + 2*0.2 -> 1.0.
double snap(double v) noexcept;

}  // namespace spikenas
