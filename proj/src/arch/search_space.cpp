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

#include "spikenas/arch/search_space.hpp"

#include <cmath>

#include "spikenas/error.hpp"

namespace spikenas {

namespace {

constexpr double kGridTolerance = 1e-9;

std::size_t checked_steps(const SearchDim& d) {
  if (!(d.step > 0.0) || !std::isfinite(d.step)) throw ValueError("search dim step must be > 0");
  if (!(d.upper >= d.lower)) throw ValueError("search dim upper bound is below the lower bound");
  const double n = (d.upper - d.lower) / d.step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6) {
    throw ValueError("search dim upper bound is not reachable from the lower bound in whole steps");
  }
  return static_cast<std::size_t>(rounded);
}

}  // namespace

double snap(double v) noexcept { return std::round(v * 1e9) / 1e9; }

std::size_t SearchDim::size() const { return checked_steps(*this) + 1; }

double SearchDim::at(std::size_t i) const { return snap(lower + static_cast<double>(i) * step); }

std::optional<std::size_t> SearchDim::index_of(double v) const {
  const std::size_t n = checked_steps(*this);
  const double pos = std::round((v - lower) / step);
  if (pos < 0.0 || pos > static_cast<double>(n)) return std::nullopt;
  const auto i = static_cast<std::size_t>(pos);
  if (std::abs(at(i) - v) > kGridTolerance) return std::nullopt;
  return i;
}

std::vector<double> enumerate_choices(const SearchDim& dim) {
  const std::size_t n = checked_steps(dim);
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(dim.at(i));
  return out;
}

std::string_view space_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::SmallTransformer:
      return "s_ts";
    case SpaceKind::LargeTransformer:
      return "s_tl";
    case SpaceKind::Snn:
      return "s_s";
  }
  return "?";
}

SpaceKind parse_space_kind(std::string_view name) {
  if (name == "s_ts") return SpaceKind::SmallTransformer;
  if (name == "s_tl") return SpaceKind::LargeTransformer;
  if (name == "s_s") return SpaceKind::Snn;
  throw ValueError("unknown search space '" + std::string(name) + "' (expected s_ts, s_tl or s_s)");
}

SearchSpace SearchSpace::small_transformer() {
  SearchSpace s;
  s.kind = SpaceKind::SmallTransformer;
  s.embed_dim = {336, 384, 12};
  s.mlp_ratio = {3.0, 4.0, 0.2};
  s.head_num = {6, 12, 6};
  s.depth = {2, 4, 1};
  return s;
}

SearchSpace SearchSpace::large_transformer() {
  SearchSpace s;
  s.kind = SpaceKind::LargeTransformer;
  s.embed_dim = {336, 480, 48};
  s.mlp_ratio = {3.0, 5.0, 0.2};
  s.head_num = {6, 12, 6};
  s.depth = {2, 6, 1};
  return s;
}

SearchSpace SearchSpace::snn(const FixedArch& arch) {
  SearchSpace s;
  s.kind = SpaceKind::Snn;
  const auto e = static_cast<double>(arch.embed_dim);
  const auto h = static_cast<double>(arch.heads);
  const auto d = static_cast<double>(arch.depth);
  s.embed_dim = {e, e, 1};
  s.mlp_ratio = {arch.mlp_ratio, arch.mlp_ratio, 1};
  s.head_num = {h, h, 1};
  s.depth = {d, d, 1};
  s.validate();
  return s;
}

SearchSpace SearchSpace::from_kind(SpaceKind kind, const FixedArch& arch) {
  switch (kind) {
    case SpaceKind::SmallTransformer:
      return small_transformer();
    case SpaceKind::LargeTransformer:
      return large_transformer();
    case SpaceKind::Snn:
      return snn(arch);
  }
  throw ValueError("unknown search space kind");
}

int SearchSpace::max_depth() const { return static_cast<int>(std::lround(depth.at(depth.size() - 1))); }
int SearchSpace::min_depth() const { return static_cast<int>(std::lround(depth.lower)); }
int SearchSpace::max_embed() const { return static_cast<int>(std::lround(embed_dim.at(embed_dim.size() - 1))); }
int SearchSpace::max_heads() const { return static_cast<int>(std::lround(head_num.at(head_num.size() - 1))); }

int SearchSpace::max_hidden() const {
  return static_cast<int>(std::lround(mlp_ratio.at(mlp_ratio.size() - 1) * max_embed()));
}

void SearchSpace::validate() const {
  for (const SearchDim* d : {&embed_dim, &mlp_ratio, &head_num, &depth, &u_th, &tau, &time_step}) {
    (void)enumerate_choices(*d);
  }
  if (depth.lower < 1) throw ValueError("depth must be >= 1");
  if (time_step.lower < 1) throw ValueError("time-step must be >= 1");
  if (u_th.lower <= 0) throw ValueError("thresholds must be positive");
  if (tau.lower <= 1) throw ValueError("tau choices must exceed 1");
  for (double e : enumerate_choices(embed_dim)) {
    if (e < 8 || e != std::round(e)) throw ValueError("embed dim choices must be integers >= 8");
    for (double h : enumerate_choices(head_num)) {
      if (std::fmod(e, h) != 0.0) {
        throw ValueError("head count " + std::to_string(static_cast<int>(h)) + " does not divide embed dim " +
                         std::to_string(static_cast<int>(e)));
      }
    }
  }
}

}  // namespace spikenas
