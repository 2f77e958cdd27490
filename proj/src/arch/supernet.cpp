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

#include "spikenas/arch/supernet.hpp"

#include <cmath>

#include "spikenas/error.hpp"

namespace spikenas {

void ModelSettings::validate() const {
  if (in_channels < 1) throw ValueError("in_channels must be >= 1");
  if (num_classes < 2) throw ValueError("num_classes must be >= 2");
  if (image_size < 4 || image_size % 4 != 0) throw ValueError("image_size must be a positive multiple of 4");
  sps_lif.validate();
  if (!(attn_scale > 0.0)) throw ValueError("attention scale must be positive");
}

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

}  // namespace

Supernet::Supernet(const SearchSpace& space, const ModelSettings& settings, std::uint64_t seed)
    : space_(space), settings_(settings) {
  space_.validate();
  settings_.validate();
  Rng rng(seed);
  const int embed = space_.max_embed();
  const int hidden = space_.max_hidden();
  const auto widths = sps_widths(embed);

  int cin = settings_.in_channels;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    add_conv("sps.conv" + std::to_string(i), widths[i], cin, rng);
    cin = widths[i];
  }
  add_conv("sps.rpe", embed, embed, rng);

  auto add_linear = [&](const std::string& name, int out, int in) {
    add_param(name + ".weight",
              uniform_tensor({static_cast<std::size_t>(out), static_cast<std::size_t>(in)}, 1.0 / std::sqrt(in), rng));
    add_bn(name, out);
  };
  for (int l = 0; l < space_.max_depth(); ++l) {
    const std::string p = "block" + std::to_string(l);
    add_linear(p + ".q", embed, embed);
    add_linear(p + ".k", embed, embed);
    add_linear(p + ".v", embed, embed);
    add_linear(p + ".proj", embed, embed);
    add_linear(p + ".fc1", hidden, embed);
    add_linear(p + ".fc2", embed, hidden);
  }
  const auto classes = static_cast<std::size_t>(settings_.num_classes);
  const double bound = 1.0 / std::sqrt(embed);
  add_param("head.weight", uniform_tensor({classes, static_cast<std::size_t>(embed)}, bound, rng));
  add_param("head.bias", uniform_tensor({classes}, bound, rng));
}

void Supernet::add_param(const std::string& name, Tensor value) {
  index_.emplace(name, params_.size());
  params_.emplace_back(name, Variable(std::move(value), true));
}

void Supernet::add_conv(const std::string& name, int cout, int cin, Rng& rng) {
  const double bound = 1.0 / std::sqrt(9.0 * cin);
  add_param(name + ".weight",
            uniform_tensor({static_cast<std::size_t>(cout), static_cast<std::size_t>(cin), 3, 3}, bound, rng));
  add_bn(name, cout);
}

void Supernet::add_bn(const std::string& name, int channels) {
  const auto c = static_cast<std::size_t>(channels);
  add_param(name + ".gamma", Tensor({c}, 1.0f));
  add_param(name + ".beta", Tensor({c}, 0.0f));
  bn_.emplace(name, ops::BnState::fresh(c));
}

const Variable& Supernet::param(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw ValueError("no supernet parameter named '" + name + "'");
  return params_[it->second].second;
}

void Supernet::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

}  // namespace spikenas
