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

#include "spikenas/arch/model.hpp"

#include <functional>

#include "spikenas/error.hpp"

namespace spikenas {

namespace {

using ops::BnMode;

std::size_t sz(int v) { return static_cast<std::size_t>(v); }

ops::BnState& bn_at(BnStore& bn, const std::string& key) {
  const auto it = bn.find(key);
  if (it == bn.end()) throw ValueError("missing BN statistics for layer '" + key + "'");
  return it->second;
}

void record(LayerFiring* sink, const std::string& key, const FiringStats& s) {
  if (sink != nullptr) (*sink)[key] += s;
}

/// LIF over x whose leading axis is time-major [T*B, ...].
Variable lif_time(const Variable& x, int time_step, const LifParams& params, const ForwardOptions& options,
                  LayerFiring* lif_output, const std::string& key) {
  const Shape shape = x.shape();
  const std::size_t per_step = x.value().size() / sz(time_step);
  FiringStats stats;
  Variable spikes = lif(ops::reshape(x, {sz(time_step), per_step}), params, &stats, options.spike_fn);
  record(lif_output, key, stats);
  return ops::reshape(spikes, shape);
}

Variable conv_bn(const ModelWeights::Conv& w, BnStore& bn, const std::string& key, const Variable& x,
                 const ForwardOptions& options) {
  return ops::batchnorm(ops::conv2d(x, w.weight, 1, 1), w.gamma, w.beta, bn_at(bn, key), options.bn_mode);
}

Variable linear_bn(const ModelWeights::Conv& w, BnStore& bn, const std::string& key, const Variable& x,
                   const ForwardOptions& options) {
  return ops::batchnorm(ops::linear(x, w.weight), w.gamma, w.beta, bn_at(bn, key), options.bn_mode);
}

}  // namespace

Variable spiking_attention(const Variable& q, const Variable& k, const Variable& v, int heads, double scale) {
  const Shape& s = q.shape();
  if (s.size() != 3) throw ShapeError("spiking_attention expects [T*B, N, D], got " + to_string(s));
  const std::size_t tb = s[0], n = s[1], d = s[2];
  if (heads < 1 || d % sz(heads) != 0) {
    throw ShapeError("embed dim " + std::to_string(d) + " is not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / sz(heads);
  const std::vector<std::size_t> split{0, 2, 1, 3};
  auto to_heads = [&](const Variable& x) { return ops::permute(ops::reshape(x, {tb, n, sz(heads), dh}), split); };
  const Variable qh = to_heads(q), kh = to_heads(k), vh = to_heads(v);
  const Variable scores = ops::matmul(qh, ops::transpose_last2(kh));
  const Variable out = ops::scale(ops::matmul(scores, vh), static_cast<float>(scale));
  return ops::reshape(ops::permute(out, split), {tb, n, d});
}

Variable rate_decode(const Variable& spikes) {
  if (spikes.shape().size() != 4) throw ShapeError("rate_decode expects [T, B, N, D]");
  return ops::mean_axis(ops::mean_axis(spikes, 2), 0);
}

Variable sps_forward(const ModelWeights& weights, const SubnetConfig& config, const ModelSettings& settings,
                     BnStore& bn, const Tensor& images, const ForwardOptions& options, LayerFiring* layer_input,
                     LayerFiring* lif_output) {
  if (images.rank() != 4) throw ShapeError("images must be [B, C, H, W], got " + to_string(images.shape()));
  const std::size_t batch = images.dim(0), channels = images.dim(1), h = images.dim(2), w = images.dim(3);
  if (channels != sz(settings.in_channels)) {
    throw ShapeError("expected " + std::to_string(settings.in_channels) + " input channels, got " +
                     std::to_string(channels));
  }
  if (h % 4 != 0 || w % 4 != 0 || h == 0 || w == 0) {
    throw ShapeError("image size " + std::to_string(h) + "x" + std::to_string(w) + " is not divisible by 4");
  }
  if (config.time_step < 1) throw ValueError("time_step must be >= 1");
  const auto steps = sz(config.time_step);

  // Direct coding: the static frame is presented at every time step.
  Tensor repeated({steps * batch, channels, h, w});
  const std::size_t frame = images.size();
  for (std::size_t t = 0; t < steps; ++t) {
    std::copy(images.data().begin(), images.data().end(),
              repeated.data().begin() + static_cast<std::ptrdiff_t>(t * frame));
  }
  Variable x(std::move(repeated), false);

  for (std::size_t i = 0; i < 4; ++i) {
    const std::string key = "sps.conv" + std::to_string(i);
    if (i > 0) record(layer_input, key, count_spikes(x.value()));
    x = lif_time(conv_bn(weights.sps[i], bn, key, x, options), config.time_step, settings.sps_lif, options,
                 lif_output, "sps.lif" + std::to_string(i));
    if (i == 1 || i == 3) x = ops::max_pool2d(x, 3, 2, 1);
  }
  record(layer_input, "sps.rpe", count_spikes(x.value()));
  const Variable rpe = conv_bn(weights.rpe, bn, "sps.rpe", x, options);
  // Spike-wise residual: token values are spike counts in {0, 1, 2}.
  x = ops::add(lif_time(rpe, config.time_step, settings.sps_lif, options, lif_output, "sps.rpe_lif"), x);

  // [T*B, D, H', W'] -> [T, B, N, D]
  const Shape& s = x.shape();
  const std::size_t d = s[1], n = s[2] * s[3];
  x = ops::transpose_last2(ops::reshape(x, {steps * batch, d, n}));
  return ops::reshape(x, {steps, batch, n, d});
}

Variable block_forward(const ModelWeights::Block& w, const BlockConfig& block, int time_step, double attn_scale,
                       BnStore& bn, const std::string& prefix, const Variable& x, const ForwardOptions& options,
                       LayerFiring* layer_input, LayerFiring* lif_output) {
  const Shape& s = x.shape();
  if (s.size() != 3) throw ShapeError("block input must be [T*B, N, D], got " + to_string(s));
  const std::size_t tb = s[0], n = s[1], d = s[2];
  const Variable flat = ops::reshape(x, {tb * n, d});
  const FiringStats in_stats = count_spikes(flat.value());
  const LifParams& lp = block.lif;

  auto project = [&](const ModelWeights::Conv& cw, const char* name, const Variable& in) {
    const std::string key = prefix + "." + name;
    return lif_time(linear_bn(cw, bn, key, in, options), time_step, lp, options, lif_output, key + "_lif");
  };

  record(layer_input, prefix + ".q", in_stats);
  record(layer_input, prefix + ".k", in_stats);
  record(layer_input, prefix + ".v", in_stats);
  const Variable q = project(w.q, "q", flat);
  const Variable k = project(w.k, "k", flat);
  const Variable v = project(w.v, "v", flat);
  FiringStats qkv = count_spikes(q.value());
  qkv += count_spikes(k.value());
  qkv += count_spikes(v.value());
  record(layer_input, prefix + ".attn", qkv);

  const Variable attn = spiking_attention(ops::reshape(q, {tb, n, d}), ops::reshape(k, {tb, n, d}),
                                          ops::reshape(v, {tb, n, d}), block.heads, attn_scale);
  const Variable attn_spikes =
      lif_time(ops::reshape(attn, {tb * n, d}), time_step, lp, options, lif_output, prefix + ".attn_lif");

  record(layer_input, prefix + ".proj", count_spikes(attn_spikes.value()));
  const Variable proj = linear_bn(w.proj, bn, prefix + ".proj", attn_spikes, options);
  const Variable y = ops::add(flat, lif_time(proj, time_step, lp, options, lif_output, prefix + ".proj_lif"));

  record(layer_input, prefix + ".fc1", count_spikes(y.value()));
  const Variable hidden = project(w.fc1, "fc1", y);
  record(layer_input, prefix + ".fc2", count_spikes(hidden.value()));
  const Variable mlp = linear_bn(w.fc2, bn, prefix + ".fc2", hidden, options);
  const Variable out = ops::add(y, lif_time(mlp, time_step, lp, options, lif_output, prefix + ".fc2_lif"));
  return ops::reshape(out, {tb, n, d});
}

ForwardResult run_model(const ModelWeights& weights, const SubnetConfig& config, const ModelSettings& settings,
                        BnStore& bn, const Tensor& images, const ForwardOptions& options) {
  if (weights.blocks.size() < config.blocks.size()) throw ValueError("model has fewer blocks than the config");
  ForwardResult result;
  Variable tokens =
      sps_forward(weights, config, settings, bn, images, options, &result.layer_input, &result.lif_output);
  const Shape ts = tokens.shape();  // [T, B, N, D]
  Variable x = ops::reshape(tokens, {ts[0] * ts[1], ts[2], ts[3]});
  for (std::size_t l = 0; l < config.blocks.size(); ++l) {
    x = block_forward(weights.blocks[l], config.blocks[l], config.time_step, settings.attn_scale, bn,
                      "block" + std::to_string(l), x, options, &result.layer_input, &result.lif_output);
  }
  record(&result.layer_input, "head", count_spikes(x.value()));
  result.features = rate_decode(ops::reshape(x, ts));
  result.logits = ops::linear(result.features, weights.head_weight, weights.head_bias);
  return result;
}

// ---------------------------------------------------------------------------

Subnet::Subnet(Supernet& supernet, SubnetConfig config) : supernet_(&supernet), config_(std::move(config)) {
  if (config_.depth() > supernet.space().max_depth()) throw ValueError("subnet deeper than the supernet");
  for (const auto& [name, shape] : slice_shapes()) {
    const auto dot = name.rfind('.');
    if (name.compare(dot + 1, std::string::npos, "gamma") != 0) continue;
    const std::string key = name.substr(0, dot);
    const auto& full = supernet.bn_stats().at(key);
    bn_.emplace(key, ops::BnState{full.running_mean.leading_slice(shape), full.running_var.leading_slice(shape),
                                  full.calibration_batches});
  }
}

Subnet::Subnet(Supernet& supernet, const Candidate& candidate)
    : Subnet(supernet, resolve(candidate, supernet.space())) {}

std::map<std::string, Shape> Subnet::slice_shapes() const {
  std::map<std::string, Shape> out;
  const auto& settings = supernet_->settings();
  const auto e = sz(config_.embed_dim);
  const auto widths = sps_widths(config_.embed_dim);
  auto conv = [&](const std::string& name, std::size_t cout, std::size_t cin, std::size_t k) {
    out[name + ".weight"] = k == 0 ? Shape{cout, cin} : Shape{cout, cin, k, k};
    out[name + ".gamma"] = {cout};
    out[name + ".beta"] = {cout};
  };
  std::size_t cin = sz(settings.in_channels);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    conv("sps.conv" + std::to_string(i), sz(widths[i]), cin, 3);
    cin = sz(widths[i]);
  }
  conv("sps.rpe", e, e, 3);
  for (std::size_t l = 0; l < config_.blocks.size(); ++l) {
    const std::string p = "block" + std::to_string(l);
    const auto hidden = sz(config_.blocks[l].hidden);
    for (const char* name : {".q", ".k", ".v", ".proj"}) conv(p + name, e, e, 0);
    conv(p + ".fc1", hidden, e, 0);
    conv(p + ".fc2", e, hidden, 0);
  }
  out["head.weight"] = {sz(settings.num_classes), e};
  out["head.bias"] = {sz(settings.num_classes)};
  return out;
}

namespace {

ModelWeights assemble(const std::map<std::string, Shape>& shapes, int depth,
                      const std::function<Variable(const std::string&, const Shape&)>& get) {
  auto conv = [&](const std::string& name) {
    return ModelWeights::Conv{get(name + ".weight", shapes.at(name + ".weight")),
                              get(name + ".gamma", shapes.at(name + ".gamma")),
                              get(name + ".beta", shapes.at(name + ".beta"))};
  };
  ModelWeights w;
  for (int i = 0; i < 4; ++i) w.sps.push_back(conv("sps.conv" + std::to_string(i)));
  w.rpe = conv("sps.rpe");
  for (int l = 0; l < depth; ++l) {
    const std::string p = "block" + std::to_string(l);
    w.blocks.push_back({conv(p + ".q"), conv(p + ".k"), conv(p + ".v"), conv(p + ".proj"), conv(p + ".fc1"),
                        conv(p + ".fc2")});
  }
  w.head_weight = get("head.weight", shapes.at("head.weight"));
  w.head_bias = get("head.bias", shapes.at("head.bias"));
  return w;
}

}  // namespace

ModelWeights Subnet::weights(bool grad) const {
  const Supernet& net = *supernet_;
  return assemble(slice_shapes(), config_.depth(), [&](const std::string& name, const Shape& shape) {
    const Variable& p = net.param(name);
    if (grad) return ops::narrow_leading(p, shape);
    return Variable(p.value().leading_slice(shape), false);
  });
}

ForwardResult Subnet::forward(const Tensor& images, const ForwardOptions& options) {
  return run_model(weights(options.grad), config_, supernet_->settings(), bn_, images, options);
}

void Subnet::commit_bn_stats() const {
  for (const auto& [key, local] : bn_) {
    auto& full = supernet_->bn_stats().at(key);
    for (std::size_t c = 0; c < local.running_mean.size(); ++c) {
      full.running_mean[c] = local.running_mean[c];
      full.running_var[c] = local.running_var[c];
    }
  }
}

ModelWeights full_weights(const Supernet& supernet) {
  std::map<std::string, Shape> shapes;
  for (const auto& [name, p] : supernet.parameters()) shapes[name] = p.shape();
  return assemble(shapes, supernet.space().max_depth(),
                  [&](const std::string& name, const Shape&) { return supernet.param(name); });
}

Subnet build_subnet(Supernet& supernet, const Candidate& candidate) { return Subnet(supernet, candidate); }

StandaloneModel::StandaloneModel(const Subnet& subnet)
    : config_(subnet.config()), settings_(subnet.supernet().settings()), bn_(subnet.bn_stats()) {
  const auto shapes = subnet.slice_shapes();
  const Supernet& net = subnet.supernet();
  weights_ = assemble(shapes, config_.depth(), [&](const std::string& name, const Shape& shape) {
    Tensor copy(shape);
    const Tensor src = net.param(name).value().leading_slice(shape);
    std::copy(src.data().begin(), src.data().end(), copy.data().begin());
    return Variable(std::move(copy), true);
  });
}

ForwardResult StandaloneModel::forward(const Tensor& images, const ForwardOptions& options) {
  return run_model(weights_, config_, settings_, bn_, images, options);
}

}  // namespace spikenas
