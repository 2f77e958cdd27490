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

#include "config.hpp"

#include <fstream>
#include <set>

#include "spikenas/error.hpp"

namespace spikenas::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ValueError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ValueError("config: unknown key '" + where + (where.empty() ? "" : ".") + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValueError("config: '" + where + (where.empty() ? "" : ".") + key + "' has the wrong type");
  }
}

}  // namespace

DataSpec DataSpec::parse(const std::string& text, DataSpec base) {
  const auto colon = text.find(':');
  base.kind = text.substr(0, colon);
  if (colon != std::string::npos) base.path = text.substr(colon + 1);
  base.validate();
  return base;
}

ModelSettings DataSpec::geometry(ModelSettings base) const {
  if (kind == "synthetic") {
    base.in_channels = channels;
    base.image_size = size;
    base.num_classes = classes;
  } else if (kind == "mnist") {
    base.in_channels = 1;
    base.image_size = 28;
    base.num_classes = 10;
  } else {
    base.in_channels = 3;
    base.image_size = 32;
    base.num_classes = kind == "cifar100" ? 100 : 10;
  }
  return base;
}

void DataSpec::validate() const {
  static const std::set<std::string> kinds{"synthetic", "mnist", "cifar10", "cifar100"};
  if (!kinds.count(kind)) throw ValueError("data kind must be synthetic, mnist, cifar10 or cifar100, got '" + kind + "'");
  if (kind != "synthetic" && path.empty()) throw ValueError("data kind '" + kind + "' needs a directory (kind:DIR)");
  if (kind == "synthetic") {
    if (classes < 2) throw ValueError("data.classes must be >= 2");
    if (size < 4 || size % 4 != 0) throw ValueError("data.size must be a positive multiple of 4");
    if (channels < 1) throw ValueError("data.channels must be >= 1");
    if (train_per_class < 1 || val_per_class < 1) throw ValueError("data.*_per_class must be >= 1");
    if (!(noise >= 0.0)) throw ValueError("data.noise must be >= 0");
  }
  if (limit < 0) throw ValueError("data.limit must be >= 0");
}

namespace {

Dataset head(Dataset ds, int limit) {
  if (limit <= 0 || static_cast<std::size_t>(limit) >= ds.size()) return ds;
  std::vector<std::size_t> idx(static_cast<std::size_t>(limit));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return ds.subset(idx);
}

}  // namespace

Splits load_data(const DataSpec& spec) {
  spec.validate();
  Splits s;
  if (spec.kind == "synthetic") {
    s.train = synthetic_patterns(spec.seed, spec.classes, spec.size, spec.train_per_class, spec.channels, spec.noise,
                                 Split::Train);
    s.val = synthetic_patterns(mix_seed(spec.seed, 1), spec.classes, spec.size, spec.val_per_class, spec.channels,
                               spec.noise, Split::Val);
  } else if (spec.kind == "mnist") {
    const std::filesystem::path dir = spec.path;
    s.train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", Split::Train);
    s.val = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", Split::Test);
  } else if (spec.kind == "cifar10") {
    s.train = load_cifar10_bin(spec.path, Split::Train);
    s.val = load_cifar10_bin(spec.path, Split::Test);
  } else {
    s.train = load_cifar100_bin(spec.path, Split::Train);
    s.val = load_cifar100_bin(spec.path, Split::Test);
  }
  s.train = head(std::move(s.train), spec.limit);
  s.val = head(std::move(s.val), spec.limit);
  s.train.validate();
  s.val.validate();
  return s;
}

void RunConfig::propagate_seed() {
  train.seed = seed;
  evo.seed = seed;
  calibration.seed = seed;
}

void RunConfig::validate() const {
  const SearchSpace s = search_space();
  s.validate();
  model.validate();
  data.validate();
  if (data.geometry(model).num_classes != model.num_classes) throw ValueError("model classes disagree with the data");
  train.validate();
  evo.validate();
  if (calibration.batches < 1 || calibration.batch_size < 1) throw ValueError("calibration needs batches >= 1");
  if (eval_batch_size < 1) throw ValueError("eval_batch_size must be >= 1");
  if (top < 1) throw ValueError("top must be >= 1");
  if (evaluator != "supernet" && evaluator != "analytic") throw ValueError("evaluator must be supernet or analytic");
  if (checkpoint_every < 1) throw ValueError("checkpoint_every must be >= 1");
  if (baseline && evo.total_sample_budget < 1) throw ValueError("--baseline needs a budget >= 1");
}

void apply_json(RunConfig& c, const json& j) {
  reject_unknown(j,
                 {"space", "fixed_arch", "data", "train", "evo", "calibration", "eval_batch_size", "top", "baseline",
                  "evaluator", "checkpoint_every", "ckpt", "out", "seed", "model"},
                 "");
  if (j.contains("space")) {
    std::string name;
    read(j, "space", name, "");
    c.space = parse_space_kind(name);
  }
  if (j.contains("fixed_arch")) {
    const json& f = j.at("fixed_arch");
    reject_unknown(f, {"depth", "embed_dim", "mlp_ratio", "heads"}, "fixed_arch");
    read(f, "depth", c.fixed.depth, "fixed_arch");
    read(f, "embed_dim", c.fixed.embed_dim, "fixed_arch");
    read(f, "mlp_ratio", c.fixed.mlp_ratio, "fixed_arch");
    read(f, "heads", c.fixed.heads, "fixed_arch");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    reject_unknown(m, {"sps_u_th", "sps_tau", "surrogate_width", "attn_scale"}, "model");
    read(m, "sps_u_th", c.model.sps_lif.u_th, "model");
    read(m, "sps_tau", c.model.sps_lif.tau, "model");
    read(m, "surrogate_width", c.model.sps_lif.surrogate_width, "model");
    read(m, "attn_scale", c.model.attn_scale, "model");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown(d,
                   {"kind", "path", "classes", "size", "channels", "train_per_class", "val_per_class", "noise", "seed",
                    "limit"},
                   "data");
    read(d, "kind", c.data.kind, "data");
    read(d, "path", c.data.path, "data");
    read(d, "classes", c.data.classes, "data");
    read(d, "size", c.data.size, "data");
    read(d, "channels", c.data.channels, "data");
    read(d, "train_per_class", c.data.train_per_class, "data");
    read(d, "val_per_class", c.data.val_per_class, "data");
    read(d, "noise", c.data.noise, "data");
    read(d, "seed", c.data.seed, "data");
    read(d, "limit", c.data.limit, "data");
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    reject_unknown(t, {"epochs", "batch_size", "lr", "min_lr", "weight_decay", "beta1", "beta2", "eps", "flip"},
                   "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "lr", c.train.lr, "train");
    read(t, "min_lr", c.train.min_lr, "train");
    read(t, "weight_decay", c.train.weight_decay, "train");
    read(t, "beta1", c.train.beta1, "train");
    read(t, "beta2", c.train.beta2, "train");
    read(t, "eps", c.train.eps, "train");
    read(t, "flip", c.train.flip, "train");
  }
  if (j.contains("evo")) {
    const json& e = j.at("evo");
    reject_unknown(e,
                   {"population", "generations", "parents", "mutation_prob", "crossover_prob", "alpha", "budget",
                    "elitist"},
                   "evo");
    read(e, "population", c.evo.population_size, "evo");
    read(e, "generations", c.evo.generations, "evo");
    read(e, "parents", c.evo.parent_count, "evo");
    read(e, "mutation_prob", c.evo.mutation_prob, "evo");
    read(e, "crossover_prob", c.evo.crossover_prob, "evo");
    read(e, "alpha", c.evo.alpha, "evo");
    read(e, "budget", c.evo.total_sample_budget, "evo");
    read(e, "elitist", c.evo.elitist, "evo");
  }
  if (j.contains("calibration")) {
    const json& b = j.at("calibration");
    reject_unknown(b, {"batches", "batch_size"}, "calibration");
    read(b, "batches", c.calibration.batches, "calibration");
    read(b, "batch_size", c.calibration.batch_size, "calibration");
  }
  read(j, "eval_batch_size", c.eval_batch_size, "");
  read(j, "top", c.top, "");
  read(j, "baseline", c.baseline, "");
  read(j, "evaluator", c.evaluator, "");
  read(j, "checkpoint_every", c.checkpoint_every, "");
  std::string path;
  if (j.contains("ckpt")) {
    read(j, "ckpt", path, "");
    c.ckpt = path;
  }
  if (j.contains("out")) {
    read(j, "out", path, "");
    c.out = path;
  }
  read(j, "seed", c.seed, "");
  c.model = c.data.geometry(c.model);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValueError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValueError("config " + path.string() + ": " + e.what());
  }
  RunConfig c;
  apply_json(c, j);
  return c;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["space"] = std::string(space_name(c.space));
  j["fixed_arch"] = {{"depth", c.fixed.depth},
                     {"embed_dim", c.fixed.embed_dim},
                     {"mlp_ratio", c.fixed.mlp_ratio},
                     {"heads", c.fixed.heads}};
  j["data"] = {{"kind", c.data.kind},
               {"path", c.data.path},
               {"classes", c.data.classes},
               {"size", c.data.size},
               {"channels", c.data.channels},
               {"train_per_class", c.data.train_per_class},
               {"val_per_class", c.data.val_per_class},
               {"noise", c.data.noise},
               {"seed", c.data.seed},
               {"limit", c.data.limit}};
  j["seed"] = c.seed;
  return j;
}

}  // namespace spikenas::cli
