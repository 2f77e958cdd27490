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

#include "spikenas/train/checkpoint.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstring>
#include <fstream>

#include "spikenas/error.hpp"

namespace spikenas {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json dim_json(const SearchDim& d) { return ordered_json::array({d.lower, d.upper, d.step}); }

SearchDim dim_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("search dimension must be [lower, upper, step]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

ordered_json to_json(const SearchSpace& s) {
  ordered_json j;
  j["kind"] = std::string(space_name(s.kind));
  j["embed_dim"] = dim_json(s.embed_dim);
  j["mlp_ratio"] = dim_json(s.mlp_ratio);
  j["head_num"] = dim_json(s.head_num);
  j["depth"] = dim_json(s.depth);
  j["u_th"] = dim_json(s.u_th);
  j["tau"] = dim_json(s.tau);
  j["time_step"] = dim_json(s.time_step);
  return j;
}

SearchSpace search_space_from_json(const json& j) {
  SearchSpace s;
  s.kind = parse_space_kind(j.at("kind").get<std::string>());
  s.embed_dim = dim_from(j.at("embed_dim"));
  s.mlp_ratio = dim_from(j.at("mlp_ratio"));
  s.head_num = dim_from(j.at("head_num"));
  s.depth = dim_from(j.at("depth"));
  s.u_th = dim_from(j.at("u_th"));
  s.tau = dim_from(j.at("tau"));
  s.time_step = dim_from(j.at("time_step"));
  s.validate();
  return s;
}

ordered_json to_json(const ModelSettings& m) {
  ordered_json j;
  j["in_channels"] = m.in_channels;
  j["num_classes"] = m.num_classes;
  j["image_size"] = m.image_size;
  j["sps_u_th"] = m.sps_lif.u_th;
  j["sps_tau"] = m.sps_lif.tau;
  j["surrogate_width"] = m.sps_lif.surrogate_width;
  j["attn_scale"] = m.attn_scale;
  return j;
}

ModelSettings model_settings_from_json(const json& j) {
  ModelSettings m;
  m.in_channels = j.at("in_channels").get<int>();
  m.num_classes = j.at("num_classes").get<int>();
  m.image_size = j.at("image_size").get<int>();
  m.sps_lif.u_th = j.at("sps_u_th").get<double>();
  m.sps_lif.tau = j.at("sps_tau").get<double>();
  m.sps_lif.surrogate_width = j.at("surrogate_width").get<double>();
  m.attn_scale = j.at("attn_scale").get<double>();
  m.validate();
  return m;
}

ordered_json to_json(const TrainConfig& c) {
  ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.lr;
  j["min_lr"] = c.min_lr;
  j["weight_decay"] = c.weight_decay;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps"] = c.eps;
  j["seed"] = c.seed;
  j["flip"] = c.flip;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.lr = j.at("lr").get<double>();
  c.min_lr = j.at("min_lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.flip = j.at("flip").get<bool>();
  c.validate();
  return c;
}

bool same_space(const SearchSpace& a, const SearchSpace& b) { return to_json(a) == to_json(b); }

namespace {

struct Entry {
  std::string name;
  Shape shape;
  const float* data = nullptr;
  float* dest = nullptr;
  std::size_t count = 0;
};

// Every tensor a checkpoint holds, in blob order. Step counts are staged as
// floats in `scratch` (exact below 2^24).
std::vector<Entry> layout(Supernet& net, AdamW* adam, std::vector<std::vector<float>>& scratch) {
  std::vector<Entry> out;
  for (const auto& [name, p] : net.parameters()) {
    Tensor& t = p.node().value;
    out.push_back({name, t.shape(), t.data().data(), t.data().data(), t.size()});
  }
  for (auto& [key, st] : net.bn_stats()) {
    out.push_back({"bn/" + key + "/running_mean", st.running_mean.shape(), st.running_mean.data().data(),
                   st.running_mean.data().data(), st.running_mean.size()});
    out.push_back({"bn/" + key + "/running_var", st.running_var.shape(), st.running_var.data().data(),
                   st.running_var.data().data(), st.running_var.size()});
  }
  if (adam != nullptr) {
    scratch.reserve(adam->slots().size());
    for (auto& [name, slot] : adam->slots()) {
      out.push_back({"adam/" + name + "/m", slot.m.shape(), slot.m.data().data(), slot.m.data().data(), slot.m.size()});
      out.push_back({"adam/" + name + "/v", slot.v.shape(), slot.v.data().data(), slot.v.data().data(), slot.v.size()});
      auto& steps = scratch.emplace_back(slot.steps.begin(), slot.steps.end());
      out.push_back({"adam/" + name + "/steps", slot.m.shape(), steps.data(), steps.data(), steps.size()});
    }
  }
  return out;
}

void write_le_floats(std::ofstream& out, const float* data, std::size_t n) {
  std::vector<unsigned char> buf(n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &data[i], 4);
    for (int b = 0; b < 4; ++b) buf[i * 4 + static_cast<std::size_t>(b)] = static_cast<unsigned char>(bits >> (8 * b));
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void replace_file(const fs::path& tmp, const fs::path& dst) {
  std::error_code ec;
  fs::rename(tmp, dst, ec);
  if (ec) throw DataError("cannot move " + tmp.string() + " to " + dst.string() + ": " + ec.message());
}

}  // namespace

void save_checkpoint(const fs::path& dir, const Supernet& supernet, const AdamW* adam, const CheckpointInfo& info) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create checkpoint directory " + dir.string() + ": " + ec.message());
  std::vector<std::vector<float>> scratch;
  // layout() only reads through these pointers when saving.
  auto entries = layout(const_cast<Supernet&>(supernet), const_cast<AdamW*>(adam), scratch);

  ordered_json manifest;
  manifest["format"] = "spikenas-checkpoint";
  manifest["version"] = 1;
  manifest["dtype"] = "float32-le";
  manifest["space"] = to_json(info.space);
  manifest["settings"] = to_json(info.settings);
  manifest["train"] = to_json(info.train);
  manifest["init_seed"] = info.init_seed;
  manifest["epoch"] = info.epoch;
  manifest["loss_history"] = info.loss_history;
  manifest["dataset"] = info.dataset;
  manifest["normalization"] = {{"mean", info.norm.mean}, {"std", info.norm.std}};
  manifest["has_optimizer"] = adam != nullptr;
  ordered_json tensors = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& e : entries) {
    ordered_json t;
    t["name"] = e.name;
    t["shape"] = e.shape;
    t["offset"] = offset;
    t["count"] = e.count;
    tensors.push_back(std::move(t));
    offset += e.count * 4;
  }
  manifest["tensors"] = std::move(tensors);
  manifest["blob_bytes"] = offset;

  const fs::path blob_tmp = dir / (std::string(kWeightsFile) + ".tmp");
  {
    std::ofstream out(blob_tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + blob_tmp.string());
    for (const auto& e : entries) write_le_floats(out, e.data, e.count);
    if (!out) throw DataError("write failed for " + blob_tmp.string());
  }
  const fs::path manifest_tmp = dir / (std::string(kManifestFile) + ".tmp");
  {
    std::ofstream out(manifest_tmp, std::ios::trunc);
    if (!out) throw DataError("cannot write " + manifest_tmp.string());
    out << manifest.dump(2) << '\n';
    if (!out) throw DataError("write failed for " + manifest_tmp.string());
  }
  replace_file(blob_tmp, dir / kWeightsFile);
  replace_file(manifest_tmp, dir / kManifestFile);
}

namespace {

json read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestFile;
  std::ifstream in(path);
  if (!in) throw DataError("no checkpoint manifest at " + path.string());
  try {
    json j = json::parse(in);
    if (j.at("format") != "spikenas-checkpoint" || j.at("version") != 1) {
      throw DataError(path.string() + ": unsupported checkpoint format");
    }
    return j;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

CheckpointInfo read_checkpoint_info(const fs::path& dir) {
  const json j = read_manifest(dir);
  try {
    CheckpointInfo info;
    info.space = search_space_from_json(j.at("space"));
    info.settings = model_settings_from_json(j.at("settings"));
    info.train = train_config_from_json(j.at("train"));
    info.init_seed = j.at("init_seed").get<std::uint64_t>();
    info.epoch = j.at("epoch").get<int>();
    info.loss_history = j.at("loss_history").get<std::vector<double>>();
    info.dataset = j.at("dataset").get<std::string>();
    info.norm.mean = j.at("normalization").at("mean").get<std::vector<float>>();
    info.norm.std = j.at("normalization").at("std").get<std::vector<float>>();
    return info;
  } catch (const json::exception& e) {
    throw DataError((dir / kManifestFile).string() + ": " + e.what());
  } catch (const ValueError& e) {
    throw DataError((dir / kManifestFile).string() + ": " + e.what());
  }
}

void load_checkpoint_tensors(const fs::path& dir, Supernet& supernet, AdamW* adam) {
  const json manifest = read_manifest(dir);
  std::vector<std::vector<float>> scratch;
  auto entries = layout(supernet, adam, scratch);
  std::map<std::string, const json*> declared;
  for (const auto& t : manifest.at("tensors")) declared[t.at("name").get<std::string>()] = &t;

  const fs::path blob_path = dir / kWeightsFile;
  std::ifstream in(blob_path, std::ios::binary);
  if (!in) throw DataError("no weights blob at " + blob_path.string());
  const std::vector<unsigned char> blob{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (blob.size() != manifest.at("blob_bytes").get<std::size_t>()) {
    throw DataError(blob_path.string() + ": size " + std::to_string(blob.size()) + " does not match the manifest");
  }
  std::size_t expected = entries.size();
  if (adam == nullptr) {
    for (const auto& [name, t] : declared) {
      if (name.rfind("adam/", 0) == 0) ++expected;
    }
  }
  if (declared.size() != expected) throw DataError("checkpoint tensor set does not match the supernet");

  for (auto& e : entries) {
    const auto it = declared.find(e.name);
    if (it == declared.end()) throw DataError("checkpoint lacks tensor '" + e.name + "'");
    const json& t = *it->second;
    const auto shape = t.at("shape").get<Shape>();
    if (shape != e.shape) {
      throw DataError("tensor '" + e.name + "' has shape " + to_string(shape) + ", supernet expects " +
                      to_string(e.shape));
    }
    const auto offset = t.at("offset").get<std::size_t>();
    if (t.at("count").get<std::size_t>() != e.count || offset + e.count * 4 > blob.size()) {
      throw DataError("tensor '" + e.name + "' lies outside the weights blob");
    }
    for (std::size_t i = 0; i < e.count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t{blob[offset + i * 4 + static_cast<std::size_t>(b)]} << (8 * b);
      std::memcpy(&e.dest[i], &bits, 4);
    }
  }
  if (adam != nullptr) {
    std::size_t k = 0;
    for (auto& [name, slot] : adam->slots()) {
      const auto& steps = scratch[k++];
      for (std::size_t i = 0; i < steps.size(); ++i) slot.steps[i] = static_cast<std::uint32_t>(steps[i]);
    }
  }
}

DirectoryLock::DirectoryLock(const fs::path& dir) : path_(dir / "LOCK") {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw DataError("checkpoint directory " + dir.string() + " is locked by another writer (" +
                              path_.string() + ")");
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

}  // namespace spikenas
