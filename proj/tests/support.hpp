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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <unistd.h>

#include "spikenas/arch/model.hpp"
#include "spikenas/neuron/lif.hpp"
#include "spikenas/evo/evolution.hpp"
#include "spikenas/tensor/ops.hpp"
#include "spikenas/tensor/rng.hpp"

namespace spikenas::testing {

/// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("spikenas-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream os(p, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

/// Worst norm-wise relative error between the analytic gradient of each
/// input and its central finite difference. `f` maps the inputs to any
/// tensor; it is reduced against fixed random weights to a scalar.
struct GradCheck {
  double worst = 0.0;
  std::string detail;
};

inline GradCheck grad_check(const std::function<Variable(const std::vector<Variable>&)>& f,
                            const std::vector<Tensor>& inputs, double h = 1e-3, std::uint64_t seed = 7) {
  std::vector<Variable> vars;
  for (const auto& t : inputs) vars.emplace_back(t, true);
  const Variable probe_out = f(vars);
  Rng rng(seed);
  const Variable weights(random_tensor(probe_out.shape(), rng), false);
  auto loss_of = [&](const std::vector<Variable>& v) { return ops::sum(ops::mul(f(v), weights)); };

  loss_of(vars).backward();
  GradCheck result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = vars[k].grad().empty() ? Tensor(inputs[k].shape()) : vars[k].grad();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      auto eval = [&](float delta) {
        std::vector<Variable> shifted;
        for (std::size_t j = 0; j < inputs.size(); ++j) {
          Tensor t = inputs[j];
          if (j == k) t[i] += delta;
          shifted.emplace_back(std::move(t), false);
        }
        return static_cast<double>(loss_of(shifted).value().item());
      };
      const double numeric = (eval(static_cast<float>(h)) - eval(static_cast<float>(-h))) / (2.0 * h);
      const double a = analytic[i];
      diff2 += (a - numeric) * (a - numeric);
      a2 += a * a;
      n2 += numeric * numeric;
    }
    const double scale = std::max(std::sqrt(std::max(a2, n2)), 1e-12);
    const double rel = std::sqrt(diff2) / scale;
    if (rel > result.worst) {
      result.worst = rel;
      result.detail = "input " + std::to_string(k);
    }
  }
  return result;
}

struct NamedCheck {
  std::string name;
  GradCheck result;
};

/// Central-difference check (h = 1e-3) of every differentiable primitive on
/// small instances. LIF uses the ramp spike function, whose derivative is
/// the rectangular surrogate.
inline std::vector<NamedCheck> primitive_grad_checks() {
  using V = std::vector<Variable>;
  std::vector<NamedCheck> out;
  auto add = [&](std::string name, const std::function<Variable(const V&)>& f, std::vector<Tensor> in) {
    out.push_back({std::move(name), grad_check(f, in)});
  };
  Rng rng(10);
  const Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
  add("add", [](const V& v) { return ops::add(v[0], v[1]); }, {a, b});
  add("mul", [](const V& v) { return ops::mul(v[0], v[1]); }, {a, b});
  add("scale", [](const V& v) { return ops::scale(v[0], 2.5f); }, {a});
  add("sum", [](const V& v) { return ops::sum(v[0]); }, {a});
  add("mean", [](const V& v) { return ops::mean(v[0]); }, {a});
  add("mean_axis", [](const V& v) { return ops::mean_axis(v[0], 1); }, {a});
  add("mean_axis0", [](const V& v) { return ops::mean_axis(v[0], 0); }, {a});

  const Tensor c = random_tensor({2, 3, 4}, rng);
  add("reshape", [](const V& v) { return ops::reshape(v[0], {6, 4}); }, {c});
  add("permute", [](const V& v) { return ops::permute(v[0], {2, 0, 1}); }, {c});
  add("transpose_last2", [](const V& v) { return ops::transpose_last2(v[0]); }, {c});
  add("narrow_leading", [](const V& v) { return ops::narrow_leading(v[0], {1, 2, 3}); }, {c});

  const Tensor m1 = random_tensor({2, 3, 4}, rng), m2 = random_tensor({2, 4, 5}, rng);
  add("matmul", [](const V& v) { return ops::matmul(v[0], v[1]); }, {m1, m2});
  const Tensor x = random_tensor({6, 4}, rng), w = random_tensor({3, 4}, rng), bias = random_tensor({3}, rng);
  add("linear", [](const V& v) { return ops::linear(v[0], v[1], v[2]); }, {x, w, bias});
  add("linear_nobias", [](const V& v) { return ops::linear(v[0], v[1]); }, {x, w});

  const Tensor img = random_tensor({2, 2, 5, 5}, rng), k = random_tensor({3, 2, 3, 3}, rng);
  add("conv2d", [](const V& v) { return ops::conv2d(v[0], v[1], 1, 1); }, {img, k});
  add("conv2d_stride2", [](const V& v) { return ops::conv2d(v[0], v[1], 2, 0); }, {img, k});
  add("max_pool2d", [](const V& v) { return ops::max_pool2d(v[0], 3, 2, 1); }, {img});

  const Tensor bx = random_tensor({6, 3, 4}, rng), g = random_tensor({3}, rng, 0.5, 1.5), be = random_tensor({3}, rng);
  add("batchnorm_train", [](const V& v) {
    auto st = ops::BnState::fresh(3);
    return ops::batchnorm(v[0], v[1], v[2], st, ops::BnMode::Train);
  }, {bx, g, be});
  add("batchnorm_eval", [](const V& v) {
    ops::BnState st{Tensor({3}, 0.2f), Tensor({3}, 1.7f), 0};
    return ops::batchnorm(v[0], v[1], v[2], st, ops::BnMode::Eval);
  }, {bx, g, be});
  const Tensor logits = random_tensor({5, 4}, rng, -2, 2);
  add("cross_entropy", [](const V& v) { return ops::cross_entropy(v[0], {0, 3, 1, 2, 2}); }, {logits});

  const Tensor cx = random_tensor({2, 2, 4, 4}, rng), cw = random_tensor({3, 2, 3, 3}, rng);
  const Tensor cg = random_tensor({3}, rng, 0.5, 1.5), cb = random_tensor({3}, rng), fc = random_tensor({5, 48}, rng);
  add("conv_bn_linear", [](const V& v) {
    auto st = ops::BnState::fresh(3);
    const Variable h = ops::batchnorm(ops::conv2d(v[0], v[1], 1, 1), v[2], v[3], st, ops::BnMode::Train);
    return ops::linear(ops::reshape(h, {2, 48}), v[4]);
  }, {cx, cw, cg, cb, fc});

  const Tensor currents = random_tensor({4, 10}, rng, 0.0, 1.6);
  for (const LifParams p : {LifParams{1.0, 2.0, 1.0}, LifParams{0.6, 1.25, 1.0}, LifParams{1.4, 5.0, 1.0}}) {
    add("lif(u_th=" + std::to_string(p.u_th).substr(0, 3) + ",tau=" + std::to_string(p.tau).substr(0, 4) + ")",
        [p](const V& v) { return lif(v[0], p, nullptr, SpikeFunction::Ramp); }, {currents});
  }
  const Tensor q = random_tensor({2, 3, 4}, rng, 0, 1), kk = random_tensor({2, 3, 4}, rng, 0, 1),
               vv = random_tensor({2, 3, 4}, rng, 0, 1);
  add("spiking_attention", [](const V& v) { return spiking_attention(v[0], v[1], v[2], 2, 0.5); }, {q, kk, vv});
  const Tensor spikes = random_tensor({2, 2, 3, 4}, rng, 0, 1);
  add("rate_decode", [](const V& v) { return rate_decode(v[0]); }, {spikes});
  return out;
}

/// Naive triple loop: [m,k] x [k,n].
inline std::vector<double> naive_matmul(const Tensor& a, const Tensor& b, std::size_t m, std::size_t k,
                                        std::size_t n, std::size_t a_off = 0, std::size_t b_off = 0) {
  std::vector<double> c(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) c[i * n + j] += double(a[a_off + i * k + p]) * b[b_off + p * n + j];
  return c;
}

/// Direct-definition 2-D cross-correlation with zero padding.
inline Tensor naive_conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t O = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const std::size_t HO = (H + 2 * pad - KH) / stride + 1, WO = (W + 2 * pad - KW) / stride + 1;
  Tensor y({B, O, HO, WO});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t o = 0; o < O; ++o)
      for (std::size_t i = 0; i < HO; ++i)
        for (std::size_t j = 0; j < WO; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < C; ++c)
            for (std::size_t di = 0; di < KH; ++di)
              for (std::size_t dj = 0; dj < KW; ++dj) {
                const long r = long(i * stride + di) - long(pad), q = long(j * stride + dj) - long(pad);
                if (r < 0 || q < 0 || r >= long(H) || q >= long(W)) continue;
                s += double(x.at({b, c, std::size_t(r), std::size_t(q)})) * w.at({o, c, di, dj});
              }
          y.at({b, o, i, j}) = float(s);
        }
  return y;
}

/// Largest |subnet - standalone copy| over the logits of `n` random
/// candidates, plus the smallest mean |feature| seen (to rule out an all-silent
/// network making the comparison vacuous).
struct EntanglementCheck {
  double worst = 0.0;
  double min_activity = 1e300;
};

inline EntanglementCheck entanglement_check(const SearchSpace& space, const ModelSettings& settings, int n,
                                            std::uint64_t seed, std::size_t batch = 2) {
  Supernet supernet(space, settings, seed);
  Rng rng(mix_seed(seed, 17));
  EntanglementCheck result;
  const ForwardOptions train_bn{ops::BnMode::Train, SpikeFunction::Heaviside, false};
  const auto c = static_cast<std::size_t>(settings.in_channels), hw = static_cast<std::size_t>(settings.image_size);
  for (int i = 0; i < n; ++i) {
    const Candidate cand = random_candidate(space, rng);
    Subnet subnet = build_subnet(supernet, cand);
    StandaloneModel copy(subnet);
    const Tensor images = random_tensor({batch, c, hw, hw}, rng, -2.0, 2.0);
    const ForwardResult a = subnet.forward(images, train_bn);
    const ForwardResult b = copy.forward(images, train_bn);
    double activity = 0.0;
    for (float f : a.features.value().data()) activity += std::abs(f);
    result.min_activity = std::min(result.min_activity, activity / double(a.features.value().size()));
    const Tensor& la = a.logits.value();
    const Tensor& lb = b.logits.value();
    if (la.shape() != lb.shape()) return {1e300, 0.0};
    for (std::size_t j = 0; j < la.size(); ++j) result.worst = std::max(result.worst, double(std::abs(la[j] - lb[j])));
  }
  return result;
}

/// Records with coordinates on a coarse grid so ties are common.
inline std::vector<FitnessRecord> random_records(std::size_t n, Rng& rng, int levels = 12) {
  std::vector<FitnessRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].energy_joules = 1e-3 * double(1 + rng.below(std::uint64_t(levels)));
    out[i].accuracy = double(rng.below(std::uint64_t(levels))) / levels;
    out[i].fitness = double(i);  // identifies the record
  }
  return out;
}

/// O(n^2) dominance filter, ordered by energy then accuracy descending then
/// input position.
inline std::vector<FitnessRecord> brute_pareto(const std::vector<FitnessRecord>& r) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < r.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < r.size() && !dominated; ++j)
      dominated = j != i && dominates(r[j].energy_joules, r[j].accuracy, r[i].energy_joules, r[i].accuracy);
    if (!dominated) keep.push_back(i);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) {
    if (r[a].energy_joules != r[b].energy_joules) return r[a].energy_joules < r[b].energy_joules;
    return r[a].accuracy > r[b].accuracy;
  });
  std::vector<FitnessRecord> out;
  for (auto i : keep) out.push_back(r[i]);
  return out;
}

inline bool same_records(const std::vector<FitnessRecord>& a, const std::vector<FitnessRecord>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].fitness != b[i].fitness) return false;
  return true;
}

/// Tau-b by enumerating every pair.
inline double brute_kendall(const std::vector<double>& x, const std::vector<double>& y) {
  long long conc = 0, disc = 0, tx = 0, ty = 0, pairs = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++pairs;
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0) ++tx;
      if (dy == 0) ++ty;
      if (dx == 0 || dy == 0) continue;
      ((dx > 0) == (dy > 0) ? conc : disc) += 1;
    }
  if (tx == pairs || ty == pairs) return 0.0;
  return double(conc - disc) / std::sqrt(double(pairs - tx) * double(pairs - ty));
}

}  // namespace spikenas::testing
