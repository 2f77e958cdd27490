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


#include "spikenas/arch/candidate.hpp"
#include "spikenas/arch/model.hpp"
#include "spikenas/error.hpp"
#include "support.hpp"

using namespace spikenas;
using testing::random_tensor;

TEST_CASE("choice grids") {
  CHECK(enumerate_choices({2, 4, 1}) == std::vector<double>{2, 3, 4});
  CHECK(enumerate_choices({336, 384, 12}) == std::vector<double>{336, 348, 360, 372, 384});
  const auto th = enumerate_choices({0.6, 2.0, 0.2});
  REQUIRE(th.size() == 8);
  CHECK(th[2] == 1.0);
  CHECK(th.back() == 2.0);
  CHECK(enumerate_choices({1.25, 10, 0.25}).size() == 36);
  CHECK_THROWS_AS(enumerate_choices({1, 2, 0}), ValueError);
  CHECK_THROWS_AS(enumerate_choices({3, 2, 1}), ValueError);
  CHECK_THROWS_AS(enumerate_choices({0, 1, 0.3}), ValueError);
  CHECK(SearchDim{0.6, 2.0, 0.2}.index_of(1.4) == 4u);
  CHECK_FALSE(SearchDim{0.6, 2.0, 0.2}.contains(1.5));
}

TEST_CASE("named spaces") {
  for (auto kind : {SpaceKind::SmallTransformer, SpaceKind::LargeTransformer, SpaceKind::Snn}) {
    const auto s = SearchSpace::from_kind(kind);
    CHECK_NOTHROW(s.validate());
    CHECK(parse_space_kind(space_name(kind)) == kind);
  }
  CHECK(SearchSpace::large_transformer().max_depth() == 6);
  CHECK(SearchSpace::large_transformer().max_embed() == 480);
  CHECK(SearchSpace::small_transformer().max_hidden() == 1536);
  CHECK(SearchSpace::snn().max_embed() == 384);
  CHECK_THROWS_AS(parse_space_kind("s_x"), ValueError);
}

TEST_CASE("candidate tuples parse, format and validate") {
  const auto sts = SearchSpace::small_transformer();
  const Candidate row = parse_candidate("(2, 3.6, 3.6, 6, 12, 1.8, 2.0, 5, 2, 4, 348)", sts);
  CHECK(validate(row, sts).empty());
  const auto& arch = std::get<CandidateArch>(row);
  CHECK(arch.depth == 2);
  CHECK(arch.heads == std::vector<int>{6, 12});
  CHECK(arch.tau == std::vector<double>{5, 2});
  CHECK(arch.embed_dim == 348);
  CHECK(format_candidate(row) == "(2, 3.6, 3.6, 6, 12, 1.8, 2.0, 5, 2, 4, 348)");

  CandidateArch deep = arch;
  deep.depth = 5;
  CHECK_FALSE(validate(deep, sts).empty());
  CandidateArch odd = arch;
  odd.embed_dim = 350;
  CHECK_FALSE(validate(odd, sts).empty());
  CHECK_THROWS_AS(require_valid(odd, sts), ValueError);

  const auto ss = SearchSpace::snn();
  const Candidate base = parse_candidate("(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", ss);
  CHECK(base == baseline_candidate(ss));
  const auto& snn = std::get<CandidateSnn>(base);
  CHECK(snn.u_th == std::vector<double>(4, 1.0));
  CHECK(snn.tau == std::vector<double>(4, 2.0));
  CHECK(snn.time_step == 4);
  CHECK(format_candidate(base) == "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)");
  const auto cfg = resolve(base, ss);
  CHECK(cfg.embed_dim == 384);
  CHECK(cfg.depth() == 4);
  CHECK(cfg.blocks[0].hidden == 1536);
  CHECK(cfg.blocks[0].heads == 12);

  CHECK_THROWS_AS(parse_candidate("(1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", ss), ParseError);
  try {
    parse_candidate("(1.0, 1.0, x, 1.0, 2, 2, 2, 2, 4)", ss);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.field() == "u_th[2]");
  }

  Rng rng(1);
  for (auto kind : {SpaceKind::SmallTransformer, SpaceKind::LargeTransformer, SpaceKind::Snn}) {
    const auto space = SearchSpace::from_kind(kind);
    for (int i = 0; i < 200; ++i) {
      const Candidate c = random_candidate(space, rng);
      CHECK(parse_candidate(format_candidate(c), space) == c);
    }
  }
}

TEST_CASE("widths") {
  CHECK(sps_widths(384) == std::vector<int>{48, 96, 192, 384});
  CHECK(sps_widths(348) == std::vector<int>{43, 87, 174, 348});
  CHECK(mlp_hidden(3.6, 348) == 1253);
}

namespace {

ModelSettings small_settings() {
  ModelSettings s;
  s.image_size = 16;
  s.num_classes = 3;
  return s;
}

SearchSpace tiny_space() { return SearchSpace::snn(FixedArch{2, 16, 2.0, 2}); }

}  // namespace

TEST_CASE("patch splitting front end") {
  ModelSettings settings = small_settings();
  settings.image_size = 32;
  Rng rng(2);
  for (int embed : {16, 32}) {
    const auto space = SearchSpace::snn(FixedArch{1, embed, 2.0, 2});
    Supernet net(space, settings, 3);
    Subnet sub = build_subnet(net, baseline_candidate(space));
    const ForwardOptions opt{ops::BnMode::Train, SpikeFunction::Heaviside, false};
    const Tensor images = random_tensor({2, 3, 32, 32}, rng, 0.0, 1.0);
    LayerFiring in, out;
    BnStore bn = sub.bn_stats();
    const Variable tokens = sps_forward(sub.weights(false), sub.config(), settings, bn, images, opt, &in, &out);
    CHECK(tokens.shape() == Shape{4, 2, 64, std::size_t(embed)});
    // Spike counts: the position-embedding residual adds a second spike train.
    for (float v : tokens.value().data()) CHECK((v == 0.0f || v == 1.0f || v == 2.0f));

    BnStore bn_eval = sub.bn_stats();
    const ForwardOptions eval{};
    const Variable zero = sps_forward(sub.weights(false), sub.config(), settings, bn_eval,
                                      Tensor({1, 3, 32, 32}, 0.0f), eval, nullptr, &out);
    for (float v : zero.value().data()) CHECK(v == 0.0f);
  }
  Supernet net(tiny_space(), small_settings(), 3);
  Subnet sub = build_subnet(net, baseline_candidate(tiny_space()));
  CHECK_THROWS_AS(sub.forward(Tensor({1, 3, 14, 14}), {}), ShapeError);
}

TEST_CASE("softmax-free attention") {
  Variable one(Tensor({1, 1, 1}, 1.0f));
  CHECK(spiking_attention(one, one, one, 1, 0.125).value().item() == doctest::Approx(0.125));
  Variable zero(Tensor({2, 5, 4}, 0.0f));
  const Variable out = spiking_attention(zero, zero, zero, 2, 0.125);
  for (float v : out.value().data()) CHECK(v == 0.0f);
  CHECK_THROWS_AS(spiking_attention(zero, zero, zero, 3, 0.125), ShapeError);
}

TEST_CASE("rate decoding is invariant to repeating time steps") {
  Rng rng(8);
  Tensor s({2, 1, 3, 4});
  for (auto& v : s.data()) v = rng.bernoulli(0.4) ? 1.0f : 0.0f;
  Tensor doubled({4, 1, 3, 4});
  for (std::size_t i = 0; i < doubled.size(); ++i) doubled[i] = s[i % s.size()];
  const Tensor a = rate_decode(Variable(s)).value(), b = rate_decode(Variable(doubled)).value();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]));
}

TEST_CASE("zero images give the head bias") {
  Supernet net(tiny_space(), small_settings(), 4);
  Subnet sub = build_subnet(net, baseline_candidate(tiny_space()));
  const auto r = sub.forward(Tensor({2, 3, 16, 16}, 0.0f), {});
  REQUIRE(r.logits.shape() == Shape{2, 3});
  const Tensor& bias = net.param("head.bias").value();
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t k = 0; k < 3; ++k) CHECK(r.logits.value().at({b, k}) == bias[k]);
}

TEST_CASE("maximal candidate equals the full supernet bit for bit") {
  const auto space = SearchSpace::small_transformer();
  const auto settings = small_settings();
  Supernet net(space, settings, 5);
  const Candidate full = maximal_candidate(space);
  Subnet sub = build_subnet(net, full);
  BnStore bn = net.bn_stats();
  Rng rng(6);
  const Tensor images = random_tensor({2, 3, 16, 16}, rng);
  const ForwardOptions opt{ops::BnMode::Train, SpikeFunction::Heaviside, false};
  const auto a = sub.forward(images, opt);
  const auto b = run_model(full_weights(net), sub.config(), settings, bn, images, opt);
  CHECK(a.logits.value() == b.logits.value());
}

TEST_CASE("subnets alias the shared weights") {
  const auto space = SearchSpace::small_transformer();
  Supernet net(space, small_settings(), 7);
  CandidateArch shallow = maximal_candidate(space);
  shallow.depth = 2;
  shallow.mlp_ratio.resize(2);
  shallow.heads.resize(2);
  shallow.u_th.resize(2);
  shallow.tau.resize(2);
  shallow.embed_dim = 348;
  CandidateArch deep = shallow;
  deep.depth = 3;
  deep.mlp_ratio.push_back(3.0);
  deep.heads.push_back(6);
  deep.u_th.push_back(1.0);
  deep.tau.push_back(2.0);
  Subnet a = build_subnet(net, shallow), b = build_subnet(net, deep);
  const auto wa = a.weights(false), wb = b.weights(false);
  CHECK(wa.blocks[0].fc1.weight.value() == wb.blocks[0].fc1.weight.value());
  CHECK(wa.blocks[0].q.weight.shape() == Shape{348, 348});

  // Gradient through a slice lands in the shared tensor's leading block.
  net.zero_grad();
  const auto wg = a.weights(true);
  ops::sum(wg.blocks[0].q.weight).backward();
  const Variable& shared = net.param("block0.q.weight");
  CHECK(shared.grad().at({0, 0}) == 1.0f);
  CHECK(shared.grad().at({347, 347}) == 1.0f);
  CHECK(shared.grad().at({348, 0}) == 0.0f);
}

TEST_CASE("subnet logits equal a standalone copy of the slices") {
  const auto settings = small_settings();
  for (auto kind : {SpaceKind::SmallTransformer, SpaceKind::LargeTransformer}) {
    const auto r = testing::entanglement_check(SearchSpace::from_kind(kind), settings, 4, 11);
    CHECK(r.worst <= 1e-6);
    CHECK(r.min_activity > 0.0);
  }
  const auto r = testing::entanglement_check(SearchSpace::snn(FixedArch{2, 48, 4.0, 6}), settings, 8, 12);
  CHECK(r.worst <= 1e-6);
  CHECK(r.min_activity > 0.0);
}

// Float32 central differences cannot resolve gradients three LIF layers deep
// to 1e-3, so the whole block is checked coarser than the single primitives.
TEST_CASE("gradient check: one attention block with the ramp spike function") {
  Rng rng(2);
  const std::size_t d = 4, hidden = 8;
  BlockConfig cfg{2, int(hidden), LifParams{0.8, 2.0, 1.0}};
  std::vector<Tensor> inputs{random_tensor({2, 3, d}, rng, 0.0, 1.0)};
  for (auto shape : {Shape{d, d}, Shape{d, d}, Shape{d, d}, Shape{d, d}, Shape{hidden, d}, Shape{d, hidden}}) {
    inputs.push_back(random_tensor(shape, rng, -0.8, 0.8));
    inputs.push_back(random_tensor({shape[0]}, rng, 0.2, 0.4));
    inputs.push_back(random_tensor({shape[0]}, rng, 0.7, 0.9));
  }
  auto f = [&](const std::vector<Variable>& v) {
    ModelWeights::Block w;
    ModelWeights::Conv* convs[] = {&w.q, &w.k, &w.v, &w.proj, &w.fc1, &w.fc2};
    for (std::size_t i = 0; i < 6; ++i) *convs[i] = {v[1 + 3 * i], v[2 + 3 * i], v[3 + 3 * i]};
    BnStore bn;
    for (const char* n : {"b.q", "b.k", "b.v", "b.proj", "b.fc2"}) bn[n] = ops::BnState::fresh(d);
    bn["b.fc1"] = ops::BnState::fresh(hidden);
    const ForwardOptions opt{ops::BnMode::Train, SpikeFunction::Ramp, true};
    return block_forward(w, cfg, 2, 0.5, bn, "b", v[0], opt, nullptr, nullptr);
  };
  const auto r = testing::grad_check(f, inputs, 3e-3);
  INFO(r.detail);
  CHECK(r.worst < 1e-2);
}
