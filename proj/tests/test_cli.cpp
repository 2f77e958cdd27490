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

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "spikenas/energy/energy.hpp"
#include "spikenas/evo/evolution.hpp"
#include "support.hpp"

using namespace spikenas;
using testing::read_file;
using testing::TempDir;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "spikenas-cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kToy = R"({"space": "s_s", "fixed_arch": {"depth": 1, "embed_dim": 16, "mlp_ratio": 2.0, "heads": 2},
 "data": {"kind": "synthetic", "classes": 3, "size": 8, "channels": 3, "train_per_class": 8, "val_per_class": 4},
 "train": {"epochs": 4, "batch_size": 8}, "checkpoint_every": 1,
 "evo": {"population": 6, "generations": 2, "parents": 3}, "calibration": {"batches": 2, "batch_size": 8},
 "eval_batch_size": 12, "top": 4, "seed": 3})";

std::string write_config(const TempDir& dir, const std::string& text) {
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

/// Value of the last field on the "total" row of an energy CSV.
double total_joules(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("total,", 0) == 0) return std::stod(line.substr(line.rfind(',') + 1));
  }
  return -1.0;
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("configs with unknown keys are rejected before any work") {
  TempDir dir("cfg");
  const auto cfg = write_config(dir, R"({"space": "s_s", "bogus": 1})");
  const auto r = invoke({"train", "--config", cfg, "--ckpt", (dir / "ck").string()});
  CHECK(r.code == cli::kUsage);
  CHECK(r.err.find("bogus") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "ck"));

  const auto nested = write_config(dir, R"({"evo": {"populaton": 5}})");
  CHECK(invoke({"search", "--config", nested}).code == cli::kUsage);
  const auto bad_value = write_config(dir, R"({"train": {"epochs": 0}})");
  CHECK(invoke({"train", "--config", bad_value}).code == cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kUsage);
}

TEST_CASE("energy audit matches the library") {
  const auto r = invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", "--uniform-fr", "0.35"});
  REQUIRE(r.code == cli::kOk);
  const auto space = SearchSpace::snn();
  const ModelSettings settings;
  const auto cat = flops_catalog(resolve(baseline_candidate(space), space), settings);
  CHECK(total_joules(r.out) == model_energy(cat, uniform_trace(cat, 0.35), 4).total_joules);

  TempDir dir("energy");
  const auto trace = dir / "zero.csv";
  {
    std::ofstream os(trace);
    write_fr_trace(os, cat, uniform_trace(cat, 0.0));
  }
  const auto z = invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", "--trace", trace.string()});
  REQUIRE(z.code == cli::kOk);
  CHECK(total_joules(z.out) == 4.6e-12 * double(cat.front().flops));

  // Missing row.
  std::string text = read_file(trace);
  text.erase(text.find("head,"));
  std::ofstream(trace) << text;
  CHECK(invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", "--trace", trace.string()}).code == cli::kData);
  // Extra row.
  {
    std::ofstream os(trace);
    write_fr_trace(os, cat, uniform_trace(cat, 0.1));
    os << "block9.q,snn_fc,10,0.5\n";
  }
  CHECK(invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", "--trace", trace.string()}).code == cli::kData);

  CHECK(invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)", "--uniform-fr", "0.3", "--time-step", "0"}).code ==
        cli::kUsage);
  const auto bad = invoke({"energy", "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, x, 4)", "--uniform-fr", "0.3"});
  CHECK(bad.code == cli::kUsage);
  CHECK(bad.err.find("tau[3]") != std::string::npos);
}

TEST_CASE("report: svg, front and tau agree with the library") {
  TempDir dir("report");
  const auto space = SearchSpace::snn();
  EvoConfig ec;
  ec.total_sample_budget = 40;
  const auto res = evolve(space, AnalyticEvaluator(space, ModelSettings{}), ec);
  const auto log = dir / "results.jsonl";
  {
    std::ofstream os(log);
    for (const auto& r : res.records) write_record(os, r);
  }
  const auto r = invoke({"report", log.string(), "--out", (dir / "rep").string(), "--top", "10"});
  REQUIRE(r.code == cli::kOk);
  std::vector<double> acc, energy;
  for (const auto& x : res.records) acc.push_back(x.accuracy), energy.push_back(x.energy_joules);
  char expect[64];
  std::snprintf(expect, sizeof expect, "kendall_tau_all %.6f\n", kendall_tau(acc, energy));
  CHECK(r.out.find(expect) != std::string::npos);
  std::vector<double> top_acc, top_energy;
  for (auto i : top_k(res.records, 10)) {
    top_acc.push_back(res.records[i].accuracy);
    top_energy.push_back(res.records[i].energy_joules);
  }
  std::snprintf(expect, sizeof expect, "kendall_tau_top10 %.6f\n", kendall_tau(top_acc, top_energy));
  CHECK(r.out.find(expect) != std::string::npos);

  const std::string svg = read_file(dir / "rep" / "scatter.svg");
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "<svg") == 1);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(count(svg, "<circle") == res.records.size());
  CHECK(count(svg, "class=\"top\"") == 8);

  const std::string front = read_file(dir / "rep" / "front.csv");
  const auto expected = pareto_front(res.records);
  CHECK(count(front, "\n") == expected.size() + 1);
  for (const auto& f : expected) CHECK(front.find(format_candidate(f.candidate)) != std::string::npos);

  // Two records: still a complete document.
  {
    std::ofstream os(log);
    write_record(os, res.records[0]);
    write_record(os, res.records[1]);
  }
  REQUIRE(invoke({"report", log.string(), "--out", (dir / "two").string()}).code == cli::kOk);
  CHECK(count(read_file(dir / "two" / "scatter.svg"), "<circle") == 2);
  {
    std::ofstream os(log);
    write_record(os, res.records[0]);
  }
  CHECK(invoke({"report", log.string(), "--out", (dir / "one").string()}).code == cli::kData);
}

TEST_CASE("train resumes bit-identically and search is deterministic") {
  TempDir dir("pipeline");
  const auto cfg = write_config(dir, kToy);
  const auto full = (dir / "full").string(), part = (dir / "part").string();
  REQUIRE(invoke({"train", "--config", cfg, "--ckpt", full}).code == cli::kOk);
  REQUIRE(invoke({"train", "--config", cfg, "--ckpt", part, "--stop-after", "2"}).code == cli::kOk);
  CHECK(read_file(dir / "part" / "weights.bin") != read_file(dir / "full" / "weights.bin"));
  REQUIRE(invoke({"train", "--config", cfg, "--ckpt", part}).code == cli::kOk);
  CHECK(read_file(dir / "part" / "weights.bin") == read_file(dir / "full" / "weights.bin"));
  CHECK(read_file(dir / "part" / "manifest.json") == read_file(dir / "full" / "manifest.json"));
  CHECK(read_file(dir / "part" / "loss_history.csv") == read_file(dir / "full" / "loss_history.csv"));

  // Resuming with a different seed is refused.
  CHECK(invoke({"train", "--config", cfg, "--ckpt", part, "--seed", "4"}).code == cli::kData);

  const auto a = invoke({"search", "--config", cfg, "--ckpt", full, "--out", (dir / "s1").string()});
  const auto b = invoke({"search", "--config", cfg, "--ckpt", full, "--out", (dir / "s2").string()});
  REQUIRE(a.code == cli::kOk);
  REQUIRE(b.code == cli::kOk);
  CHECK(read_file(dir / "s1" / "results.jsonl") == read_file(dir / "s2" / "results.jsonl"));
  CHECK(read_file(dir / "s1" / "front.csv") == read_file(dir / "s2" / "front.csv"));
  const auto records = [&] {
    std::ifstream is(dir / "s1" / "results.jsonl");
    return read_records(is, SearchSpace::snn(FixedArch{1, 16, 2.0, 2}));
  }();
  CHECK(records.size() == 9);  // 6, then 3 children beside 3 elite parents

  const std::string base = "(1.0, 2, 4)";
  const auto e1 = invoke({"evaluate", base, "--config", cfg, "--ckpt", full, "--out", (dir / "e1").string()});
  const auto e2 = invoke({"evaluate", base, "--config", cfg, "--ckpt", full, "--out", (dir / "e2").string()});
  REQUIRE(e1.code == cli::kOk);
  CHECK(read_file(dir / "e1" / "evaluation.json") == read_file(dir / "e2" / "evaluation.json"));
  CHECK(e1.out == e2.out);

  // The checkpoint belongs to a different space.
  CHECK(invoke({"search", "--config", cfg, "--ckpt", full, "--space", "s_ts"}).code != cli::kOk);
  CHECK(invoke({"search", "--config", cfg, "--ckpt", (dir / "none").string()}).code == cli::kData);

  const auto rnd = invoke({"search", "--config", cfg, "--ckpt", full, "--out", (dir / "r").string(), "--baseline",
                        "--budget", "5"});
  CHECK(rnd.code == cli::kOk);
}
