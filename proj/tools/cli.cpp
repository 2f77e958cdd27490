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

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "config.hpp"
#include "report.hpp"
#include "spikenas/error.hpp"

namespace spikenas::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string space;
  std::string data;
  std::string ckpt;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
  std::optional<int> top;
  std::optional<double> alpha;
  bool baseline = false;
  std::optional<int> generations;
  std::optional<int> population;
  std::string evaluator;
  // command-specific
  std::string candidate;
  std::string trace;
  std::optional<double> uniform_fr;
  std::optional<int> time_step;
  std::string results;
  int stop_after = 0;
};

RunConfig resolve_config(const Flags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.space.empty()) c.space = parse_space_kind(f.space);
  if (!f.data.empty()) c.data = DataSpec::parse(f.data, c.data);
  if (!f.ckpt.empty()) c.ckpt = f.ckpt;
  if (!f.out.empty()) c.out = f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.budget) c.evo.total_sample_budget = *f.budget;
  if (f.top) c.top = *f.top;
  if (f.alpha) c.evo.alpha = *f.alpha;
  if (f.baseline) c.baseline = true;
  if (f.generations) c.evo.generations = *f.generations;
  if (f.population) c.evo.population_size = *f.population;
  if (!f.evaluator.empty()) c.evaluator = f.evaluator;
  c.model = c.data.geometry(c.model);
  c.propagate_seed();
  c.validate();
  return c;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write " + path.string());
  return os;
}

CheckpointInfo checkpoint_info(const RunConfig& c) {
  CheckpointInfo info;
  info.space = c.search_space();
  info.settings = c.model;
  info.train = c.train;
  info.init_seed = c.seed;
  info.dataset = c.data.kind;
  return info;
}

int cmd_train(const RunConfig& c, int stop_after, std::ostream& out) {
  const Splits data = load_data(c.data);
  DirectoryLock lock(c.ckpt);
  const SearchSpace space = c.search_space();
  CheckpointInfo info = checkpoint_info(c);
  Supernet net(space, c.model, c.seed);
  SupernetTrainer trainer(net, data.train, c.train);
  info.norm = trainer.normalization();

  if (fs::exists(c.ckpt / kManifestFile)) {
    const CheckpointInfo prev = read_checkpoint_info(c.ckpt);
    if (!same_space(prev.space, space)) throw DataError("checkpoint was trained on a different search space");
    if (to_json(prev.train) != to_json(c.train) || prev.init_seed != c.seed) {
      throw DataError("checkpoint was trained with a different configuration");
    }
    load_checkpoint_tensors(c.ckpt, net, &trainer.optimizer());
    trainer.restore(prev.epoch, prev.loss_history);
    fmt::print(out, "resuming at epoch {}\n", prev.epoch);
  }

  auto save = [&] {
    info.epoch = trainer.epoch();
    info.loss_history = trainer.loss_history();
    save_checkpoint(c.ckpt, net, &trainer.optimizer(), info);
    std::ofstream csv = open_out(c.ckpt / "loss_history.csv");
    csv << "epoch,loss\n";
    for (std::size_t i = 0; i < info.loss_history.size(); ++i) fmt::print(csv, "{},{}\n", i + 1, info.loss_history[i]);
  };
  while (trainer.epoch() < c.train.epochs) {
    const double loss = trainer.train_epoch();
    fmt::print(out, "epoch {:4d} loss {:.6f}\n", trainer.epoch(), loss);
    const bool stop = stop_after > 0 && trainer.epoch() >= stop_after;
    if (trainer.epoch() % c.checkpoint_every == 0 || trainer.epoch() == c.train.epochs || stop) save();
    if (stop) break;
  }
  fmt::print(out, "checkpoint written to {}\n", c.ckpt.string());
  return kOk;
}

/// Supernet restored from a checkpoint that must match the configured space.
struct Loaded {
  CheckpointInfo info;
  std::unique_ptr<Supernet> net;
};

Loaded load_supernet(const RunConfig& c) {
  Loaded l;
  l.info = read_checkpoint_info(c.ckpt);
  if (!same_space(l.info.space, c.search_space())) {
    throw DataError("checkpoint space " + std::string(space_name(l.info.space.kind)) +
                    " does not match the requested space " + std::string(space_name(c.space)));
  }
  l.net = std::make_unique<Supernet>(l.info.space, l.info.settings, l.info.init_seed);
  load_checkpoint_tensors(c.ckpt, *l.net, nullptr);
  return l;
}

double mean_rate(const FrTrace& trace) {
  if (trace.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [id, fr] : trace) s += fr;
  return s / static_cast<double>(trace.size());
}

int cmd_search(const RunConfig& c, std::ostream& out) {
  const SearchSpace space = c.search_space();
  std::map<std::string, double> mean_fr;
  Evaluator evaluator;
  std::optional<Splits> data;
  Loaded loaded;
  std::unique_ptr<InheritedEvaluator> inherited;
  std::unique_ptr<AnalyticEvaluator> analytic;
  if (c.evaluator == "analytic") {
    analytic = std::make_unique<AnalyticEvaluator>(space, c.model);
    evaluator = [&](const Candidate& cand) {
      mean_fr[format_candidate(cand)] = mean_rate(analytic->trace(cand));
      return (*analytic)(cand);
    };
  } else {
    loaded = load_supernet(c);
    data = load_data(c.data);
    inherited = std::make_unique<InheritedEvaluator>(*loaded.net, data->train, data->val, loaded.info.norm,
                                                     c.calibration, c.eval_batch_size);
    evaluator = [&](const Candidate& cand) {
      const EvalResult r = inherited->run(cand);
      mean_fr[format_candidate(cand)] = mean_rate(r.fr_trace);
      return Evaluation{r.accuracy, r.energy_joules()};
    };
  }

  std::vector<FitnessRecord> records;
  if (c.baseline) {
    Rng rng(c.seed);
    records = random_search(space, evaluator, c.evo.total_sample_budget, rng, c.evo.alpha);
  } else {
    records = evolve(space, evaluator, c.evo).records;
  }

  std::error_code ec;
  fs::create_directories(c.out, ec);
  {
    std::ofstream log = open_out(c.out / "results.jsonl");
    for (const auto& r : records) write_record(log, r);
  }
  const auto front = pareto_front(records);
  {
    std::ofstream csv = open_out(c.out / "front.csv");
    write_front_csv(csv, front, &mean_fr);
  }
  std::vector<FitnessRecord> best;
  for (std::size_t i : top_k(records, static_cast<std::size_t>(c.top))) best.push_back(records[i]);
  {
    std::ofstream csv = open_out(c.out / "top.csv");
    write_front_csv(csv, best, &mean_fr);
  }
  fmt::print(out, "{} candidates evaluated ({}), {} on the Pareto front\n", records.size(),
             c.baseline ? "random search" : "evolutionary search", front.size());
  fmt::print(out, "fitness = alpha*(1 - scaled_energy) + (1 - alpha)*scaled_accuracy, alpha = {}\n", c.evo.alpha);
  const std::size_t show = std::min<std::size_t>(best.size(), 5);
  for (std::size_t i = 0; i < show; ++i) {
    const auto& r = best[i];
    fmt::print(out, "  {}  acc {:.4f}  energy {:.6g} mJ  fitness {:.4f}\n", format_candidate(r.candidate), r.accuracy,
               r.energy_joules * 1e3, r.fitness);
  }
  fmt::print(out, "results written to {}\n", c.out.string());
  return kOk;
}

int cmd_evaluate(const RunConfig& c, const std::string& candidate_text, std::ostream& out) {
  const SearchSpace space = c.search_space();
  const Candidate cand = parse_candidate(candidate_text, space);
  require_valid(cand, space);
  Loaded loaded = load_supernet(c);
  const Splits data = load_data(c.data);
  InheritedEvaluator ev(*loaded.net, data.train, data.val, loaded.info.norm, c.calibration, c.eval_batch_size);
  const EvalResult r = ev.run(cand);

  nlohmann::ordered_json j;
  j["candidate"] = format_candidate(cand);
  j["accuracy"] = r.accuracy;
  j["energy_joules"] = r.energy_joules();
  j["energy_mj"] = r.energy.millijoules();
  j["fr"] = r.fr_trace;
  fmt::print(out, "candidate {}\naccuracy {:.6f}\nenergy {:.6g} J ({:.6g} mJ)\n", j["candidate"].get<std::string>(),
             r.accuracy, r.energy_joules(), r.energy.millijoules());
  for (const auto& [id, fr] : r.fr_trace) fmt::print(out, "  fr {:<14} {:.6f}\n", id, fr);
  std::error_code ec;
  fs::create_directories(c.out, ec);
  std::ofstream js = open_out(c.out / "evaluation.json");
  js << j.dump(2) << '\n';
  return kOk;
}

int cmd_energy(const RunConfig& c, const Flags& f, std::ostream& out) {
  const SearchSpace space = c.search_space();
  Candidate cand = parse_candidate(f.candidate, space);
  if (f.time_step) {
    std::visit([&](auto& x) { x.time_step = *f.time_step; }, cand);
  }
  require_valid(cand, space);
  const SubnetConfig cfg = resolve(cand, space);
  const auto catalog = flops_catalog(cfg, c.model);
  FrTrace trace;
  if (f.uniform_fr) {
    trace = uniform_trace(catalog, *f.uniform_fr);
  } else {
    std::ifstream in(f.trace);
    if (!in) throw DataError("cannot read trace " + f.trace);
    std::map<std::string, const LayerSpec*> expected;
    for (const auto& l : catalog) {
      if (l.kind != LayerKind::Ann) expected[l.id] = &l;
    }
    for (const auto& row : read_fr_trace(in)) {
      const auto it = expected.find(row.id);
      if (it == expected.end()) throw DataError("trace row '" + row.id + "' is not a layer of this architecture");
      if (row.kind != it->second->kind || row.flops != it->second->flops) {
        throw DataError("trace row '" + row.id + "' disagrees with the architecture's layer");
      }
      if (!trace.emplace(row.id, row.fr).second) throw DataError("duplicate trace row '" + row.id + "'");
    }
    for (const auto& [id, spec] : expected) {
      if (!trace.count(id)) throw DataError("trace lacks layer '" + id + "'");
    }
  }
  const EnergyReport report = model_energy(catalog, trace, cfg.time_step);
  if (f.out.empty()) {
    write_energy_csv(out, report);
  } else {
    std::ofstream csv = open_out(c.out / "energy.csv");
    write_energy_csv(csv, report);
    fmt::print(out, "energy report written to {}\n", (c.out / "energy.csv").string());
  }
  fmt::print(out, "# total {:.9g} J = {:.6g} mJ; ANN equivalent {:.6g} mJ\n", report.total_joules,
             report.millijoules(), ann_energy(catalog) * 1e3);
  return kOk;
}

int cmd_report(const RunConfig& c, const std::string& results, std::ostream& out) {
  std::ifstream in(results);
  if (!in) throw DataError("cannot read results " + results);
  const auto records = read_records(in, c.search_space());
  if (records.size() < 2) throw DataError("report needs at least 2 records, got " + std::to_string(records.size()));
  std::error_code ec;
  fs::create_directories(c.out, ec);
  {
    std::ofstream svg = open_out(c.out / "scatter.svg");
    write_scatter_svg(svg, records);
  }
  const auto front = pareto_front(records);
  {
    std::ofstream csv = open_out(c.out / "front.csv");
    write_front_csv(csv, front);
  }
  const TauSummary tau = tau_summary(records, static_cast<std::size_t>(c.top));
  fmt::print(out, "records {}\npareto_front {}\n", records.size(), front.size());
  fmt::print(out, "kendall_tau_all {:.6f}\nkendall_tau_top{} {:.6f}\n", tau.all, tau.top_count, tau.top);
  fmt::print(out, "report written to {}\n", c.out.string());
  return kOk;
}

void common_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file");
  app->add_option("--space", f.space, "search space: s_ts, s_tl or s_s");
  app->add_option("--data", f.data, "synthetic | mnist:DIR | cifar10:DIR | cifar100:DIR");
  app->add_option("--ckpt", f.ckpt, "checkpoint directory");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "seed for every stage");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"One-shot search over spiking transformers: supernet training, evolutionary search, energy audit"};
  app.require_subcommand(1);
  Flags f;

  auto* train = app.add_subcommand("train", "train the weight-sharing supernet");
  common_flags(train, f);
  train->add_option("--stop-after", f.stop_after, "stop after this epoch (resumable)");

  auto* search = app.add_subcommand("search", "evolutionary (or random) search over a trained supernet");
  common_flags(search, f);
  search->add_option("--budget", f.budget, "total distinct candidates to evaluate");
  search->add_option("--top", f.top, "number of best-fitness candidates to keep");
  search->add_option("--alpha", f.alpha,
                     "energy weight in the fitness; the fitness rewards LOW energy: "
                     "alpha*(1 - scaled_energy) + (1 - alpha)*scaled_accuracy");
  search->add_flag("--baseline", f.baseline, "random search with --budget samples instead of evolution");
  search->add_option("--generations", f.generations, "generation limit");
  search->add_option("--population", f.population, "population size");
  search->add_option("--evaluator", f.evaluator, "supernet (default) or analytic");

  auto* evaluate = app.add_subcommand("evaluate", "inherited-weight evaluation of one candidate");
  common_flags(evaluate, f);
  evaluate->add_option("candidate", f.candidate, "candidate tuple, e.g. \"(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)\"")
      ->required();

  auto* energy = app.add_subcommand("energy", "energy audit of an architecture from a firing-rate trace");
  common_flags(energy, f);
  energy->add_option("candidate", f.candidate, "candidate tuple")->required();
  auto* trace_opt = energy->add_option("--trace", f.trace, "fr trace file (layer_id,kind,flops,fr)");
  auto* uniform_opt = energy->add_option("--uniform-fr", f.uniform_fr, "same firing rate on every layer");
  trace_opt->excludes(uniform_opt);
  energy->add_option("--time-step", f.time_step, "override the candidate's time-step");

  auto* report = app.add_subcommand("report", "scatter SVG, Pareto CSV and Kendall tau from a results log");
  common_flags(report, f);
  report->add_option("results", f.results, "results JSONL")->required();
  report->add_option("--top", f.top, "number of best-fitness records for the second tau");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    const RunConfig c = resolve_config(f);
    if (*train) return cmd_train(c, f.stop_after, out);
    if (*search) return cmd_search(c, out);
    if (*evaluate) return cmd_evaluate(c, f.candidate, out);
    if (*energy) {
      if (f.trace.empty() && !f.uniform_fr) throw ValueError("energy needs --trace or --uniform-fr");
      return cmd_energy(c, f, out);
    }
    return cmd_report(c, f.results, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace spikenas::cli
