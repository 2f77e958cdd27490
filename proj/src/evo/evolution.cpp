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

#include "spikenas/evo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "spikenas/error.hpp"

namespace spikenas {

namespace {

double random_gene(const SearchDim& dim, Rng& rng) {
  const auto choices = enumerate_choices(dim);
  return choices[rng.below(choices.size())];
}

double resample_gene(const SearchDim& dim, double current, Rng& rng) {
  const auto choices = enumerate_choices(dim);
  if (choices.size() < 2) return current;
  const auto idx = dim.index_of(current);
  if (!idx) return choices[rng.below(choices.size())];
  auto r = static_cast<std::size_t>(rng.below(choices.size() - 1));
  if (r >= *idx) ++r;
  return choices[r];
}

int as_int(double v) { return static_cast<int>(std::lround(v)); }

void append_layer(CandidateArch& a, const SearchSpace& space, Rng& rng) {
  a.mlp_ratio.push_back(random_gene(space.mlp_ratio, rng));
  a.heads.push_back(as_int(random_gene(space.head_num, rng)));
  a.u_th.push_back(random_gene(space.u_th, rng));
  a.tau.push_back(random_gene(space.tau, rng));
}

void truncate_layers(CandidateArch& a) {
  const auto d = static_cast<std::size_t>(a.depth);
  a.mlp_ratio.resize(d);
  a.heads.resize(d);
  a.u_th.resize(d);
  a.tau.resize(d);
}

}  // namespace

Candidate random_candidate(const SearchSpace& space, Rng& rng) {
  if (space.is_snn()) {
    const auto layers = static_cast<std::size_t>(space.max_depth());
    CandidateSnn c;
    for (std::size_t i = 0; i < layers; ++i) c.u_th.push_back(random_gene(space.u_th, rng));
    for (std::size_t i = 0; i < layers; ++i) c.tau.push_back(random_gene(space.tau, rng));
    c.time_step = as_int(random_gene(space.time_step, rng));
    return c;
  }
  CandidateArch a;
  a.depth = as_int(random_gene(space.depth, rng));
  for (int i = 0; i < a.depth; ++i) append_layer(a, space, rng);
  a.time_step = as_int(random_gene(space.time_step, rng));
  a.embed_dim = as_int(random_gene(space.embed_dim, rng));
  return a;
}

std::size_t gene_count(const Candidate& c) {
  if (const auto* s = std::get_if<CandidateSnn>(&c)) return s->u_th.size() + s->tau.size() + 1;
  const auto& a = std::get<CandidateArch>(c);
  return 1 + 4 * static_cast<std::size_t>(a.depth) + 2;
}

Candidate mutate(const Candidate& c, const SearchSpace& space, Rng& rng, double mutation_prob) {
  if (mutation_prob < 0.0 || mutation_prob > 1.0) throw ValueError("mutation_prob must lie in [0, 1]");
  if (!rng.bernoulli(mutation_prob)) return c;
  const std::size_t gene = rng.below(gene_count(c));
  if (const auto* s = std::get_if<CandidateSnn>(&c)) {
    CandidateSnn out = *s;
    const std::size_t l = out.u_th.size();
    if (gene < l) {
      out.u_th[gene] = resample_gene(space.u_th, out.u_th[gene], rng);
    } else if (gene < 2 * l) {
      out.tau[gene - l] = resample_gene(space.tau, out.tau[gene - l], rng);
    } else {
      out.time_step = as_int(resample_gene(space.time_step, out.time_step, rng));
    }
    return out;
  }
  CandidateArch out = std::get<CandidateArch>(c);
  const std::size_t layer_genes = 4 * static_cast<std::size_t>(out.depth);
  if (gene == 0) {
    const int old = out.depth;
    out.depth = as_int(resample_gene(space.depth, old, rng));
    if (out.depth > old) {
      for (int i = old; i < out.depth; ++i) append_layer(out, space, rng);
    } else {
      truncate_layers(out);
    }
  } else if (gene <= layer_genes) {
    const std::size_t l = (gene - 1) / 4;
    switch ((gene - 1) % 4) {
      case 0:
        out.mlp_ratio[l] = resample_gene(space.mlp_ratio, out.mlp_ratio[l], rng);
        break;
      case 1:
        out.heads[l] = as_int(resample_gene(space.head_num, out.heads[l], rng));
        break;
      case 2:
        out.u_th[l] = resample_gene(space.u_th, out.u_th[l], rng);
        break;
      default:
        out.tau[l] = resample_gene(space.tau, out.tau[l], rng);
        break;
    }
  } else if (gene == layer_genes + 1) {
    out.time_step = as_int(resample_gene(space.time_step, out.time_step, rng));
  } else {
    out.embed_dim = as_int(resample_gene(space.embed_dim, out.embed_dim, rng));
  }
  return out;
}

Candidate crossover(const Candidate& a, const Candidate& b, const SearchSpace& space, Rng& rng) {
  (void)space;
  if (a.index() != b.index()) throw ValueError("crossover parents come from different search spaces");
  auto pick = [&rng](const auto& x, const auto& y) { return rng.bernoulli(0.5) ? x : y; };
  if (const auto* sa = std::get_if<CandidateSnn>(&a)) {
    const auto& sb = std::get<CandidateSnn>(b);
    if (sa->u_th.size() != sb.u_th.size() || sa->tau.size() != sb.tau.size()) {
      throw ValueError("crossover parents have different layer counts");
    }
    CandidateSnn out = *sa;
    for (std::size_t i = 0; i < out.u_th.size(); ++i) out.u_th[i] = pick(sa->u_th[i], sb.u_th[i]);
    for (std::size_t i = 0; i < out.tau.size(); ++i) out.tau[i] = pick(sa->tau[i], sb.tau[i]);
    out.time_step = pick(sa->time_step, sb.time_step);
    return out;
  }
  const auto& pa = std::get<CandidateArch>(a);
  const auto& pb = std::get<CandidateArch>(b);
  CandidateArch out;
  out.depth = pick(pa.depth, pb.depth);
  for (int i = 0; i < out.depth; ++i) {
    const auto l = static_cast<std::size_t>(i);
    const bool in_a = i < pa.depth;
    const bool in_b = i < pb.depth;
    // Past the shorter parent's depth only one parent has the gene.
    auto gene = [&](const auto& va, const auto& vb) {
      if (in_a && in_b) return pick(va[l], vb[l]);
      return in_a ? va[l] : vb[l];
    };
    out.mlp_ratio.push_back(gene(pa.mlp_ratio, pb.mlp_ratio));
    out.heads.push_back(gene(pa.heads, pb.heads));
    out.u_th.push_back(gene(pa.u_th, pb.u_th));
    out.tau.push_back(gene(pa.tau, pb.tau));
  }
  out.time_step = pick(pa.time_step, pb.time_step);
  out.embed_dim = pick(pa.embed_dim, pb.embed_dim);
  return out;
}

std::vector<double> minmax_scale(const std::vector<double>& values) {
  if (values.empty()) throw ValueError("minmax_scale needs at least one value");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(values.size(), 0.5);
  if (range > 0.0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::clamp((values[i] - min) / range, 0.0, 1.0);
  }
  return out;
}

double f_aeb(double scaled_accuracy, double scaled_energy, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValueError("alpha must lie in [0, 1]");
  return alpha * (1.0 - scaled_energy) + (1.0 - alpha) * scaled_accuracy;
}

void EvoConfig::validate() const {
  if (population_size < 1) throw ValueError("population_size must be >= 1");
  if (generations < 1) throw ValueError("generations must be >= 1");
  if (parent_count < 1 || parent_count > population_size) {
    throw ValueError("parent_count must lie in [1, population_size]");
  }
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw ValueError("mutation_prob must lie in [0, 1]");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw ValueError("crossover_prob must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValueError("alpha must lie in [0, 1]");
  if (total_sample_budget < 0) throw ValueError("total_sample_budget must be >= 0");
}

EvaluationError::EvaluationError(Candidate candidate, const std::string& message)
    : Error("evaluating " + format_candidate(candidate) + ": " + message), candidate_(std::move(candidate)) {}

void rescale(std::vector<FitnessRecord>& records, double alpha) {
  if (records.empty()) return;
  std::vector<double> acc, energy;
  acc.reserve(records.size());
  energy.reserve(records.size());
  for (const auto& r : records) {
    acc.push_back(r.accuracy);
    energy.push_back(r.energy_joules);
  }
  const auto sa = minmax_scale(acc);
  const auto se = minmax_scale(energy);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].scaled_acc = sa[i];
    records[i].scaled_energy = se[i];
    records[i].fitness = f_aeb(sa[i], se[i], alpha);
  }
}

std::vector<std::size_t> top_k(const std::vector<FitnessRecord>& records, std::size_t k) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].fitness > records[b].fitness; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

namespace {

class RecordBook {
 public:
  RecordBook(const Evaluator& evaluator, std::uint64_t seed) : evaluator_(evaluator), seed_(seed) {}

  bool seen(const Candidate& c) const { return index_.count(format_candidate(c)) != 0; }

  std::size_t add(const Candidate& c, int generation) {
    const std::string key = format_candidate(c);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    Evaluation e;
    try {
      e = evaluator_(c);
    } catch (const std::exception& ex) {
      throw EvaluationError(c, ex.what());
    }
    if (!std::isfinite(e.accuracy) || !std::isfinite(e.energy_joules)) {
      throw EvaluationError(c, "non-finite accuracy or energy");
    }
    FitnessRecord r;
    r.candidate = c;
    r.accuracy = e.accuracy;
    r.energy_joules = e.energy_joules;
    r.generation = generation;
    r.seed = seed_;
    records.push_back(std::move(r));
    index_.emplace(key, records.size() - 1);
    return records.size() - 1;
  }

  std::size_t index_of(const Candidate& c) const { return index_.at(format_candidate(c)); }

  std::vector<FitnessRecord> records;

 private:
  const Evaluator& evaluator_;
  std::uint64_t seed_;
  std::map<std::string, std::size_t> index_;
};

constexpr int kMaxChildAttempts = 100;

}  // namespace

EvoResult evolve(const SearchSpace& space, const Evaluator& evaluator, const EvoConfig& config) {
  config.validate();
  space.validate();
  Rng rng(config.seed);
  RecordBook book(evaluator, config.seed);
  EvoResult result;
  const auto budget_left = [&] {
    return config.total_sample_budget == 0 ||
           book.records.size() < static_cast<std::size_t>(config.total_sample_budget);
  };

  std::vector<Candidate> population;
  std::set<std::string> in_population;
  auto try_add = [&](const Candidate& c) {
    if (!in_population.insert(format_candidate(c)).second) return false;
    population.push_back(c);
    return true;
  };
  for (int attempt = 0; population.size() < static_cast<std::size_t>(config.population_size) &&
                        attempt < config.population_size * kMaxChildAttempts;
       ++attempt) {
    try_add(random_candidate(space, rng));
  }

  for (int gen = 0; gen < config.generations; ++gen) {
    std::vector<std::size_t> members;
    for (const auto& c : population) {
      if (!book.seen(c)) {
        if (!budget_left()) continue;
        book.add(c, gen);
      }
      members.push_back(book.index_of(c));
    }
    rescale(book.records, config.alpha);
    if (members.empty()) break;

    std::vector<std::size_t> order = members;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return book.records[a].fitness > book.records[b].fitness;
    });
    result.best_per_generation.push_back(top_k(book.records, 1).front());
    if (gen + 1 == config.generations || !budget_left()) break;

    order.resize(std::min(order.size(), static_cast<std::size_t>(config.parent_count)));
    std::vector<Candidate> parents;
    for (std::size_t i : order) parents.push_back(book.records[i].candidate);

    population.clear();
    in_population.clear();
    if (config.elitist) {
      for (const auto& p : parents) try_add(p);
    }
    while (population.size() < static_cast<std::size_t>(config.population_size)) {
      bool placed = false;
      for (int attempt = 0; attempt < kMaxChildAttempts && !placed; ++attempt) {
        const std::size_t i = rng.below(parents.size());
        Candidate child = parents[i];
        if (parents.size() > 1 && rng.bernoulli(config.crossover_prob)) {
          std::size_t j = rng.below(parents.size() - 1);
          if (j >= i) ++j;
          child = crossover(parents[i], parents[j], space, rng);
        }
        child = mutate(child, space, rng, config.mutation_prob);
        if (!book.seen(child)) placed = try_add(child);
      }
      for (int attempt = 0; attempt < kMaxChildAttempts && !placed; ++attempt) {
        Candidate c = random_candidate(space, rng);
        if (!book.seen(c)) placed = try_add(c);
      }
      if (!placed) break;  // the space is exhausted
    }
  }
  result.records = std::move(book.records);
  return result;
}

std::vector<FitnessRecord> random_search(const SearchSpace& space, const Evaluator& evaluator, int n, Rng& rng,
                                         double alpha) {
  if (n < 1) throw ValueError("random_search needs n >= 1");
  space.validate();
  RecordBook book(evaluator, rng.state());
  for (int attempt = 0; book.records.size() < static_cast<std::size_t>(n) && attempt < n * kMaxChildAttempts;
       ++attempt) {
    Candidate c = random_candidate(space, rng);
    if (!book.seen(c)) book.add(c, 0);
  }
  rescale(book.records, alpha);
  return std::move(book.records);
}

bool dominates(double ea, double aa, double eb, double ab) noexcept {
  return ea <= eb && aa >= ab && (ea < eb || aa > ab);
}

std::vector<FitnessRecord> pareto_front(const std::vector<FitnessRecord>& records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (records[a].energy_joules != records[b].energy_joules) {
      return records[a].energy_joules < records[b].energy_joules;
    }
    return records[a].accuracy > records[b].accuracy;
  });
  std::vector<FitnessRecord> front;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < idx.size()) {
    // Equal-energy group: its best accuracy survives unless an
    // earlier (cheaper) record already matches it.
    const double e = records[idx[i]].energy_joules;
    const double group_best = records[idx[i]].accuracy;
    std::size_t j = i;
    for (; j < idx.size() && records[idx[j]].energy_joules == e; ++j) {
      if (group_best > best && records[idx[j]].accuracy == group_best) front.push_back(records[idx[j]]);
    }
    best = std::max(best, group_best);
    i = j;
  }
  return front;
}

namespace {

std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t a = lo, b = mid, k = lo;
  while (a < mid && b < hi) {
    if (v[b] < v[a]) {
      swaps += mid - a;
      buf[k++] = v[b++];
    } else {
      buf[k++] = v[a++];
    }
  }
  while (a < mid) buf[k++] = v[a++];
  while (b < hi) buf[k++] = v[b++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

template <class Eq>
std::uint64_t tied_pairs(std::size_t n, Eq eq) {
  std::uint64_t pairs = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && eq(i - 1, i)) {
      ++run;
    } else {
      pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  return pairs;
}

}  // namespace

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ValueError("kendall_tau inputs differ in length");
  if (x.size() < 2) throw ValueError("kendall_tau needs at least 2 values");
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  std::vector<double> ys(n), xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t n1 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
  const std::uint64_t n3 =
      tied_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b] && ys[a] == ys[b]; });
  std::vector<double> buf(n);
  const std::uint64_t swaps = merge_count(ys, buf, 0, n);
  const std::uint64_t n2 = tied_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });
  if (n1 == n0 || n2 == n0) return 0.0;
  // concordant - discordant over pairs untied in both coordinates
  const auto diff = static_cast<std::int64_t>(n0 - n1 - n2 + n3) - 2 * static_cast<std::int64_t>(swaps);
  return static_cast<double>(diff) / std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

double hypervolume(const std::vector<FitnessRecord>& front, double ref_energy, double ref_accuracy) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : front) {
    if (r.energy_joules < ref_energy && r.accuracy > ref_accuracy) pts.emplace_back(r.energy_joules, r.accuracy);
  }
  std::sort(pts.begin(), pts.end());
  double area = 0.0, best = ref_accuracy;
  // Sweep from the reference energy downward: each strip's height is the
  // best accuracy reachable at or below that energy.
  std::vector<std::pair<double, double>> stairs;
  for (const auto& p : pts) {
    if (p.second > best) {
      stairs.push_back(p);
      best = p.second;
    }
  }
  for (std::size_t i = 0; i < stairs.size(); ++i) {
    const double right = i + 1 < stairs.size() ? stairs[i + 1].first : ref_energy;
    area += (right - stairs[i].first) * (stairs[i].second - ref_accuracy);
  }
  return area;
}

double coverage(const std::vector<FitnessRecord>& front, const std::vector<FitnessRecord>& target) {
  if (target.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& t : target) {
    for (const auto& f : front) {
      if (f.energy_joules <= t.energy_joules && f.accuracy >= t.accuracy) {
        ++covered;
        break;
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(target.size());
}

AnalyticEvaluator::AnalyticEvaluator(SearchSpace space, ModelSettings settings)
    : space_(std::move(space)), settings_(settings) {
  space_.validate();
  settings_.validate();
}

namespace {

double block_rate(const LifParams& p) { return std::clamp(0.35 * std::sqrt(p.tau / 2.0) / p.u_th, 0.02, 0.95); }

// Stable 64-bit FNV-1a, used as a deterministic per-candidate jitter source.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

constexpr double kSpsRate = 0.2;

}  // namespace

FrTrace AnalyticEvaluator::trace(const Candidate& c) const {
  const SubnetConfig cfg = resolve(c, space_);
  FrTrace t;
  for (const auto& layer : flops_catalog(cfg, settings_)) {
    if (layer.kind == LayerKind::Ann) continue;
    double fr = kSpsRate;
    if (layer.id.rfind("block", 0) == 0) {
      const int l = std::stoi(layer.id.substr(5, layer.id.find('.') - 5));
      fr = block_rate(cfg.blocks[static_cast<std::size_t>(l)].lif);
    } else if (layer.id == "head") {
      fr = block_rate(cfg.blocks.back().lif);
    }
    t[layer.id] = fr;
  }
  return t;
}

Evaluation AnalyticEvaluator::operator()(const Candidate& c) const {
  const SubnetConfig cfg = resolve(c, space_);
  const double energy = model_energy(c, space_, settings_, trace(c)).total_joules;

  double capacity_units = 0.0;
  for (const auto& b : cfg.blocks) capacity_units += static_cast<double>(cfg.embed_dim) * (1.0 + b.hidden / (4.0 * cfg.embed_dim));
  const double capacity = 1.0 - std::exp(-capacity_units / 1200.0);

  double activity = 0.0, penalty = 0.0, mean_th = 0.0;
  for (const auto& b : cfg.blocks) {
    activity += block_rate(b.lif) * cfg.time_step;
    penalty += 0.5 * std::pow(std::log(b.lif.tau / 2.0), 2.0);
    mean_th += b.lif.u_th;
  }
  const double layers = static_cast<double>(cfg.blocks.size());
  activity /= layers;
  mean_th /= layers;
  double spread = 0.0;
  for (const auto& b : cfg.blocks) spread += (b.lif.u_th - mean_th) * (b.lif.u_th - mean_th);
  penalty = penalty / layers + 0.5 * spread / layers;

  const double jitter =
      static_cast<double>(fnv1a(format_candidate(c)) >> 11) * 0x1.0p-53 - 0.5;  // uniform in [-0.5, 0.5)
  const double acc = 0.45 + 0.25 * capacity + 0.12 * (1.0 - std::exp(-activity / 0.6)) - 0.15 * penalty +
                     0.03 * jitter;
  return {std::clamp(acc, 0.0, 1.0), energy};
}

void write_record(std::ostream& os, const FitnessRecord& r) {
  nlohmann::ordered_json j;
  j["candidate"] = format_candidate(r.candidate);
  j["accuracy"] = r.accuracy;
  j["energy_joules"] = r.energy_joules;
  j["scaled_acc"] = r.scaled_acc;
  j["scaled_energy"] = r.scaled_energy;
  j["fitness"] = r.fitness;
  j["generation"] = r.generation;
  j["seed"] = r.seed;
  os << j.dump() << '\n';
}

std::vector<FitnessRecord> read_records(std::istream& is, const SearchSpace& space) {
  std::vector<FitnessRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      FitnessRecord r;
      r.candidate = parse_candidate(j.at("candidate").get<std::string>(), space);
      r.accuracy = j.at("accuracy").get<double>();
      r.energy_joules = j.at("energy_joules").get<double>();
      r.scaled_acc = j.at("scaled_acc").get<double>();
      r.scaled_energy = j.at("scaled_energy").get<double>();
      r.fitness = j.at("fitness").get<double>();
      r.generation = j.at("generation").get<int>();
      r.seed = j.at("seed").get<std::uint64_t>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("results line " + std::to_string(lineno) + ": " + e.what());
    } catch (const ValueError& e) {
      throw DataError("results line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace spikenas
