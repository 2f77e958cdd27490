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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "spikenas/arch/candidate.hpp"
#include "spikenas/arch/supernet.hpp"
#include "spikenas/energy/energy.hpp"
#include "spikenas/tensor/rng.hpp"

namespace spikenas {

/// Depth first, then every remaining gene uniform over its grid.
Candidate random_candidate(const SearchSpace& space, Rng& rng);

/// Number of genes in the current genome (per-layer genes count once per layer).
std::size_t gene_count(const Candidate& c);

/// With probability `mutation_prob`, resamples one uniformly chosen gene to a
/// different grid value. Growing depth appends random layer genes; shrinking
/// truncates.
Candidate mutate(const Candidate& c, const SearchSpace& space, Rng& rng, double mutation_prob);

/// Uniform gene-wise crossover aligned at layer index. Throws ValueError when
/// the parents come from different spaces.
Candidate crossover(const Candidate& a, const Candidate& b, const SearchSpace& space, Rng& rng);

/// (v - min) / (max - min); a zero range maps every value to 0.5.
std::vector<double> minmax_scale(const std::vector<double>& values);

/// alpha * (1 - scaled_energy) + (1 - alpha) * scaled_accuracy. Lower energy
/// scores higher; the printed weighted sum would reward energy instead.
double f_aeb(double scaled_accuracy, double scaled_energy, double alpha);

struct Evaluation {
  double accuracy = 0.0;
  double energy_joules = 0.0;
};

using Evaluator = std::function<Evaluation(const Candidate&)>;

struct FitnessRecord {
  Candidate candidate;
  double accuracy = 0.0;
  double energy_joules = 0.0;
  double scaled_acc = 0.0;
  double scaled_energy = 0.0;
  double fitness = 0.0;
  int generation = 0;
  std::uint64_t seed = 0;
};

struct EvoConfig {
  int population_size = 50;
  int generations = 20;
  int parent_count = 10;
  double mutation_prob = 0.2;
  double crossover_prob = 0.5;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  /// Stop after this many distinct evaluations; 0 = no limit.
  int total_sample_budget = 0;
  bool elitist = true;

  void validate() const;
};

struct EvoResult {
  std::vector<FitnessRecord> records;  // evaluation order, final scaling
  std::vector<std::size_t> best_per_generation;  // index into records
};

/// Evaluator failures are rethrown as EvaluationError carrying the candidate.
class EvaluationError : public Error {
 public:
  EvaluationError(Candidate candidate, const std::string& message);
  const Candidate& candidate() const noexcept { return candidate_; }

 private:
  Candidate candidate_;
};

/// Evolutionary search maximizing f_aeb over min-max scores of every record
/// seen so far.
EvoResult evolve(const SearchSpace& space, const Evaluator& evaluator, const EvoConfig& config);

/// `n` distinct random candidates, scaled and scored like evolve's records.
std::vector<FitnessRecord> random_search(const SearchSpace& space, const Evaluator& evaluator, int n, Rng& rng,
                                         double alpha = 0.5);

/// Recomputes scaled scores and fitness over `records` in place.
void rescale(std::vector<FitnessRecord>& records, double alpha);

/// Indices of the `k` highest-fitness records, best first (ties by index).
std::vector<std::size_t> top_k(const std::vector<FitnessRecord>& records, std::size_t k);

/// True when (ea, aa) dominates (eb, ab): energy <=, accuracy >=, one strict.
bool dominates(double ea, double aa, double eb, double ab) noexcept;

/// Non-dominated records, energy ascending (ties keep input order).
std::vector<FitnessRecord> pareto_front(const std::vector<FitnessRecord>& records);

/// Kendall tau-b. Returns 0 when either input is constant. Throws ValueError
/// for mismatched lengths or fewer than 2 values.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

/// Area dominated by `front` and bounded by the reference point
/// (ref_energy, ref_accuracy); points beyond the reference are clipped.
double hypervolume(const std::vector<FitnessRecord>& front, double ref_energy, double ref_accuracy);

/// Share of `target` points weakly dominated (energy <=, accuracy >=) by some
/// point of `front`.
double coverage(const std::vector<FitnessRecord>& front, const std::vector<FitnessRecord>& target);

/// Closed-form stand-in for a trained supernet. Neuron traits set per-block
/// firing rates; energy is the real energy model over those rates; accuracy
/// saturates with network capacity and spiking activity and is penalized
/// for ill-conditioned thresholds and decays.
class AnalyticEvaluator {
 public:
  AnalyticEvaluator(SearchSpace space, ModelSettings settings);

  Evaluation operator()(const Candidate& c) const;
  /// Per-layer firing rates the evaluator assigns to `c`.
  FrTrace trace(const Candidate& c) const;

 private:
  SearchSpace space_;
  ModelSettings settings_;
};

/// JSON Lines results log.
void write_record(std::ostream& os, const FitnessRecord& r);
std::vector<FitnessRecord> read_records(std::istream& is, const SearchSpace& space);

}  // namespace spikenas
