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

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spikenas/arch/search_space.hpp"
#include "spikenas/error.hpp"
#include "spikenas/neuron/lif.hpp"

namespace spikenas {

/// Neuron traits only: (u_th x L, tau x L, time-step), L = blocks of the fixed net.
struct CandidateSnn {
  std::vector<double> u_th;
  std::vector<double> tau;
  int time_step = 4;

  friend bool operator==(const CandidateSnn&, const CandidateSnn&) = default;
};

/// (depth, mlp ratio x d, head num x d, u_th x d, tau x d, time-step, embed dim).
struct CandidateArch {
  int depth = 0;
  std::vector<double> mlp_ratio;
  std::vector<int> heads;
  std::vector<double> u_th;
  std::vector<double> tau;
  int time_step = 4;
  int embed_dim = 0;

  friend bool operator==(const CandidateArch&, const CandidateArch&) = default;
};

using Candidate = std::variant<CandidateSnn, CandidateArch>;

/// Tuple text, e.g. "(1.0, 1.0, 1.0, 1.0, 2, 2, 2, 2, 4)". Thresholds and
/// MLP ratios always carry a decimal point; taus use the shortest form;
/// counts are integers.
std::string format_candidate(const Candidate& c);

/// Error naming the tuple field that failed to parse.
class ParseError : public ValueError {
 public:
  ParseError(std::string field, std::size_t position, const std::string& message);
  const std::string& field() const noexcept { return field_; }
  std::size_t position() const noexcept { return position_; }

 private:
  std::string field_;
  std::size_t position_;
};

/// Parses the tuple grammar for `space`. Values are snapped to the 1e-9 grid;
/// grid membership is checked by validate(), not here.
Candidate parse_candidate(std::string_view text, const SearchSpace& space);

/// Every grid or length violation, empty when the candidate is valid.
std::vector<std::string> validate(const Candidate& c, const SearchSpace& space);

/// Throws ValueError listing the violations.
void require_valid(const Candidate& c, const SearchSpace& space);

/// The unmodified Spikformer neuron setting for `space`: u_th 1.0, tau 2,
/// time-step 4 (and maximal architecture for transformer spaces).
Candidate baseline_candidate(const SearchSpace& space);

/// Largest architecture of the space with the given neuron traits.
CandidateArch maximal_candidate(const SearchSpace& space, double u_th = 1.0, double tau = 2.0);

/// Resolved per-block settings of a concrete network.
struct BlockConfig {
  int heads = 1;
  int hidden = 1;
  LifParams lif;

  friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

struct SubnetConfig {
  int embed_dim = 0;
  int time_step = 1;
  std::vector<BlockConfig> blocks;

  int depth() const noexcept { return static_cast<int>(blocks.size()); }
  friend bool operator==(const SubnetConfig&, const SubnetConfig&) = default;
};

/// round(ratio * embed).
int mlp_hidden(double ratio, int embed_dim);

/// Validates `c` against `space` and resolves widths and neuron traits.
SubnetConfig resolve(const Candidate& c, const SearchSpace& space);

/// Layer width of the four patch-splitting stages: embed/8, /4, /2, /1 (floor).
std::vector<int> sps_widths(int embed_dim);

}  // namespace spikenas
