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

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spikenas/evo/evolution.hpp"

namespace spikenas::cli {

/// Scatter of every record (energy on x, accuracy on y) with the Pareto
/// front as a polyline; the records in the top `top_fraction` by accuracy
/// are drawn in a second style.
void write_scatter_svg(std::ostream& os, const std::vector<FitnessRecord>& records, double top_fraction = 0.2);

/// One row per front member. When `mean_fr` has an entry for a candidate
/// string, an fr column is included.
void write_front_csv(std::ostream& os, const std::vector<FitnessRecord>& front,
                     const std::map<std::string, double>* mean_fr = nullptr);

struct TauSummary {
  double all = 0.0;        // accuracy vs energy over every record
  double top = 0.0;        // over the `top` best-fitness records
  std::size_t top_count = 0;
};

TauSummary tau_summary(const std::vector<FitnessRecord>& records, std::size_t top);

}  // namespace spikenas::cli
