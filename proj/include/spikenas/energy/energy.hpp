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
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spikenas/arch/model.hpp"

namespace spikenas {

/// 45 nm CMOS energy per operation, joules.
inline constexpr double kEnergyPerMac = 4.6e-12;
inline constexpr double kEnergyPerAc = 0.9e-12;

/// `Ann` layers are billed per MAC on dense input (the image-encoding conv,
/// or every layer of a non-spiking network); the rest per spike-driven AC.
enum class LayerKind { SnnConv, SnnFc, Ssa, Ann };

std::string_view kind_name(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

/// A layer and its multiply-accumulate count (1 MAC = 1 FLOP).
struct LayerSpec {
  std::string id;
  LayerKind kind = LayerKind::SnnFc;
  std::uint64_t flops = 0;
};

struct LayerCost {
  std::string id;
  LayerKind kind = LayerKind::SnnFc;
  std::uint64_t flops = 0;
  double fr_in = 0.0;  // firing rate of the input spike train
  double sops = 0.0;   // fr_in * t * flops; 0 for Ann layers
  double joules = 0.0;
};

struct EnergyReport {
  std::uint64_t first_layer_flops = 0;
  std::vector<LayerCost> layers;
  double e_mac = kEnergyPerMac;
  double e_ac = kEnergyPerAc;
  int time_step = 1;
  double total_joules = 0.0;

  double total_sops() const;
  /// Total in millijoules, the scale commonly quoted for these networks.
  double millijoules() const noexcept { return total_joules * 1e3; }
};

/// Firing rate per layer id.
using FrTrace = std::map<std::string, double>;

std::uint64_t conv_flops(std::uint64_t kh, std::uint64_t kw, std::uint64_t cin, std::uint64_t cout, std::uint64_t ho,
                         std::uint64_t wo);
std::uint64_t linear_flops(std::uint64_t tokens, std::uint64_t din, std::uint64_t dout);
/// Both attention products: heads * N^2 * d_head for Q K^T and again for (.) V.
std::uint64_t ssa_flops(std::uint64_t heads, std::uint64_t tokens, std::uint64_t d_head);

/// fr * t * flops. Throws ValueError for fr outside [0, 1] or t < 1.
double sops(double flops, double fr, int time_step);

/// 4.6 pJ x FLOPs.
double ann_block_power(double flops);
/// 0.9 pJ x SOPs.
double snn_block_power(double sops);

/// Every layer of the network with its MAC count, in execution order. The
/// first entry is the image-encoding conv (kind Ann).
std::vector<LayerSpec> flops_catalog(const SubnetConfig& config, const ModelSettings& settings);

/// Energy of the spiking network: E_MAC on the encoding layer's FLOPs plus
/// E_AC on the SOPs of every other layer. Throws ValueError when a
/// spike-consuming layer has no trace entry.
EnergyReport model_energy(const std::vector<LayerSpec>& catalog, const FrTrace& trace, int time_step);
EnergyReport model_energy(const Candidate& candidate, const SearchSpace& space, const ModelSettings& settings,
                          const FrTrace& trace);

/// Energy of the same layers run as a non-spiking network: 4.6 pJ x sum FLOPs.
double ann_energy(const std::vector<LayerSpec>& catalog);

/// Same rate on every spike-consuming layer.
FrTrace uniform_trace(const std::vector<LayerSpec>& catalog, double fr);
FrTrace to_fr_trace(const LayerFiring& firing);

/// Trace file: one `layer_id,kind,flops,fr` line per spike-consuming layer.
struct TraceRow {
  std::string id;
  LayerKind kind = LayerKind::SnnFc;
  std::uint64_t flops = 0;
  double fr = 0.0;
};
void write_fr_trace(std::ostream& os, const std::vector<LayerSpec>& catalog, const FrTrace& trace);
std::vector<TraceRow> read_fr_trace(std::istream& is);

/// CSV with header layer_id,kind,flops,fr,sops,joules and a final `total` row.
void write_energy_csv(std::ostream& os, const EnergyReport& report);

}  // namespace spikenas
