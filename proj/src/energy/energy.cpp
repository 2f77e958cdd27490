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

#include "spikenas/energy/energy.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "spikenas/error.hpp"

namespace spikenas {

std::string_view kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::SnnConv:
      return "snn_conv";
    case LayerKind::SnnFc:
      return "snn_fc";
    case LayerKind::Ssa:
      return "ssa";
    case LayerKind::Ann:
      return "ann";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "snn_conv") return LayerKind::SnnConv;
  if (name == "snn_fc") return LayerKind::SnnFc;
  if (name == "ssa") return LayerKind::Ssa;
  if (name == "ann") return LayerKind::Ann;
  throw ValueError("unknown layer kind '" + std::string(name) + "'");
}

double EnergyReport::total_sops() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.sops;
  return s;
}

std::uint64_t conv_flops(std::uint64_t kh, std::uint64_t kw, std::uint64_t cin, std::uint64_t cout, std::uint64_t ho,
                         std::uint64_t wo) {
  return kh * kw * cin * cout * ho * wo;
}

std::uint64_t linear_flops(std::uint64_t tokens, std::uint64_t din, std::uint64_t dout) { return tokens * din * dout; }

std::uint64_t ssa_flops(std::uint64_t heads, std::uint64_t tokens, std::uint64_t d_head) {
  return 2 * heads * tokens * tokens * d_head;
}

double sops(double flops, double fr, int time_step) {
  if (!(fr >= 0.0 && fr <= 1.0)) throw ValueError("firing rate must lie in [0, 1], got " + std::to_string(fr));
  if (time_step < 1) throw ValueError("time-step must be >= 1");
  if (!(flops >= 0.0)) throw ValueError("FLOPs must be non-negative");
  return fr * time_step * flops;
}

double ann_block_power(double flops) { return kEnergyPerMac * flops; }
double snn_block_power(double sops) { return kEnergyPerAc * sops; }

std::vector<LayerSpec> flops_catalog(const SubnetConfig& config, const ModelSettings& settings) {
  settings.validate();
  std::vector<LayerSpec> out;
  const auto widths = sps_widths(config.embed_dim);
  const auto size = static_cast<std::uint64_t>(settings.image_size);
  const std::uint64_t half = size / 2, quarter = size / 4;
  const std::uint64_t sides[] = {size, size, half, half};
  std::uint64_t cin = static_cast<std::uint64_t>(settings.in_channels);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto cout = static_cast<std::uint64_t>(widths[i]);
    out.push_back({"sps.conv" + std::to_string(i), i == 0 ? LayerKind::Ann : LayerKind::SnnConv,
                   conv_flops(3, 3, cin, cout, sides[i], sides[i])});
    cin = cout;
  }
  const auto d = static_cast<std::uint64_t>(config.embed_dim);
  out.push_back({"sps.rpe", LayerKind::SnnConv, conv_flops(3, 3, d, d, quarter, quarter)});
  const std::uint64_t n = quarter * quarter;
  for (std::size_t l = 0; l < config.blocks.size(); ++l) {
    const auto& b = config.blocks[l];
    const std::string p = "block" + std::to_string(l);
    const auto hidden = static_cast<std::uint64_t>(b.hidden);
    const auto heads = static_cast<std::uint64_t>(b.heads);
    out.push_back({p + ".q", LayerKind::SnnFc, linear_flops(n, d, d)});
    out.push_back({p + ".k", LayerKind::SnnFc, linear_flops(n, d, d)});
    out.push_back({p + ".v", LayerKind::SnnFc, linear_flops(n, d, d)});
    out.push_back({p + ".attn", LayerKind::Ssa, ssa_flops(heads, n, d / heads)});
    out.push_back({p + ".proj", LayerKind::SnnFc, linear_flops(n, d, d)});
    out.push_back({p + ".fc1", LayerKind::SnnFc, linear_flops(n, d, hidden)});
    out.push_back({p + ".fc2", LayerKind::SnnFc, linear_flops(n, hidden, d)});
  }
  out.push_back({"head", LayerKind::SnnFc, linear_flops(1, d, static_cast<std::uint64_t>(settings.num_classes))});
  return out;
}

EnergyReport model_energy(const std::vector<LayerSpec>& catalog, const FrTrace& trace, int time_step) {
  if (time_step < 1) throw ValueError("time-step must be >= 1");
  EnergyReport r;
  r.time_step = time_step;
  double mac_part = 0.0;
  double ac_sops = 0.0;
  for (const auto& layer : catalog) {
    LayerCost c{layer.id, layer.kind, layer.flops, 1.0, 0.0, 0.0};
    if (layer.kind == LayerKind::Ann) {
      r.first_layer_flops += layer.flops;
      c.joules = r.e_mac * static_cast<double>(layer.flops);
      mac_part += static_cast<double>(layer.flops);
    } else {
      const auto it = trace.find(layer.id);
      if (it == trace.end()) throw ValueError("firing-rate trace has no entry for layer '" + layer.id + "'");
      c.fr_in = it->second;
      c.sops = sops(static_cast<double>(layer.flops), c.fr_in, time_step);
      c.joules = r.e_ac * c.sops;
      ac_sops += c.sops;
    }
    r.layers.push_back(std::move(c));
  }
  r.total_joules = r.e_mac * mac_part + r.e_ac * ac_sops;
  return r;
}

EnergyReport model_energy(const Candidate& candidate, const SearchSpace& space, const ModelSettings& settings,
                          const FrTrace& trace) {
  const SubnetConfig cfg = resolve(candidate, space);
  return model_energy(flops_catalog(cfg, settings), trace, cfg.time_step);
}

double ann_energy(const std::vector<LayerSpec>& catalog) {
  double flops = 0.0;
  for (const auto& l : catalog) flops += static_cast<double>(l.flops);
  return ann_block_power(flops);
}

FrTrace uniform_trace(const std::vector<LayerSpec>& catalog, double fr) {
  FrTrace t;
  for (const auto& l : catalog) {
    if (l.kind != LayerKind::Ann) t[l.id] = fr;
  }
  return t;
}

FrTrace to_fr_trace(const LayerFiring& firing) {
  FrTrace t;
  for (const auto& [id, stats] : firing) t[id] = stats.fr();
  return t;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_field(const std::string& s, const char* what, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("trace line " + std::to_string(line) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

void write_fr_trace(std::ostream& os, const std::vector<LayerSpec>& catalog, const FrTrace& trace) {
  for (const auto& l : catalog) {
    if (l.kind == LayerKind::Ann) continue;
    const auto it = trace.find(l.id);
    if (it == trace.end()) throw ValueError("firing-rate trace has no entry for layer '" + l.id + "'");
    os << l.id << ',' << kind_name(l.kind) << ',' << l.flops << ',' << fmt_double(it->second) << '\n';
  }
}

std::vector<TraceRow> read_fr_trace(std::istream& is) {
  std::vector<TraceRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw DataError("trace line " + std::to_string(lineno) + ": expected 4 fields");
    if (f[0] == "layer_id") continue;
    TraceRow r;
    r.id = f[0];
    try {
      r.kind = parse_layer_kind(f[1]);
    } catch (const ValueError& e) {
      throw DataError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    r.flops = parse_field<std::uint64_t>(f[2], "flops", lineno);
    r.fr = parse_field<double>(f[3], "fr", lineno);
    if (!(r.fr >= 0.0 && r.fr <= 1.0)) throw DataError("trace line " + std::to_string(lineno) + ": fr outside [0,1]");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_energy_csv(std::ostream& os, const EnergyReport& report) {
  os << "layer_id,kind,flops,fr,sops,joules\n";
  for (const auto& l : report.layers) {
    os << l.id << ',' << kind_name(l.kind) << ',' << l.flops << ',' << fmt_double(l.fr_in) << ','
       << fmt_double(l.sops) << ',' << fmt_double(l.joules) << '\n';
  }
 std::uint64_t flops = 0;
  for (const auto& l : report.layers) flops += l.flops;
  os << "total,," << flops << ",," << fmt_double(report.total_sops()) << ','
     << fmt_double(report.total_joules) << '\n';
}

}  // namespace spikenas
