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

#include "spikenas/arch/candidate.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace spikenas {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

std::string with_decimal(double v) {
  std::string s = shortest(v);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Token {
  std::string_view text;
  std::size_t position;  // 1-based tuple position
};

std::vector<Token> split_tuple(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw ParseError("tuple", 0, "candidate must be a parenthesized, comma-separated tuple");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<Token> out;
  std::size_t pos = 1;
  for (;;) {
    const auto comma = text.find(',');
    out.push_back({trim(text.substr(0, comma)), pos++});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

double parse_number(const Token& tok, const std::string& field) {
  double v = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (tok.text.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(field, tok.position, "expected a number, got '" + std::string(tok.text) + "'");
  }
  return snap(v);
}

int parse_int(const Token& tok, const std::string& field) {
  const double v = parse_number(tok, field);
  if (v != std::round(v) || std::abs(v) > 1e9) {
    throw ParseError(field, tok.position, "expected an integer, got '" + std::string(tok.text) + "'");
  }
  return static_cast<int>(v);
}

std::string indexed(const char* name, std::size_t i) { return std::string(name) + "[" + std::to_string(i) + "]"; }

void check_count(const std::vector<Token>& toks, std::size_t expected, const std::string& what) {
  if (toks.size() != expected) {
    throw ParseError("tuple", toks.size(),
                     what + " expects " + std::to_string(expected) + " values, got " + std::to_string(toks.size()));
  }
}

void check_on_grid(std::vector<std::string>& out, const std::string& field, double v, const SearchDim& dim) {
  if (!dim.contains(v)) {
    out.push_back(field + " = " + shortest(v) + " is not in the search grid (" + shortest(dim.lower) + ", " +
                  shortest(dim.upper) + ", " + shortest(dim.step) + ")");
  }
}

int fixed_depth(const SearchSpace& space) { return space.min_depth(); }

}  // namespace

ParseError::ParseError(std::string field, std::size_t position, const std::string& message)
    : ValueError("field '" + field + "' (position " + std::to_string(position) + "): " + message),
      field_(std::move(field)),
      position_(position) {}

std::string format_candidate(const Candidate& c) {
  std::ostringstream os;
  os << '(';
  bool first = true;
  auto put = [&](const std::string& s) {
    if (!first) os << ", ";
    os << s;
    first = false;
  };
  if (const auto* snn = std::get_if<CandidateSnn>(&c)) {
    for (double v : snn->u_th) put(with_decimal(v));
    for (double v : snn->tau) put(shortest(v));
    put(std::to_string(snn->time_step));
  } else {
    const auto& a = std::get<CandidateArch>(c);
    put(std::to_string(a.depth));
    for (double v : a.mlp_ratio) put(with_decimal(v));
    for (int v : a.heads) put(std::to_string(v));
    for (double v : a.u_th) put(with_decimal(v));
    for (double v : a.tau) put(shortest(v));
    put(std::to_string(a.time_step));
    put(std::to_string(a.embed_dim));
  }
  os << ')';
  return os.str();
}

Candidate parse_candidate(std::string_view text, const SearchSpace& space) {
  const auto toks = split_tuple(text);
  if (space.is_snn()) {
    const auto blocks = static_cast<std::size_t>(fixed_depth(space));
    check_count(toks, 2 * blocks + 1, "neuron-trait tuple (u_th x " + std::to_string(blocks) + ", tau x " +
                                          std::to_string(blocks) + ", time-step)");
    CandidateSnn c;
    for (std::size_t i = 0; i < blocks; ++i) c.u_th.push_back(parse_number(toks[i], indexed("u_th", i)));
    for (std::size_t i = 0; i < blocks; ++i) c.tau.push_back(parse_number(toks[blocks + i], indexed("tau", i)));
    c.time_step = parse_int(toks[2 * blocks], "time_step");
    return c;
  }
  if (toks.empty()) throw ParseError("depth", 1, "missing depth");
  CandidateArch c;
  c.depth = parse_int(toks[0], "depth");
  if (c.depth < 1 || c.depth > 64) throw ParseError("depth", 1, "depth out of range");
  const auto d = static_cast<std::size_t>(c.depth);
  check_count(toks, 4 * d + 3, "architecture tuple of depth " + std::to_string(d));
  std::size_t k = 1;
  for (std::size_t i = 0; i < d; ++i) c.mlp_ratio.push_back(parse_number(toks[k++], indexed("mlp_ratio", i)));
  for (std::size_t i = 0; i < d; ++i) c.heads.push_back(parse_int(toks[k++], indexed("head_num", i)));
  for (std::size_t i = 0; i < d; ++i) c.u_th.push_back(parse_number(toks[k++], indexed("u_th", i)));
  for (std::size_t i = 0; i < d; ++i) c.tau.push_back(parse_number(toks[k++], indexed("tau", i)));
  c.time_step = parse_int(toks[k++], "time_step");
  c.embed_dim = parse_int(toks[k++], "embed_dim");
  return c;
}

std::vector<std::string> validate(const Candidate& c, const SearchSpace& space) {
  std::vector<std::string> out;
  if (const auto* snn = std::get_if<CandidateSnn>(&c)) {
    if (!space.is_snn()) {
      out.push_back("neuron-trait candidate used with transformer space " + std::string(space_name(space.kind)));
      return out;
    }
    const auto blocks = static_cast<std::size_t>(fixed_depth(space));
    if (snn->u_th.size() != blocks) out.push_back("u_th list length must be " + std::to_string(blocks));
    if (snn->tau.size() != blocks) out.push_back("tau list length must be " + std::to_string(blocks));
    for (std::size_t i = 0; i < snn->u_th.size(); ++i) check_on_grid(out, indexed("u_th", i), snn->u_th[i], space.u_th);
    for (std::size_t i = 0; i < snn->tau.size(); ++i) check_on_grid(out, indexed("tau", i), snn->tau[i], space.tau);
    check_on_grid(out, "time_step", snn->time_step, space.time_step);
    return out;
  }
  const auto& a = std::get<CandidateArch>(c);
  if (space.is_snn()) {
    out.push_back("architecture candidate used with the neuron-trait space");
    return out;
  }
  check_on_grid(out, "depth", a.depth, space.depth);
  const auto d = static_cast<std::size_t>(std::max(a.depth, 0));
  auto check_len = [&](std::size_t n, const char* name) {
    if (n != d) out.push_back(std::string(name) + " list length " + std::to_string(n) + " != depth " + std::to_string(d));
  };
  check_len(a.mlp_ratio.size(), "mlp_ratio");
  check_len(a.heads.size(), "head_num");
  check_len(a.u_th.size(), "u_th");
  check_len(a.tau.size(), "tau");
  for (std::size_t i = 0; i < a.mlp_ratio.size(); ++i) {
    check_on_grid(out, indexed("mlp_ratio", i), a.mlp_ratio[i], space.mlp_ratio);
  }
  for (std::size_t i = 0; i < a.heads.size(); ++i) {
    check_on_grid(out, indexed("head_num", i), a.heads[i], space.head_num);
    if (a.heads[i] > 0 && a.embed_dim % a.heads[i] != 0) {
      out.push_back("embed_dim " + std::to_string(a.embed_dim) + " not divisible by " + indexed("head_num", i));
    }
  }
  for (std::size_t i = 0; i < a.u_th.size(); ++i) check_on_grid(out, indexed("u_th", i), a.u_th[i], space.u_th);
  for (std::size_t i = 0; i < a.tau.size(); ++i) check_on_grid(out, indexed("tau", i), a.tau[i], space.tau);
  check_on_grid(out, "time_step", a.time_step, space.time_step);
  check_on_grid(out, "embed_dim", a.embed_dim, space.embed_dim);
  return out;
}

void require_valid(const Candidate& c, const SearchSpace& space) {
  const auto violations = validate(c, space);
  if (violations.empty()) return;
  std::string msg = "invalid candidate " + format_candidate(c) + ":";
  for (const auto& v : violations) msg += "\n  " + v;
  throw ValueError(msg);
}

CandidateArch maximal_candidate(const SearchSpace& space, double u_th, double tau) {
  CandidateArch a;
  a.depth = space.max_depth();
  const auto d = static_cast<std::size_t>(a.depth);
  a.mlp_ratio.assign(d, space.mlp_ratio.at(space.mlp_ratio.size() - 1));
  a.heads.assign(d, space.max_heads());
  a.u_th.assign(d, u_th);
  a.tau.assign(d, tau);
  a.time_step = static_cast<int>(std::lround(space.time_step.at(space.time_step.size() - 1)));
  a.embed_dim = space.max_embed();
  return a;
}

Candidate baseline_candidate(const SearchSpace& space) {
  if (space.is_snn()) {
    const auto blocks = static_cast<std::size_t>(fixed_depth(space));
    return CandidateSnn{std::vector<double>(blocks, 1.0), std::vector<double>(blocks, 2.0), 4};
  }
  return maximal_candidate(space, 1.0, 2.0);
}

int mlp_hidden(double ratio, int embed_dim) { return static_cast<int>(std::lround(ratio * embed_dim)); }

std::vector<int> sps_widths(int embed_dim) {
  return {std::max(embed_dim / 8, 1), std::max(embed_dim / 4, 1), std::max(embed_dim / 2, 1), embed_dim};
}

SubnetConfig resolve(const Candidate& c, const SearchSpace& space) {
  require_valid(c, space);
  SubnetConfig cfg;
  if (const auto* snn = std::get_if<CandidateSnn>(&c)) {
    cfg.embed_dim = space.max_embed();
    cfg.time_step = snn->time_step;
    const int hidden = space.max_hidden();
    for (std::size_t i = 0; i < snn->u_th.size(); ++i) {
      cfg.blocks.push_back({space.max_heads(), hidden, LifParams{snn->u_th[i], snn->tau[i], 1.0}});
    }
    return cfg;
  }
  const auto& a = std::get<CandidateArch>(c);
  cfg.embed_dim = a.embed_dim;
  cfg.time_step = a.time_step;
  for (std::size_t i = 0; i < static_cast<std::size_t>(a.depth); ++i) {
    cfg.blocks.push_back({a.heads[i], mlp_hidden(a.mlp_ratio[i], a.embed_dim), LifParams{a.u_th[i], a.tau[i], 1.0}});
  }
  return cfg;
}

}  // namespace spikenas
