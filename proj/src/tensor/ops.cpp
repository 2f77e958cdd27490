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

#include "spikenas/tensor/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spikenas/error.hpp"

namespace spikenas::ops {

namespace {

using MatR = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapR = Eigen::Map<MatR>;
using CMapR = Eigen::Map<const MatR>;

// C[M,N] (+)= op(A) op(B); op(A) is M x K, op(B) is K x N, all row-major.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const float* a,
          const float* b, float* c, bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(k);
  MapR C(c, M, N);
  CMapR A(a, trans_a ? K : M, trans_a ? M : K);
  CMapR B(b, trans_b ? N : K, trans_b ? K : N);
  if (!accumulate) C.setZero();
  if (trans_a && trans_b) {
    C.noalias() += A.transpose() * B.transpose();
  } else if (trans_a) {
    C.noalias() += A.transpose() * B;
  } else if (trans_b) {
    C.noalias() += A * B.transpose();
  } else {
    C.noalias() += A * B;
  }
}

void require_same_shape(const Variable& a, const Variable& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

Tensor finite(Tensor t, const char* where) {
  check_finite(t, where);
  return t;
}

}  // namespace

Variable add(const Variable& a, const Variable& b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return Variable::make(finite(std::move(out), "add"), {a, b}, [](Node& n) {
    for (auto& p : n.parents) {
      if (p->requires_grad) p->accumulate(n.grad);
    }
  });
}

Variable mul(const Variable& a, const Variable& b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return Variable::make(finite(std::move(out), "mul"), {a, b}, [](Node& n) {
    Node& pa = *n.parents[0];
    Node& pb = *n.parents[1];
    if (pa.requires_grad) {
      Tensor g = n.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= pb.value[i];
      pa.accumulate(std::move(g));
    }
    if (pb.requires_grad) {
      Tensor g = n.grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= pa.value[i];
      pb.accumulate(std::move(g));
    }
  });
}

Variable scale(const Variable& a, float s) {
  Tensor out = a.value();
  for (auto& v : out.data()) v *= s;
  return Variable::make(finite(std::move(out), "scale"), {a}, [s](Node& n) {
    Tensor g = n.grad;
    for (auto& v : g.data()) v *= s;
    n.parents[0]->accumulate(std::move(g));
  });
}

Variable sum(const Variable& a) {
  double acc = 0.0;
  for (float v : a.value().data()) acc += v;
  return Variable::make(finite(Tensor::scalar(static_cast<float>(acc)), "sum"), {a}, [](Node& n) {
    Node& p = *n.parents[0];
    p.accumulate(Tensor(p.value.shape(), n.grad[0]));
  });
}

Variable mean(const Variable& a) {
  const auto count = static_cast<float>(std::max<std::size_t>(a.value().size(), 1));
  return scale(sum(a), 1.0f / count);
}

Variable mean_axis(const Variable& a, std::size_t axis) {
  const Shape& s = a.shape();
  if (axis >= s.size()) throw ShapeError("mean_axis: axis out of range for " + to_string(s));
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  if (len == 0) throw ShapeError("mean_axis over empty axis");
  Shape out_shape;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i != axis) out_shape.push_back(s[i]);
  }
  Tensor out(out_shape);
  const auto& x = a.value();
  std::vector<double> acc(inner);
  for (std::size_t o = 0; o < outer; ++o) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t l = 0; l < len; ++l) {
      const float* row = &x[(o * len + l) * inner];
      for (std::size_t i = 0; i < inner; ++i) acc[i] += row[i];
    }
    for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] = static_cast<float>(acc[i] / len);
  }
  return Variable::make(finite(std::move(out), "mean_axis"), {a}, [outer, inner, len](Node& n) {
    Node& p = *n.parents[0];
    Tensor g(p.value.shape());
    const float inv = 1.0f / static_cast<float>(len);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t l = 0; l < len; ++l) {
        for (std::size_t i = 0; i < inner; ++i) g[(o * len + l) * inner + i] = n.grad[o * inner + i] * inv;
      }
    }
    p.accumulate(std::move(g));
  });
}

Variable matmul(const Variable& a, const Variable& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sb.size() < 2 || sa.size() != sb.size()) {
    throw ShapeError("matmul: incompatible ranks " + to_string(sa) + " x " + to_string(sb));
  }
  const std::size_t r = sa.size();
  if (!std::equal(sa.begin(), sa.end() - 2, sb.begin())) {
    throw ShapeError("matmul: batch dims differ " + to_string(sa) + " x " + to_string(sb));
  }
  const std::size_t m = sa[r - 2], k = sa[r - 1], n = sb[r - 1];
  if (sb[r - 2] != k) throw ShapeError("matmul: inner dims differ " + to_string(sa) + " x " + to_string(sb));
  std::size_t batch = 1;
  for (std::size_t i = 0; i + 2 < r; ++i) batch *= sa[i];
  Shape out_shape(sa.begin(), sa.end() - 2);
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor out(out_shape);
  for (std::size_t bi = 0; bi < batch; ++bi) {
    gemm(false, false, m, n, k, &a.value()[bi * m * k], &b.value()[bi * k * n], &out[bi * m * n], false);
  }
  return Variable::make(finite(std::move(out), "matmul"), {a, b}, [batch, m, n, k](Node& nd) {
    Node& pa = *nd.parents[0];
    Node& pb = *nd.parents[1];
    if (pa.requires_grad) {
      Tensor g(pa.value.shape());
      for (std::size_t bi = 0; bi < batch; ++bi) {
        gemm(false, true, m, k, n, &nd.grad[bi * m * n], &pb.value[bi * k * n], &g[bi * m * k], false);
      }
      pa.accumulate(std::move(g));
    }
    if (pb.requires_grad) {
      Tensor g(pb.value.shape());
      for (std::size_t bi = 0; bi < batch; ++bi) {
        gemm(true, false, k, n, m, &pa.value[bi * m * k], &nd.grad[bi * m * n], &g[bi * k * n], false);
      }
      pb.accumulate(std::move(g));
    }
  });
}

Variable linear(const Variable& x, const Variable& weight, const Variable& bias) {
  const Shape& sx = x.shape();
  const Shape& sw = weight.shape();
  if (sx.size() != 2 || sw.size() != 2 || sx[1] != sw[1]) {
    throw ShapeError("linear: input " + to_string(sx) + " incompatible with weight " + to_string(sw));
  }
  const std::size_t rows = sx[0], din = sx[1], dout = sw[0];
  const bool has_bias = bias.defined();
  if (has_bias && bias.shape() != Shape{dout}) throw ShapeError("linear: bias shape " + to_string(bias.shape()));
  Tensor out({rows, dout});
  gemm(false, true, rows, dout, din, x.value().data().data(), weight.value().data().data(), out.data().data(),
       false);
  if (has_bias) {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < dout; ++j) out[r * dout + j] += bias.value()[j];
    }
  }
  std::vector<Variable> parents{x, weight};
  if (has_bias) parents.push_back(bias);
  return Variable::make(finite(std::move(out), "linear"), std::move(parents), [rows, din, dout](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    if (px.requires_grad) {
      Tensor g({rows, din});
      gemm(false, false, rows, din, dout, n.grad.data().data(), pw.value.data().data(), g.data().data(), false);
      px.accumulate(std::move(g));
    }
    if (pw.requires_grad) {
      Tensor g({dout, din});
      gemm(true, false, dout, din, rows, n.grad.data().data(), px.value.data().data(), g.data().data(), false);
      pw.accumulate(std::move(g));
    }
    if (n.parents.size() > 2 && n.parents[2]->requires_grad) {
      Tensor g({dout});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < dout; ++j) g[j] += n.grad[r * dout + j];
      }
      n.parents[2]->accumulate(std::move(g));
    }
  });
}

Variable reshape(const Variable& a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return Variable::make(std::move(out), {a}, [](Node& n) {
    Node& p = *n.parents[0];
    p.accumulate(n.grad.reshaped(p.value.shape()));
  });
}

namespace {

Tensor permute_tensor(const Tensor& x, const std::vector<std::size_t>& perm) {
  const Shape& s = x.shape();
  const std::size_t r = s.size();
  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = s[perm[i]];
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r; i-- > 1;) in_strides[i - 1] = in_strides[i] * s[i];
  std::vector<std::size_t> step(r);
  for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[perm[i]];
  Tensor out(out_shape);
  if (out.size() == 0) return out;
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t o = 0; o < out.size(); ++o) {
    out[o] = x[src];
    for (std::size_t a = r; a-- > 0;) {
      if (++idx[a] < out_shape[a]) {
        src += step[a];
        break;
      }
      src -= step[a] * (out_shape[a] - 1);
      idx[a] = 0;
    }
  }
  return out;
}

}  // namespace

Variable permute(const Variable& a, const std::vector<std::size_t>& perm) {
  const std::size_t r = a.shape().size();
  std::vector<std::size_t> check = perm;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < check.size(); ++i) {
    if (check.size() != r || check[i] != i) throw ShapeError("permute: invalid permutation");
  }
  std::vector<std::size_t> inverse(r);
  for (std::size_t i = 0; i < r; ++i) inverse[perm[i]] = i;
  return Variable::make(permute_tensor(a.value(), perm), {a}, [inverse](Node& n) {
    n.parents[0]->accumulate(permute_tensor(n.grad, inverse));
  });
}

Variable transpose_last2(const Variable& a) {
  const std::size_t r = a.shape().size();
  if (r < 2) throw ShapeError("transpose_last2 needs rank >= 2");
  std::vector<std::size_t> perm(r);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[r - 1], perm[r - 2]);
  return permute(a, perm);
}

Variable narrow_leading(const Variable& a, const Shape& shape) {
  return Variable::make(a.value().leading_slice(shape), {a},
                        [](Node& n) { n.parents[0]->accumulate_leading(n.grad); });
}

namespace {

struct ConvGeom {
  std::size_t batch, cin, h, w, cout, kh, kw, stride, pad, ho, wo;
  std::size_t ck() const { return cin * kh * kw; }
  std::size_t hw_out() const { return ho * wo; }
};

void im2col(const float* x, const ConvGeom& g, float* cols) {
  const std::size_t hw = g.hw_out();
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        float* row = cols + ((c * g.kh + i) * g.kw + j) * hw;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.h) &&
                                ix < static_cast<std::ptrdiff_t>(g.w);
            row[oy * g.wo + ox] =
                inside ? x[(c * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* cols, const ConvGeom& g, float* dx) {
  const std::size_t hw = g.hw_out();
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t i = 0; i < g.kh; ++i) {
      for (std::size_t j = 0; j < g.kw; ++j) {
        const float* row = cols + ((c * g.kh + i) * g.kw + j) * hw;
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + i) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + j) - static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
            dx[(c * g.h + static_cast<std::size_t>(iy)) * g.w + static_cast<std::size_t>(ix)] += row[oy * g.wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Variable conv2d(const Variable& x, const Variable& w, std::size_t stride, std::size_t padding) {
  const Shape& sx = x.shape();
  const Shape& sw = w.shape();
  if (sx.size() != 4 || sw.size() != 4 || sx[1] != sw[1]) {
    throw ShapeError("conv2d: input " + to_string(sx) + " incompatible with kernel " + to_string(sw));
  }
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  ConvGeom g{sx[0], sx[1], sx[2], sx[3], sw[0], sw[2], sw[3], stride, padding, 0, 0};
  const std::size_t ph = g.h + 2 * padding, pw = g.w + 2 * padding;
  if (g.kh > ph || g.kw > pw) throw ShapeError("conv2d: kernel larger than padded input");
  if ((ph - g.kh) % stride != 0 || (pw - g.kw) % stride != 0) {
    throw ShapeError("conv2d: non-integer output size for input " + to_string(sx) + ", stride " +
                     std::to_string(stride));
  }
  g.ho = (ph - g.kh) / stride + 1;
  g.wo = (pw - g.kw) / stride + 1;

  Tensor out({g.batch, g.cout, g.ho, g.wo});
  std::vector<float> cols(g.ck() * g.hw_out());
  const std::size_t in_sz = g.cin * g.h * g.w, out_sz = g.cout * g.hw_out();
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(&x.value()[b * in_sz], g, cols.data());
    gemm(false, false, g.cout, g.hw_out(), g.ck(), w.value().data().data(), cols.data(), &out[b * out_sz], false);
  }
  return Variable::make(finite(std::move(out), "conv2d"), {x, w}, [g, in_sz, out_sz](Node& n) {
    Node& px = *n.parents[0];
    Node& pw = *n.parents[1];
    std::vector<float> cols(g.ck() * g.hw_out());
    Tensor gx = px.requires_grad ? Tensor(px.value.shape()) : Tensor();
    Tensor gw = pw.requires_grad ? Tensor(pw.value.shape()) : Tensor();
    for (std::size_t b = 0; b < g.batch; ++b) {
      const float* gout = &n.grad[b * out_sz];
      if (pw.requires_grad) {
        im2col(&px.value[b * in_sz], g, cols.data());
        gemm(false, true, g.cout, g.ck(), g.hw_out(), gout, cols.data(), gw.data().data(), true);
      }
      if (px.requires_grad) {
        gemm(true, false, g.ck(), g.hw_out(), g.cout, pw.value.data().data(), gout, cols.data(), false);
        col2im(cols.data(), g, &gx[b * in_sz]);
      }
    }
    if (px.requires_grad) px.accumulate(std::move(gx));
    if (pw.requires_grad) pw.accumulate(std::move(gw));
  });
}

Variable max_pool2d(const Variable& x, std::size_t kernel, std::size_t stride, std::size_t padding) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("max_pool2d: expected [B,C,H,W], got " + to_string(s));
  if (kernel == 0 || stride == 0 || padding * 2 > kernel) throw ShapeError("max_pool2d: bad window");
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  if (h + 2 * padding < kernel || w + 2 * padding < kernel) throw ShapeError("max_pool2d: window exceeds input");
  const std::size_t ho = (h + 2 * padding - kernel) / stride + 1;
  const std::size_t wo = (w + 2 * padding - kernel) / stride + 1;
  Tensor out({s[0], s[1], ho, wo});
  std::vector<std::uint32_t> argmax(out.size());
  const auto& xv = x.value();
  for (std::size_t p = 0; p < planes; ++p) {
    for (std::size_t oy = 0; oy < ho; ++oy) {
      for (std::size_t ox = 0; ox < wo; ++ox) {
        float best = -std::numeric_limits<float>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < kernel; ++i) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * stride + i) - static_cast<std::ptrdiff_t>(padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          for (std::size_t j = 0; j < kernel; ++j) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * stride + j) - static_cast<std::ptrdiff_t>(padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            const std::size_t idx = (p * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix);
            if (xv[idx] > best) {
              best = xv[idx];
              best_idx = idx;
            }
          }
        }
        const std::size_t o = (p * ho + oy) * wo + ox;
        out[o] = best;
        argmax[o] = static_cast<std::uint32_t>(best_idx);
      }
    }
  }
  return Variable::make(std::move(out), {x}, [argmax = std::move(argmax)](Node& n) {
    Node& p = *n.parents[0];
    Tensor g(p.value.shape());
    for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += n.grad[o];
    p.accumulate(std::move(g));
  });
}

BnState BnState::fresh(std::size_t channels) {
  return BnState{Tensor({channels}, 0.0f), Tensor({channels}, 1.0f), 0};
}

Variable batchnorm(const Variable& x, const Variable& gamma, const Variable& beta, BnState& state, BnMode mode) {
  const Shape& s = x.shape();
  if (s.size() < 2) throw ShapeError("batchnorm: expected [N, C, ...], got " + to_string(s));
  const std::size_t outer = s[0], channels = s[1];
  const std::size_t inner = numel(s) / std::max<std::size_t>(outer * channels, 1);
  const Shape cshape{channels};
  if (gamma.shape() != cshape || beta.shape() != cshape || state.running_mean.shape() != cshape ||
      state.running_var.shape() != cshape) {
    throw ShapeError("batchnorm: statistics do not match channel dim " + std::to_string(channels));
  }
  const std::size_t count = outer * inner;
  const auto& xv = x.value();

  std::vector<float> mean_c(channels), invstd(channels);
  if (mode == BnMode::Eval) {
    for (std::size_t c = 0; c < channels; ++c) {
      mean_c[c] = state.running_mean[c];
      invstd[c] = 1.0f / std::sqrt(state.running_var[c] + kBnEpsilon);
    }
  } else {
    if (count == 0) throw ShapeError("batchnorm: empty batch");
    for (std::size_t c = 0; c < channels; ++c) {
      double acc = 0.0;
      for (std::size_t o = 0; o < outer; ++o) {
        const float* row = &xv[(o * channels + c) * inner];
        for (std::size_t i = 0; i < inner; ++i) acc += row[i];
      }
      const double mu = acc / static_cast<double>(count);
      double sq = 0.0;
      for (std::size_t o = 0; o < outer; ++o) {
        const float* row = &xv[(o * channels + c) * inner];
        for (std::size_t i = 0; i < inner; ++i) {
          const double d = row[i] - mu;
          sq += d * d;
        }
      }
      const double var = sq / static_cast<double>(count);
      const double unbiased = count > 1 ? sq / static_cast<double>(count - 1) : var;
      mean_c[c] = static_cast<float>(mu);
      invstd[c] = static_cast<float>(1.0 / std::sqrt(var + kBnEpsilon));
      if (mode == BnMode::Train) {
        state.running_mean[c] = (1.0f - kBnMomentum) * state.running_mean[c] + kBnMomentum * static_cast<float>(mu);
        state.running_var[c] =
            (1.0f - kBnMomentum) * state.running_var[c] + kBnMomentum * static_cast<float>(unbiased);
      } else {
        const auto k = static_cast<double>(state.calibration_batches);
        state.running_mean[c] = static_cast<float>((state.running_mean[c] * k + mu) / (k + 1.0));
        state.running_var[c] = static_cast<float>((state.running_var[c] * k + unbiased) / (k + 1.0));
      }
    }
    if (mode == BnMode::Calibrate) ++state.calibration_batches;
  }

  Tensor out(s);
  Tensor xhat(s);
  const auto& gv = gamma.value();
  const auto& bv = beta.value();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (o * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const float h = (xv[base + i] - mean_c[c]) * invstd[c];
        xhat[base + i] = h;
        out[base + i] = gv[c] * h + bv[c];
      }
    }
  }
  check_finite(out, "batchnorm");
  if (mode == BnMode::Calibrate) return Variable(std::move(out), false);

  const bool batch_stats = mode == BnMode::Train;
  return Variable::make(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), invstd = std::move(invstd), outer, channels, inner, count, batch_stats](Node& n) {
        Node& px = *n.parents[0];
        Node& pg = *n.parents[1];
        Node& pb = *n.parents[2];
        std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t base = (o * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
              sum_dy[c] += n.grad[base + i];
              sum_dy_xhat[c] += static_cast<double>(n.grad[base + i]) * xhat[base + i];
            }
          }
        }
        if (pg.requires_grad) {
          Tensor g({channels});
          for (std::size_t c = 0; c < channels; ++c) g[c] = static_cast<float>(sum_dy_xhat[c]);
          pg.accumulate(std::move(g));
        }
        if (pb.requires_grad) {
          Tensor g({channels});
          for (std::size_t c = 0; c < channels; ++c) g[c] = static_cast<float>(sum_dy[c]);
          pb.accumulate(std::move(g));
        }
        if (px.requires_grad) {
          Tensor g(px.value.shape());
          const auto m = static_cast<double>(count);
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t c = 0; c < channels; ++c) {
              const double gc = pg.value[c];
              const std::size_t base = (o * channels + c) * inner;
              for (std::size_t i = 0; i < inner; ++i) {
                const double dy = n.grad[base + i];
                if (batch_stats) {
                  g[base + i] = static_cast<float>(gc * invstd[c] *
                                                   (dy - sum_dy[c] / m - xhat[base + i] * sum_dy_xhat[c] / m));
                } else {
                  g[base + i] = static_cast<float>(gc * invstd[c] * dy);
                }
              }
            }
          }
          px.accumulate(std::move(g));
        }
      });
}

Variable cross_entropy(const Variable& logits, const std::vector<int>& labels) {
  const Shape& s = logits.shape();
  if (s.size() != 2 || s[0] != labels.size() || s[0] == 0) {
    throw ShapeError("cross_entropy: logits " + to_string(s) + " vs " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = s[0], classes = s[1];
  Tensor probs(s);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const int label = labels[b];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) throw ValueError("cross_entropy: label out of range");
    const float* row = &logits.value()[b * classes];
    const float mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t k = 0; k < classes; ++k) z += std::exp(static_cast<double>(row[k] - mx));
    for (std::size_t k = 0; k < classes; ++k) {
      probs[b * classes + k] = static_cast<float>(std::exp(static_cast<double>(row[k] - mx)) / z);
    }
    loss += std::log(z) - static_cast<double>(row[label] - mx);
  }
  Tensor out = Tensor::scalar(static_cast<float>(loss / static_cast<double>(batch)));
  check_finite(out, "cross_entropy");
  return Variable::make(std::move(out), {logits}, [probs = std::move(probs), labels, batch, classes](Node& n) {
    Tensor g = probs;
    const float scale = n.grad[0] / static_cast<float>(batch);
    for (std::size_t b = 0; b < batch; ++b) g[b * classes + static_cast<std::size_t>(labels[b])] -= 1.0f;
    for (auto& v : g.data()) v *= scale;
    n.parents[0]->accumulate(std::move(g));
  });
}

}  // namespace spikenas::ops
