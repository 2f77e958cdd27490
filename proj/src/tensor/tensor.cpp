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

#include "spikenas/tensor/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "spikenas/error.hpp"

namespace spikenas {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (numel(shape_) != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                     to_string(shape_));
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range for shape " + to_string(shape_));
  return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) throw ShapeError("index rank mismatch for shape " + to_string(shape_));
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) throw ShapeError("index out of range for shape " + to_string(shape_));
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

float& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
float Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::leading_slice(const Shape& shape) const {
  if (shape.size() != shape_.size()) throw ShapeError("slice rank mismatch");
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] > shape_[i]) {
      throw ShapeError("slice " + to_string(shape) + " exceeds " + to_string(shape_));
    }
  }
  Tensor out(shape);
  if (out.size() == 0) return out;
  const std::size_t r = shape.size();
  if (r == 0) {
    out[0] = data_[0];
    return out;
  }
  // Copy contiguous rows of the innermost axis.
  const std::size_t inner = shape[r - 1];
  const std::size_t rows = out.size() / inner;
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t row = 0; row < rows; ++row) {
    std::size_t src = 0;
    for (std::size_t a = 0; a + 1 < r; ++a) src = src * shape_[a] + idx[a];
    src *= shape_[r - 1];
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(src), inner,
                out.data_.begin() + static_cast<std::ptrdiff_t>(row * inner));
    for (std::size_t a = r - 1; a-- > 0;) {
      if (++idx[a] < shape[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  for (float v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

float Tensor::item() const {
  if (data_.size() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

void check_finite(const Tensor& t, const char* where) {
  if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + where);
}

}  // namespace spikenas
