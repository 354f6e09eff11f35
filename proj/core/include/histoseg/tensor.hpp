// Copyright 2026 The Histoseg Authors. All rights reserved.
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

#ifndef HISTOSEG_TENSOR_HPP_
#define HISTOSEG_TENSOR_HPP_

#include <cstddef>
#include <vector>

namespace histoseg {

/// Dense NHWC tensor of doubles. All network math runs in double precision
/// so that finite-difference gradient verification is meaningful.
struct Tensor {
  int n = 0, h = 0, w = 0, c = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int h_, int w_, int c_)
      : n(n_), h(h_), w(w_), c(c_),
        v(static_cast<std::size_t>(n_) * h_ * w_ * c_, 0.0) {}

  static Tensor zeros(int n, int h, int w, int c) { return Tensor(n, h, w, c); }

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }

  void resize(int n_, int h_, int w_, int c_) {
    n = n_; h = h_; w = w_; c = c_;
    v.assign(static_cast<std::size_t>(n_) * h_ * w_ * c_, 0.0);
  }

  std::size_t index(int in, int iy, int ix, int ic) const {
    return ((static_cast<std::size_t>(in) * h + iy) * w + ix) * c + ic;
  }
  double& at(int in, int iy, int ix, int ic) { return v[index(in, iy, ix, ic)]; }
  double at(int in, int iy, int ix, int ic) const {
    return v[index(in, iy, ix, ic)];
  }

  bool same_shape(const Tensor& o) const {
    return n == o.n && h == o.h && w == o.w && c == o.c;
  }
};

}  // namespace histoseg

#endif  // HISTOSEG_TENSOR_HPP_
