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

#include "histoseg/netgraph/ops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace histoseg::netgraph::ops {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

constexpr std::size_t kIm2colBudgetBytes = 32u << 20;

// Copies the 3x3 neighborhoods of output rows [y0, y0+ylen) of batch n
// into a (ylen*W) x (9*Cin) matrix, columns ordered (ky, kx, c).
void fill_im2col(const Tensor& in, int n, int y0, int ylen, double* m) {
  const int H = in.h, W = in.w, C = in.c;
  const std::size_t row_len = 9u * C;
  for (int y = y0; y < y0 + ylen; ++y) {
    for (int x = 0; x < W; ++x) {
      double* row = m + (static_cast<std::size_t>(y - y0) * W + x) * row_len;
      for (int ky = 0; ky < 3; ++ky) {
        const int iy = y + ky - 1;
        for (int kx = 0; kx < 3; ++kx) {
          const int ix = x + kx - 1;
          double* dst = row + (ky * 3 + kx) * C;
          if (iy < 0 || iy >= H || ix < 0 || ix >= W)
            std::memset(dst, 0, sizeof(double) * C);
          else
            std::memcpy(dst, &in.v[in.index(n, iy, ix, 0)],
                        sizeof(double) * C);
        }
      }
    }
  }
}

int rows_per_chunk(int w, int cin) {
  std::size_t bytes_per_row = 9u * cin * w * sizeof(double);
  int rows = static_cast<int>(kIm2colBudgetBytes / std::max<std::size_t>(
                                  bytes_per_row, 1));
  return std::max(rows, 1);
}

}  // namespace

void conv3x3_forward(const Tensor& in, const std::vector<double>& w,
                     const std::vector<double>& b, int cout, Tensor& out) {
  const int H = in.h, W = in.w, C = in.c;
  out.resize(in.n, H, W, cout);
  MapConstMat wm(w.data(), 9 * C, cout);
  Eigen::Map<const Eigen::RowVectorXd> bv(b.data(), cout);
  const int chunk = rows_per_chunk(W, C);
  std::vector<double> scratch(static_cast<std::size_t>(chunk) * W * 9 * C);
  for (int n = 0; n < in.n; ++n) {
    for (int y0 = 0; y0 < H; y0 += chunk) {
      const int ylen = std::min(chunk, H - y0);
      fill_im2col(in, n, y0, ylen, scratch.data());
      MapConstMat m(scratch.data(), ylen * W, 9 * C);
      MapMat y(&out.v[out.index(n, y0, 0, 0)], ylen * W, cout);
      y.noalias() = m * wm;
      y.rowwise() += bv;
    }
  }
}

void conv3x3_backward(const Tensor& in, const std::vector<double>& w, int cout,
                      const Tensor& dout, Tensor* din, std::vector<double>* dw,
                      std::vector<double>* db) {
  const int H = in.h, W = in.w, C = in.c;
  MapConstMat wm(w.data(), 9 * C, cout);
  const int chunk = rows_per_chunk(W, C);
  std::vector<double> scratch(static_cast<std::size_t>(chunk) * W * 9 * C);
  std::vector<double> gscratch(din ? scratch.size() : 0);
  for (int n = 0; n < in.n; ++n) {
    for (int y0 = 0; y0 < H; y0 += chunk) {
      const int ylen = std::min(chunk, H - y0);
      MapConstMat dy(&dout.v[dout.index(n, y0, 0, 0)], ylen * W, cout);
      if (dw || din) fill_im2col(in, n, y0, ylen, scratch.data());
      MapConstMat m(scratch.data(), ylen * W, 9 * C);
      if (dw) {
        MapMat dwm(dw->data(), 9 * C, cout);
        dwm.noalias() += m.transpose() * dy;
      }
      if (db) {
        Eigen::Map<Eigen::RowVectorXd> dbv(db->data(), cout);
        dbv += dy.colwise().sum();
      }
      if (din) {
        MapMat g(gscratch.data(), ylen * W, 9 * C);
        g.noalias() = dy * wm.transpose();
        // col2im: scatter each patch column back onto the input plane
        for (int y = y0; y < y0 + ylen; ++y) {
          for (int x = 0; x < W; ++x) {
            const double* row =
                gscratch.data() +
                (static_cast<std::size_t>(y - y0) * W + x) * 9 * C;
            for (int ky = 0; ky < 3; ++ky) {
              const int iy = y + ky - 1;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int ix = x + kx - 1;
                if (ix < 0 || ix >= W) continue;
                double* dst = &din->v[din->index(n, iy, ix, 0)];
                const double* src = row + (ky * 3 + kx) * C;
                for (int c = 0; c < C; ++c) dst[c] += src[c];
              }
            }
          }
        }
      }
    }
  }
}

void conv1x1_forward(const Tensor& in, const std::vector<double>& w,
                     const std::vector<double>& b, int cout, Tensor& out) {
  const long rows = static_cast<long>(in.n) * in.h * in.w;
  out.resize(in.n, in.h, in.w, cout);
  MapConstMat x(in.v.data(), rows, in.c);
  MapConstMat wm(w.data(), in.c, cout);
  MapMat y(out.v.data(), rows, cout);
  y.noalias() = x * wm;
  y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.data(), cout);
}

void conv1x1_backward(const Tensor& in, const std::vector<double>& w, int cout,
                      const Tensor& dout, Tensor* din, std::vector<double>* dw,
                      std::vector<double>* db) {
  const long rows = static_cast<long>(in.n) * in.h * in.w;
  MapConstMat x(in.v.data(), rows, in.c);
  MapConstMat wm(w.data(), in.c, cout);
  MapConstMat dy(dout.v.data(), rows, cout);
  if (dw) {
    MapMat dwm(dw->data(), in.c, cout);
    dwm.noalias() += x.transpose() * dy;
  }
  if (db) {
    Eigen::Map<Eigen::RowVectorXd> dbv(db->data(), cout);
    dbv += dy.colwise().sum();
  }
  if (din) {
    MapMat dx(din->v.data(), rows, in.c);
    dx.noalias() += dy * wm.transpose();
  }
}

void tconv2x2_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout, Tensor& out) {
  const long rows = static_cast<long>(in.n) * in.h * in.w;
  out.resize(in.n, in.h * 2, in.w * 2, cout);
  MapConstMat x(in.v.data(), rows, in.c);
  MapConstMat wm(w.data(), in.c, 4 * cout);
  RowMat y4(rows, 4 * cout);
  y4.noalias() = x * wm;
  for (int n = 0; n < in.n; ++n) {
    for (int y = 0; y < in.h; ++y) {
      for (int x2 = 0; x2 < in.w; ++x2) {
        const double* src =
            y4.data() +
            ((static_cast<std::size_t>(n) * in.h + y) * in.w + x2) * 4 * cout;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            double* dst = &out.v[out.index(n, 2 * y + dy, 2 * x2 + dx, 0)];
            const double* s = src + (dy * 2 + dx) * cout;
            for (int c = 0; c < cout; ++c) dst[c] = s[c] + b[c];
          }
        }
      }
    }
  }
}

void tconv2x2_backward(const Tensor& in, const std::vector<double>& w, int cout,
                       const Tensor& dout, Tensor* din, std::vector<double>* dw,
                       std::vector<double>* db) {
  const long rows = static_cast<long>(in.n) * in.h * in.w;
  RowMat dy4(rows, 4 * cout);
  for (int n = 0; n < in.n; ++n) {
    for (int y = 0; y < in.h; ++y) {
      for (int x2 = 0; x2 < in.w; ++x2) {
        double* dst =
            dy4.data() +
            ((static_cast<std::size_t>(n) * in.h + y) * in.w + x2) * 4 * cout;
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const double* src =
                &dout.v[dout.index(n, 2 * y + dy, 2 * x2 + dx, 0)];
            double* d = dst + (dy * 2 + dx) * cout;
            for (int c = 0; c < cout; ++c) d[c] = src[c];
          }
        }
      }
    }
  }
  MapConstMat x(in.v.data(), rows, in.c);
  MapConstMat wm(w.data(), in.c, 4 * cout);
  if (dw) {
    MapMat dwm(dw->data(), in.c, 4 * cout);
    dwm.noalias() += x.transpose() * dy4;
  }
  if (db) {
    for (int c = 0; c < cout; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += dy4.col(k * cout + c).sum();
      (*db)[c] += s;
    }
  }
  if (din) {
    MapMat dx(din->v.data(), rows, in.c);
    dx.noalias() += dy4 * wm.transpose();
  }
}

void batchnorm_forward_train(const Tensor& in, const std::vector<double>& gamma,
                             const std::vector<double>& beta, double eps,
                             Tensor& out, BnCache& cache) {
  const int C = in.c;
  const long m = static_cast<long>(in.n) * in.h * in.w;
  cache.mean.assign(C, 0.0);
  cache.var.assign(C, 0.0);
  cache.inv_std.assign(C, 0.0);
  cache.xhat.resize(in.n, in.h, in.w, C);
  out.resize(in.n, in.h, in.w, C);
  for (long i = 0; i < m; ++i) {
    const double* p = &in.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) cache.mean[c] += p[c];
  }
  for (int c = 0; c < C; ++c) cache.mean[c] /= static_cast<double>(m);
  for (long i = 0; i < m; ++i) {
    const double* p = &in.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) {
      const double d = p[c] - cache.mean[c];
      cache.var[c] += d * d;
    }
  }
  for (int c = 0; c < C; ++c) {
    cache.var[c] /= static_cast<double>(m);
    cache.inv_std[c] = 1.0 / std::sqrt(cache.var[c] + eps);
  }
  for (long i = 0; i < m; ++i) {
    const double* p = &in.v[static_cast<std::size_t>(i) * C];
    double* xh = &cache.xhat.v[static_cast<std::size_t>(i) * C];
    double* o = &out.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) {
      xh[c] = (p[c] - cache.mean[c]) * cache.inv_std[c];
      o[c] = gamma[c] * xh[c] + beta[c];
    }
  }
}

void batchnorm_forward_infer(const Tensor& in, const std::vector<double>& gamma,
                             const std::vector<double>& beta,
                             const std::vector<double>& running_mean,
                             const std::vector<double>& running_var, double eps,
                             Tensor& out) {
  const int C = in.c;
  const long m = static_cast<long>(in.n) * in.h * in.w;
  out.resize(in.n, in.h, in.w, C);
  std::vector<double> scale(C), shift(C);
  for (int c = 0; c < C; ++c) {
    scale[c] = gamma[c] / std::sqrt(running_var[c] + eps);
    shift[c] = beta[c] - running_mean[c] * scale[c];
  }
  for (long i = 0; i < m; ++i) {
    const double* p = &in.v[static_cast<std::size_t>(i) * C];
    double* o = &out.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) o[c] = p[c] * scale[c] + shift[c];
  }
}

void batchnorm_backward(const BnCache& cache, const std::vector<double>& gamma,
                        const Tensor& dout, Tensor* din,
                        std::vector<double>* dgamma,
                        std::vector<double>* dbeta) {
  const int C = dout.c;
  const long m = static_cast<long>(dout.n) * dout.h * dout.w;
  std::vector<double> s1(C, 0.0), s2(C, 0.0);
  for (long i = 0; i < m; ++i) {
    const double* dy = &dout.v[static_cast<std::size_t>(i) * C];
    const double* xh = &cache.xhat.v[static_cast<std::size_t>(i) * C];
    for (int c = 0; c < C; ++c) {
      s1[c] += dy[c];
      s2[c] += dy[c] * xh[c];
    }
  }
  if (dbeta)
    for (int c = 0; c < C; ++c) (*dbeta)[c] += s1[c];
  if (dgamma)
    for (int c = 0; c < C; ++c) (*dgamma)[c] += s2[c];
  if (din) {
    std::vector<double> k(C), m1(C), m2(C);
    for (int c = 0; c < C; ++c) {
      k[c] = gamma[c] * cache.inv_std[c];
      m1[c] = s1[c] / static_cast<double>(m);
      m2[c] = s2[c] / static_cast<double>(m);
    }
    for (long i = 0; i < m; ++i) {
      const double* dy = &dout.v[static_cast<std::size_t>(i) * C];
      const double* xh = &cache.xhat.v[static_cast<std::size_t>(i) * C];
      double* dx = &din->v[static_cast<std::size_t>(i) * C];
      for (int c = 0; c < C; ++c)
        dx[c] += k[c] * (dy[c] - m1[c] - xh[c] * m2[c]);
    }
  }
}

void avgpool_forward(const Tensor& in, int factor, Tensor& out) {
  if (in.h % factor != 0 || in.w % factor != 0)
    throw std::invalid_argument("avgpool: size not divisible by factor");
  const int oh = in.h / factor, ow = in.w / factor, C = in.c;
  out.resize(in.n, oh, ow, C);
  const double inv = 1.0 / (factor * factor);
  for (int n = 0; n < in.n; ++n) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double* o = &out.v[out.index(n, y, x, 0)];
        for (int c = 0; c < C; ++c) o[c] = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            const double* p =
                &in.v[in.index(n, y * factor + dy, x * factor + dx, 0)];
            for (int c = 0; c < C; ++c) o[c] += p[c];
          }
        }
        for (int c = 0; c < C; ++c) o[c] *= inv;
      }
    }
  }
}

void avgpool_backward(const Tensor& dout, int factor, Tensor* din) {
  const int oh = dout.h, ow = dout.w, C = dout.c;
  const double inv = 1.0 / (factor * factor);
  for (int n = 0; n < dout.n; ++n) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const double* g = &dout.v[dout.index(n, y, x, 0)];
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            double* d =
                &din->v[din->index(n, y * factor + dy, x * factor + dx, 0)];
            for (int c = 0; c < C; ++c) d[c] += g[c] * inv;
          }
        }
      }
    }
  }
}

void elu_forward(Tensor& t) {
  for (double& x : t.v) x = x > 0.0 ? x : std::expm1(x);
}

void elu_backward_from_output(const Tensor& out, Tensor& grad) {
  for (std::size_t i = 0; i < grad.v.size(); ++i)
    if (out.v[i] <= 0.0) grad.v[i] *= out.v[i] + 1.0;
}

void relu_forward(Tensor& t) {
  for (double& x : t.v)
    if (x < 0.0) x = 0.0;
}

void relu_backward_from_output(const Tensor& out, Tensor& grad) {
  for (std::size_t i = 0; i < grad.v.size(); ++i)
    if (out.v[i] <= 0.0) grad.v[i] = 0.0;
}

void softmax_forward(Tensor& t) {
  const int C = t.c;
  const long m = static_cast<long>(t.n) * t.h * t.w;
  for (long i = 0; i < m; ++i) {
    double* p = &t.v[static_cast<std::size_t>(i) * C];
    double mx = p[0];
    for (int c = 1; c < C; ++c) mx = std::max(mx, p[c]);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
      p[c] = std::exp(p[c] - mx);
      sum += p[c];
    }
    for (int c = 0; c < C; ++c) p[c] /= sum;
  }
}

void softmax_backward_from_output(const Tensor& probs, Tensor& grad) {
  const int C = probs.c;
  const long m = static_cast<long>(probs.n) * probs.h * probs.w;
  for (long i = 0; i < m; ++i) {
    const double* p = &probs.v[static_cast<std::size_t>(i) * C];
    double* g = &grad.v[static_cast<std::size_t>(i) * C];
    double dot = 0.0;
    for (int c = 0; c < C; ++c) dot += g[c] * p[c];
    for (int c = 0; c < C; ++c) g[c] = p[c] * (g[c] - dot);
  }
}

}  // namespace histoseg::netgraph::ops
