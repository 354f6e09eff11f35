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

// Dense tensor operations used by the network executor. All tensors are
// NHWC with double precision. Backward functions accumulate into their
// gradient outputs so a buffer can collect contributions from several
// consumers; callers zero the buffers first.

#ifndef HISTOSEG_NETGRAPH_OPS_HPP_
#define HISTOSEG_NETGRAPH_OPS_HPP_

#include <vector>

#include "histoseg/tensor.hpp"

namespace histoseg::netgraph::ops {

// 3x3 convolution, stride 1, zero padding 1. Weights are laid out
// (ky, kx, cin, cout), biases (cout). Internally strip-mined so the
// im2col buffer stays bounded regardless of image size.
void conv3x3_forward(const Tensor& in, const std::vector<double>& w,
                     const std::vector<double>& b, int cout, Tensor& out);
void conv3x3_backward(const Tensor& in, const std::vector<double>& w, int cout,
                      const Tensor& dout, Tensor* din, std::vector<double>* dw,
                      std::vector<double>* db);

// 1x1 convolution (a per-pixel linear map). Weights (cin, cout).
void conv1x1_forward(const Tensor& in, const std::vector<double>& w,
                     const std::vector<double>& b, int cout, Tensor& out);
void conv1x1_backward(const Tensor& in, const std::vector<double>& w, int cout,
                      const Tensor& dout, Tensor* din, std::vector<double>* dw,
                      std::vector<double>* db);

// 2x2 transposed convolution with stride 2 (each input pixel paints a
// 2x2 output tile). Weights (cin, ky, kx, cout).
void tconv2x2_forward(const Tensor& in, const std::vector<double>& w,
                      const std::vector<double>& b, int cout, Tensor& out);
void tconv2x2_backward(const Tensor& in, const std::vector<double>& w, int cout,
                       const Tensor& dout, Tensor* din, std::vector<double>* dw,
                       std::vector<double>* db);

// Batch normalization over the N*H*W axis per channel.
struct BnCache {
  Tensor xhat;                   // normalized input
  std::vector<double> mean;      // batch mean per channel
  std::vector<double> inv_std;   // 1/sqrt(var + eps) per channel
  std::vector<double> var;       // biased batch variance per channel
};

void batchnorm_forward_train(const Tensor& in, const std::vector<double>& gamma,
                             const std::vector<double>& beta, double eps,
                             Tensor& out, BnCache& cache);
void batchnorm_forward_infer(const Tensor& in, const std::vector<double>& gamma,
                             const std::vector<double>& beta,
                             const std::vector<double>& running_mean,
                             const std::vector<double>& running_var, double eps,
                             Tensor& out);
void batchnorm_backward(const BnCache& cache, const std::vector<double>& gamma,
                        const Tensor& dout, Tensor* din,
                        std::vector<double>* dgamma, std::vector<double>* dbeta);

// Average pooling by an integer factor; spatial dims must divide evenly.
void avgpool_forward(const Tensor& in, int factor, Tensor& out);
void avgpool_backward(const Tensor& dout, int factor, Tensor* din);

// Activations applied in place. The backward forms recover the local
// derivative from the forward output, which is unambiguous for both.
void elu_forward(Tensor& t);
void elu_backward_from_output(const Tensor& out, Tensor& grad);
void relu_forward(Tensor& t);
void relu_backward_from_output(const Tensor& out, Tensor& grad);

// Channel-wise softmax per pixel. Backward maps a gradient with respect
// to the probabilities into one with respect to the logits, in place.
void softmax_forward(Tensor& t);
void softmax_backward_from_output(const Tensor& probs, Tensor& grad);

}  // namespace histoseg::netgraph::ops

#endif  // HISTOSEG_NETGRAPH_OPS_HPP_
