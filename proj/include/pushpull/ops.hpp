/* Copyright 2026 The pushpull Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PUSHPULL_OPS_HPP_
#define PUSHPULL_OPS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "pushpull/tensor.hpp"

// Differentiable primitives. Every forward op has an explicit backward that
// takes the saved forward inputs; nothing here holds state between calls.
// All ops are instantiated for float and double.
namespace pushpull {

struct Conv2dGeometry {
  std::size_t pad_h = 0;
  std::size_t pad_w = 0;
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;

  static Conv2dGeometry same(std::size_t kernel_size, std::size_t stride = 1) {
    return {(kernel_size - 1) / 2, (kernel_size - 1) / 2, stride, stride};
  }
};

// Output extents of a convolution; validates the input/kernel pairing.
Shape conv2d_output_shape(const Shape& input, const Shape& kernel,
                          const Conv2dGeometry& geometry);

// Cross-correlation (no kernel flip) with zero padding.
template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      std::span<const T> bias, const Conv2dGeometry& geometry);

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      const Conv2dGeometry& geometry) {
  return conv2d<T>(input, kernel, std::span<const T>{}, geometry);
}

template <typename T>
struct Conv2dGrads {
  BasicTensor<T> grad_input;
  BasicTensor<T> grad_kernel;
  BasicTensor<T> grad_bias;  // shape (Cout,)
};

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_input,
                               const BasicTensor<T>& kernel,
                               const Conv2dGeometry& geometry);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

// grad * 1[x > 0]; the subgradient at exactly zero is zero.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_input);

template <typename T>
struct MaxPoolResult {
  BasicTensor<T> output;
  std::vector<std::size_t> argmax;  // flat input index per output cell
};

// Ties resolve to the first maximum in row-major window order.
template <typename T>
MaxPoolResult<T> maxpool2d(const BasicTensor<T>& input, std::size_t window,
                           std::size_t stride);

template <typename T>
BasicTensor<T> maxpool2d_backward(const BasicTensor<T>& grad_out,
                                  std::span<const std::size_t> argmax,
                                  const Shape& input_shape);

// output = input * weight^T + bias, input (B,F), weight (O,F), bias (O).
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias);

template <typename T>
struct LinearGrads {
  BasicTensor<T> grad_input;
  BasicTensor<T> grad_weight;
  BasicTensor<T> grad_bias;
};

template <typename T>
LinearGrads<T> linear_backward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_input,
                               const BasicTensor<T>& weight);

template <typename T>
struct LossResult {
  T loss;
  BasicTensor<T> grad_logits;
};

// Mean over the batch of -log softmax(logits)[label].
template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                    std::span<const int> labels);

// Batch normalization over (B, H, W) per channel.
template <typename T>
struct BatchNormContext {
  BasicTensor<T> normalized;       // x_hat
  std::vector<T> inv_std;          // per channel
};

template <typename T>
BasicTensor<T> batchnorm2d_train(const BasicTensor<T>& input,
                                 const BasicTensor<T>& gamma,
                                 const BasicTensor<T>& beta,
                                 BasicTensor<T>& running_mean,
                                 BasicTensor<T>& running_var, T momentum,
                                 T epsilon, BatchNormContext<T>& ctx);

template <typename T>
BasicTensor<T> batchnorm2d_eval(const BasicTensor<T>& input,
                                const BasicTensor<T>& gamma,
                                const BasicTensor<T>& beta,
                                const BasicTensor<T>& running_mean,
                                const BasicTensor<T>& running_var, T epsilon);

template <typename T>
struct BatchNormGrads {
  BasicTensor<T> grad_input;
  BasicTensor<T> grad_gamma;
  BasicTensor<T> grad_beta;
};

template <typename T>
BatchNormGrads<T> batchnorm2d_backward(const BasicTensor<T>& grad_out,
                                       const BasicTensor<T>& gamma,
                                       const BatchNormContext<T>& ctx);

// (B,C,H,W) -> (B,C)
template <typename T>
BasicTensor<T> global_avgpool(const BasicTensor<T>& input);

template <typename T>
BasicTensor<T> global_avgpool_backward(const BasicTensor<T>& grad_out,
                                       const Shape& input_shape);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

// a - scale * b
template <typename T>
BasicTensor<T> sub_scaled(const BasicTensor<T>& a, const BasicTensor<T>& b,
                          T scale);

template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b);

}  // namespace pushpull

#endif  // PUSHPULL_OPS_HPP_
