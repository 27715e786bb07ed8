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

#include "pushpull/ops.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pushpull {
namespace {

// Single-threaded BLAS keeps the reduction order fixed per output element.
void pin_blas_threads() {
  static const bool pinned = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)pinned;
}

// C(MxN) = alpha * op(A) * op(B) + beta * C, row-major.
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
                 const float* a, const float* b, float beta, float* c) {
  cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a,
              trans_a ? m : k, b, trans_b ? k : n, beta, c, n);
}

inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, double alpha,
                 const double* a, const double* b, double beta, double* c) {
  cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
              trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a,
              trans_a ? m : k, b, trans_b ? k : n, beta, c, n);
}

struct ConvDims {
  std::size_t batch, in_c, in_h, in_w;
  std::size_t out_c, k_h, k_w;
  std::size_t out_h, out_w;

  std::size_t col_rows() const { return in_c * k_h * k_w; }
  std::size_t col_cols() const { return out_h * out_w; }
};

ConvDims conv_dims(const Shape& input, const Shape& kernel,
                   const Conv2dGeometry& g) {
  const Shape out = conv2d_output_shape(input, kernel, g);
  return {input[0], input[1], input[2], input[3], kernel[0],
          kernel[2], kernel[3], out[2],   out[3]};
}

template <typename T>
void im2col(const T* image, const ConvDims& d, const Conv2dGeometry& g,
            T* cols) {
  const std::size_t ohw = d.col_cols();
  for (std::size_t c = 0; c < d.in_c; ++c) {
    const T* plane = image + c * d.in_h * d.in_w;
    for (std::size_t dy = 0; dy < d.k_h; ++dy) {
      for (std::size_t dx = 0; dx < d.k_w; ++dx) {
        T* row = cols + ((c * d.k_h + dy) * d.k_w + dx) * ohw;
        for (std::size_t oy = 0; oy < d.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride_h + dy) -
                          static_cast<std::ptrdiff_t>(g.pad_h);
          T* dst = row + oy * d.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.in_h)) {
            std::fill(dst, dst + d.out_w, T{0});
            continue;
          }
          const T* src = plane + iy * d.in_w;
          for (std::size_t ox = 0; ox < d.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride_w + dx) -
                            static_cast<std::ptrdiff_t>(g.pad_w);
            dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(d.in_w))
                          ? T{0}
                          : src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, const ConvDims& d, const Conv2dGeometry& g,
            T* image) {
  const std::size_t ohw = d.col_cols();
  for (std::size_t c = 0; c < d.in_c; ++c) {
    T* plane = image + c * d.in_h * d.in_w;
    for (std::size_t dy = 0; dy < d.k_h; ++dy) {
      for (std::size_t dx = 0; dx < d.k_w; ++dx) {
        const T* row = cols + ((c * d.k_h + dy) * d.k_w + dx) * ohw;
        for (std::size_t oy = 0; oy < d.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride_h + dy) -
                          static_cast<std::ptrdiff_t>(g.pad_h);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.in_h)) continue;
          const T* src = row + oy * d.out_w;
          T* dst = plane + iy * d.in_w;
          for (std::size_t ox = 0; ox < d.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride_w + dx) -
                            static_cast<std::ptrdiff_t>(g.pad_w);
            if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(d.in_w)) {
              dst[ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

void require_rank(const Shape& s, std::size_t rank, const char* op,
                  const char* what) {
  if (s.size() != rank) {
    fail(ErrorCode::kShapeMismatch, std::string(op) + ": " + what +
                                        " must be rank " +
                                        std::to_string(rank) + ", got " +
                                        shape_str(s));
  }
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    fail(ErrorCode::kShapeMismatch,
         std::string(op) + ": expected " + shape_str(b) + ", got " +
             shape_str(a));
  }
}

}  // namespace

Shape conv2d_output_shape(const Shape& input, const Shape& kernel,
                          const Conv2dGeometry& g) {
  require_rank(input, 4, "conv2d", "input");
  require_rank(kernel, 4, "conv2d", "kernel");
  if (input[1] != kernel[1]) {
    fail(ErrorCode::kShapeMismatch,
         "conv2d: input channels " + std::to_string(input[1]) +
             " != kernel in-channels " + std::to_string(kernel[1]) +
             " (input " + shape_str(input) + ", kernel " + shape_str(kernel) +
             ")");
  }
  if (g.stride_h == 0 || g.stride_w == 0) {
    fail(ErrorCode::kInvalidArgument, "conv2d: stride must be positive");
  }
  const std::size_t padded_h = input[2] + 2 * g.pad_h;
  const std::size_t padded_w = input[3] + 2 * g.pad_w;
  if (padded_h < kernel[2] || padded_w < kernel[3]) {
    fail(ErrorCode::kShapeMismatch,
         "conv2d: kernel " + std::to_string(kernel[2]) + "x" +
             std::to_string(kernel[3]) + " larger than padded input " +
             std::to_string(padded_h) + "x" + std::to_string(padded_w));
  }
  return {input[0], kernel[0], (padded_h - kernel[2]) / g.stride_h + 1,
          (padded_w - kernel[3]) / g.stride_w + 1};
}

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& kernel,
                      std::span<const T> bias, const Conv2dGeometry& geometry) {
  pin_blas_threads();
  const ConvDims d = conv_dims(input.shape(), kernel.shape(), geometry);
  if (!bias.empty() && bias.size() != d.out_c) {
    fail(ErrorCode::kShapeMismatch,
         "conv2d: bias length " + std::to_string(bias.size()) +
             " != out-channels " + std::to_string(d.out_c));
  }
  BasicTensor<T> out({d.batch, d.out_c, d.out_h, d.out_w});
  std::vector<T> cols(d.col_rows() * d.col_cols());
  const std::size_t in_stride = d.in_c * d.in_h * d.in_w;
  const std::size_t out_stride = d.out_c * d.col_cols();
  for (std::size_t b = 0; b < d.batch; ++b) {
    im2col(input.data().data() + b * in_stride, d, geometry, cols.data());
    T* dst = out.data().data() + b * out_stride;
    gemm(false, false, static_cast<int>(d.out_c),
         static_cast<int>(d.col_cols()), static_cast<int>(d.col_rows()), T{1},
         kernel.data().data(), cols.data(), T{0}, dst);
    if (!bias.empty()) {
      for (std::size_t o = 0; o < d.out_c; ++o) {
        T* plane = dst + o * d.col_cols();
        for (std::size_t i = 0; i < d.col_cols(); ++i) plane[i] += bias[o];
      }
    }
  }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_input,
                               const BasicTensor<T>& kernel,
                               const Conv2dGeometry& geometry) {
  pin_blas_threads();
  const ConvDims d = conv_dims(saved_input.shape(), kernel.shape(), geometry);
  require_same_shape(grad_out.shape(),
                     {d.batch, d.out_c, d.out_h, d.out_w}, "conv2d_backward");

  Conv2dGrads<T> g{BasicTensor<T>(saved_input.shape()),
                   BasicTensor<T>(kernel.shape()),
                   BasicTensor<T>({d.out_c})};
  std::vector<T> cols(d.col_rows() * d.col_cols());
  std::vector<T> grad_cols(cols.size());
  const std::size_t in_stride = d.in_c * d.in_h * d.in_w;
  const std::size_t out_stride = d.out_c * d.col_cols();
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* gout = grad_out.data().data() + b * out_stride;
    im2col(saved_input.data().data() + b * in_stride, d, geometry,
           cols.data());
    // dK += dY * cols^T
    gemm(false, true, static_cast<int>(d.out_c), static_cast<int>(d.col_rows()),
         static_cast<int>(d.col_cols()), T{1}, gout, cols.data(), T{1},
         g.grad_kernel.data().data());
    // dcols = K^T * dY
    gemm(true, false, static_cast<int>(d.col_rows()),
         static_cast<int>(d.col_cols()), static_cast<int>(d.out_c), T{1},
         kernel.data().data(), gout, T{0}, grad_cols.data());
    col2im(grad_cols.data(), d, geometry,
           g.grad_input.data().data() + b * in_stride);
    for (std::size_t o = 0; o < d.out_c; ++o) {
      const T* plane = gout + o * d.col_cols();
      T acc = 0;
      for (std::size_t i = 0; i < d.col_cols(); ++i) acc += plane[i];
      g.grad_bias[o] += acc;
    }
  }
  return g;
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  BasicTensor<T> out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T{0} ? x[i] : T{0};
  return out;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& grad_out,
                             const BasicTensor<T>& saved_input) {
  require_same_shape(grad_out.shape(), saved_input.shape(), "relu_backward");
  BasicTensor<T> out(grad_out.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = saved_input[i] > T{0} ? grad_out[i] : T{0};
  }
  return out;
}

template <typename T>
MaxPoolResult<T> maxpool2d(const BasicTensor<T>& input, std::size_t window,
                           std::size_t stride) {
  require_rank(input.shape(), 4, "maxpool2d", "input");
  if (window == 0 || stride == 0) {
    fail(ErrorCode::kInvalidArgument,
         "maxpool2d: window and stride must be positive");
  }
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2),
                    w = input.dim(3);
  if (h < window || w < window) {
    fail(ErrorCode::kShapeMismatch,
         "maxpool2d: window " + std::to_string(window) +
             " does not fit input " + shape_str(input.shape()));
  }
  const std::size_t oh = (h - window) / stride + 1;
  const std::size_t ow = (w - window) / stride + 1;
  MaxPoolResult<T> r{BasicTensor<T>({n, c, oh, ow}), {}};
  r.argmax.resize(r.output.size());
  std::size_t o = 0;
  for (std::size_t p = 0; p < n * c; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox, ++o) {
        std::size_t best = base + oy * stride * w + ox * stride;
        for (std::size_t dy = 0; dy < window; ++dy) {
          for (std::size_t dx = 0; dx < window; ++dx) {
            const std::size_t idx =
                base + (oy * stride + dy) * w + ox * stride + dx;
            if (input[idx] > input[best]) best = idx;
          }
        }
        r.output[o] = input[best];
        r.argmax[o] = best;
      }
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> maxpool2d_backward(const BasicTensor<T>& grad_out,
                                  std::span<const std::size_t> argmax,
                                  const Shape& input_shape) {
  if (argmax.size() != grad_out.size()) {
    fail(ErrorCode::kShapeMismatch,
         "maxpool2d_backward: " + std::to_string(argmax.size()) +
             " saved indices for gradient " + shape_str(grad_out.shape()));
  }
  BasicTensor<T> g(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= g.size()) {
      fail(ErrorCode::kOutOfRange, "maxpool2d_backward: saved index " +
                                       std::to_string(argmax[i]) +
                                       " outside input " +
                                       shape_str(input_shape));
    }
    g[argmax[i]] += grad_out[i];
  }
  return g;
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const BasicTensor<T>& bias) {
  pin_blas_threads();
  require_rank(input.shape(), 2, "linear", "input");
  require_rank(weight.shape(), 2, "linear", "weight");
  const std::size_t b = input.dim(0), f = input.dim(1), o = weight.dim(0);
  if (weight.dim(1) != f) {
    fail(ErrorCode::kShapeMismatch,
         "linear: input features " + std::to_string(f) + " != weight columns " +
             std::to_string(weight.dim(1)));
  }
  if (bias.size() != o) {
    fail(ErrorCode::kShapeMismatch, "linear: bias length " +
                                        std::to_string(bias.size()) +
                                        " != outputs " + std::to_string(o));
  }
  BasicTensor<T> out({b, o});
  for (std::size_t i = 0; i < b; ++i) {
    std::copy(bias.data().begin(), bias.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(i * o));
  }
  gemm(false, true, static_cast<int>(b), static_cast<int>(o),
       static_cast<int>(f), T{1}, input.data().data(), weight.data().data(),
       T{1}, out.data().data());
  return out;
}

template <typename T>
LinearGrads<T> linear_backward(const BasicTensor<T>& grad_out,
                               const BasicTensor<T>& saved_input,
                               const BasicTensor<T>& weight) {
  pin_blas_threads();
  require_rank(grad_out.shape(), 2, "linear_backward", "grad");
  const std::size_t b = saved_input.dim(0), f = saved_input.dim(1),
                    o = weight.dim(0);
  require_same_shape(grad_out.shape(), {b, o}, "linear_backward");
  LinearGrads<T> g{BasicTensor<T>({b, f}), BasicTensor<T>({o, f}),
                   BasicTensor<T>({o})};
  // dX = dY * W
  gemm(false, false, static_cast<int>(b), static_cast<int>(f),
       static_cast<int>(o), T{1}, grad_out.data().data(), weight.data().data(),
       T{0}, g.grad_input.data().data());
  // dW = dY^T * X
  gemm(true, false, static_cast<int>(o), static_cast<int>(f),
       static_cast<int>(b), T{1}, grad_out.data().data(),
       saved_input.data().data(), T{0}, g.grad_weight.data().data());
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < o; ++j) g.grad_bias[j] += grad_out[i * o + j];
  }
  return g;
}

template <typename T>
LossResult<T> softmax_cross_entropy(const BasicTensor<T>& logits,
                                    std::span<const int> labels) {
  require_rank(logits.shape(), 2, "softmax_cross_entropy", "logits");
  const std::size_t b = logits.dim(0), k = logits.dim(1);
  if (labels.size() != b) {
    fail(ErrorCode::kShapeMismatch,
         "softmax_cross_entropy: " + std::to_string(labels.size()) +
             " labels for batch of " + std::to_string(b));
  }
  LossResult<T> r{T{0}, BasicTensor<T>({b, k})};
  T total = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      fail(ErrorCode::kOutOfRange,
           "softmax_cross_entropy: label " + std::to_string(label) +
               " at batch index " + std::to_string(i) + " outside [0, " +
               std::to_string(k) + ")");
    }
    const T* row = logits.data().data() + i * k;
    T* grow = r.grad_logits.data().data() + i * k;
    const T mx = *std::max_element(row, row + k);
    T sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      grow[j] = std::exp(row[j] - mx);
      sum += grow[j];
    }
    total += std::log(sum) - (row[label] - mx);
    for (std::size_t j = 0; j < k; ++j) {
      grow[j] = (grow[j] / sum - (j == static_cast<std::size_t>(label) ? 1 : 0)) /
                static_cast<T>(b);
    }
  }
  r.loss = total / static_cast<T>(b);
  return r;
}

template <typename T>
BasicTensor<T> batchnorm2d_train(const BasicTensor<T>& input,
                                 const BasicTensor<T>& gamma,
                                 const BasicTensor<T>& beta,
                                 BasicTensor<T>& running_mean,
                                 BasicTensor<T>& running_var, T momentum,
                                 T epsilon, BatchNormContext<T>& ctx) {
  require_rank(input.shape(), 4, "batchnorm2d", "input");
  const std::size_t n = input.dim(0), c = input.dim(1),
                    hw = input.dim(2) * input.dim(3);
  require_same_shape(gamma.shape(), {c}, "batchnorm2d gamma");
  const std::size_t count = n * hw;
  BasicTensor<T> out(input.shape());
  ctx.normalized = BasicTensor<T>(input.shape());
  ctx.inv_std.assign(c, T{0});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0;
    for (std::size_t b = 0; b < n; ++b) {
      const T* p = input.data().data() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) mean += p[i];
    }
    mean /= static_cast<double>(count);
    double var = 0;
    for (std::size_t b = 0; b < n; ++b) {
      const T* p = input.data().data() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double dlt = p[i] - mean;
        var += dlt * dlt;
      }
    }
    var /= static_cast<double>(count);
    const T inv_std = static_cast<T>(1.0 / std::sqrt(var + epsilon));
    ctx.inv_std[ch] = inv_std;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const T xh = static_cast<T>(input[off + i] - mean) * inv_std;
        ctx.normalized[off + i] = xh;
        out[off + i] = gamma[ch] * xh + beta[ch];
      }
    }
    const double unbiased =
        count > 1 ? var * static_cast<double>(count) / (count - 1) : var;
    running_mean[ch] = static_cast<T>(momentum * running_mean[ch] +
                                      (1 - momentum) * mean);
    running_var[ch] = static_cast<T>(momentum * running_var[ch] +
                                     (1 - momentum) * unbiased);
  }
  return out;
}

template <typename T>
BasicTensor<T> batchnorm2d_eval(const BasicTensor<T>& input,
                                const BasicTensor<T>& gamma,
                                const BasicTensor<T>& beta,
                                const BasicTensor<T>& running_mean,
                                const BasicTensor<T>& running_var, T epsilon) {
  require_rank(input.shape(), 4, "batchnorm2d", "input");
  const std::size_t n = input.dim(0), c = input.dim(1),
                    hw = input.dim(2) * input.dim(3);
  require_same_shape(gamma.shape(), {c}, "batchnorm2d gamma");
  BasicTensor<T> out(input.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T scale = gamma[ch] / std::sqrt(running_var[ch] + epsilon);
    const T shift = beta[ch] - running_mean[ch] * scale;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        out[off + i] = input[off + i] * scale + shift;
      }
    }
  }
  return out;
}

template <typename T>
BatchNormGrads<T> batchnorm2d_backward(const BasicTensor<T>& grad_out,
                                       const BasicTensor<T>& gamma,
                                       const BatchNormContext<T>& ctx) {
  if (ctx.normalized.empty()) {
    fail(ErrorCode::kMissingContext,
         "batchnorm2d_backward: no saved forward context");
  }
  require_same_shape(grad_out.shape(), ctx.normalized.shape(),
                     "batchnorm2d_backward");
  const std::size_t n = grad_out.dim(0), c = grad_out.dim(1),
                    hw = grad_out.dim(2) * grad_out.dim(3);
  const auto count = static_cast<T>(n * hw);
  BatchNormGrads<T> g{BasicTensor<T>(grad_out.shape()), BasicTensor<T>({c}),
                      BasicTensor<T>({c})};
  for (std::size_t ch = 0; ch < c; ++ch) {
    T sum_g = 0, sum_gx = 0;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_g += grad_out[off + i];
        sum_gx += grad_out[off + i] * ctx.normalized[off + i];
      }
    }
    g.grad_beta[ch] = sum_g;
    g.grad_gamma[ch] = sum_gx;
    const T k = gamma[ch] * ctx.inv_std[ch] / count;
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        g.grad_input[off + i] =
            k * (count * grad_out[off + i] - sum_g -
                 ctx.normalized[off + i] * sum_gx);
      }
    }
  }
  return g;
}

template <typename T>
BasicTensor<T> global_avgpool(const BasicTensor<T>& input) {
  require_rank(input.shape(), 4, "global_avgpool", "input");
  const std::size_t nc = input.dim(0) * input.dim(1),
                    hw = input.dim(2) * input.dim(3);
  BasicTensor<T> out({input.dim(0), input.dim(1)});
  for (std::size_t p = 0; p < nc; ++p) {
    T acc = 0;
    for (std::size_t i = 0; i < hw; ++i) acc += input[p * hw + i];
    out[p] = acc / static_cast<T>(hw);
  }
  return out;
}

template <typename T>
BasicTensor<T> global_avgpool_backward(const BasicTensor<T>& grad_out,
                                       const Shape& input_shape) {
  require_rank(input_shape, 4, "global_avgpool_backward", "input");
  require_same_shape(grad_out.shape(), {input_shape[0], input_shape[1]},
                     "global_avgpool_backward");
  const std::size_t hw = input_shape[2] * input_shape[3];
  BasicTensor<T> g(input_shape);
  for (std::size_t p = 0; p < grad_out.size(); ++p) {
    const T v = grad_out[p] / static_cast<T>(hw);
    for (std::size_t i = 0; i < hw; ++i) g[p * hw + i] = v;
  }
  return g;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(b.shape(), a.shape(), "add");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
BasicTensor<T> sub_scaled(const BasicTensor<T>& a, const BasicTensor<T>& b,
                          T scale) {
  require_same_shape(b.shape(), a.shape(), "sub_scaled");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - scale * b[i];
  return out;
}

template <typename T>
void add_inplace(BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(b.shape(), a.shape(), "add_inplace");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

#define PUSHPULL_INSTANTIATE_OPS(T)                                           \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, \
                                 std::span<const T>, const Conv2dGeometry&);  \
  template Conv2dGrads<T> conv2d_backward(                                    \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,    \
      const Conv2dGeometry&);                                                 \
  template BasicTensor<T> relu(const BasicTensor<T>&);                        \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&,                \
                                        const BasicTensor<T>&);               \
  template MaxPoolResult<T> maxpool2d(const BasicTensor<T>&, std::size_t,     \
                                      std::size_t);                           \
  template BasicTensor<T> maxpool2d_backward(                                 \
      const BasicTensor<T>&, std::span<const std::size_t>, const Shape&);     \
  template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&, \
                                 const BasicTensor<T>&);                      \
  template LinearGrads<T> linear_backward(                                    \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);   \
  template LossResult<T> softmax_cross_entropy(const BasicTensor<T>&,         \
                                               std::span<const int>);         \
  template BasicTensor<T> batchnorm2d_train(                                  \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,    \
      BasicTensor<T>&, BasicTensor<T>&, T, T, BatchNormContext<T>&);          \
  template BasicTensor<T> batchnorm2d_eval(                                   \
      const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,    \
      const BasicTensor<T>&, const BasicTensor<T>&, T);                       \
  template BatchNormGrads<T> batchnorm2d_backward(                            \
      const BasicTensor<T>&, const BasicTensor<T>&,                           \
      const BatchNormContext<T>&);                                            \
  template BasicTensor<T> global_avgpool(const BasicTensor<T>&);              \
  template BasicTensor<T> global_avgpool_backward(const BasicTensor<T>&,      \
                                                  const Shape&);              \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);  \
  template BasicTensor<T> sub_scaled(const BasicTensor<T>&,                   \
                                     const BasicTensor<T>&, T);               \
  template void add_inplace(BasicTensor<T>&, const BasicTensor<T>&);

PUSHPULL_INSTANTIATE_OPS(float)
PUSHPULL_INSTANTIATE_OPS(double)

#undef PUSHPULL_INSTANTIATE_OPS

}  // namespace pushpull
