#ifndef MPT_NN_OPS_HPP
#define MPT_NN_OPS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "mpt/errors.hpp"
#include "mpt/tensor.hpp"

// Forward/backward kernels for the conv-family networks. Convolutions lower
// onto a single sequential Eigen GEMM per call (EIGEN_DONT_PARALLELIZE is set
// project-wide), so the reduction order is fixed by the im2col layout and
// repeated evaluation of identical inputs is bit-reproducible.

namespace mpt {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline int conv_out_extent_checked(int extent, int k, int stride, int pad) {
  int span = extent + 2 * pad - k;
  if (span < 0)
    throw ShapeError("conv2d kernel size " + std::to_string(k) +
                     " exceeds padded extent " + std::to_string(extent + 2 * pad));
  return span / stride + 1;
}

// Scratch buffers a conv call can reuse across iterations; when the forward
// pass keeps one alive, the backward pass reuses the im2col columns instead
// of rebuilding them.
template <typename T>
struct ConvWorkspace {
  std::vector<T> cols;     // [C*k*k, B*OH*OW], channels-major
  std::vector<T> scratch;  // GEMM staging, [max(M, C*k*k), B*OH*OW]
  bool cols_valid = false;
};

namespace detail {

// One sample into the channels-major layout: cols[(c*k+kh)*k+kw][oh*OW+ow].
// For stride 1 each (c,kh,kw) row is a shifted copy of an input row, so the
// inner loop is a bounds-clamped contiguous copy.
template <typename T>
void im2col(const T* in, int C, int H, int W, int k, int stride, int pad,
            int OH, int OW, T* cols, int64_t row_stride) {
  for (int c = 0; c < C; ++c) {
    const T* plane = in + static_cast<int64_t>(c) * H * W;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* row = cols + (static_cast<int64_t>(c) * k * k + kh * k + kw) * row_stride;
        for (int oh = 0; oh < OH; ++oh) {
          int ih = oh * stride - pad + kh;
          T* dst = row + static_cast<int64_t>(oh) * OW;
          if (ih < 0 || ih >= H) {
            std::fill(dst, dst + OW, T{0});
            continue;
          }
          const T* src_row = plane + static_cast<int64_t>(ih) * W;
          if (stride == 1) {
            int lo = std::max(0, pad - kw);
            int hi = std::min(OW, W + pad - kw);
            std::fill(dst, dst + lo, T{0});
            if (hi > lo) std::copy(src_row + lo - pad + kw, src_row + hi - pad + kw, dst + lo);
            std::fill(dst + std::max(lo, hi), dst + OW, T{0});
          } else {
            for (int ow = 0; ow < OW; ++ow) {
              int iw = ow * stride - pad + kw;
              dst[ow] = (iw >= 0 && iw < W) ? src_row[iw] : T{0};
            }
          }
        }
      }
    }
  }
}

// Transposed scatter-add of cols gradients back onto the input gradient.
template <typename T>
void col2im_add(const T* cols, int C, int H, int W, int k, int stride, int pad,
                int OH, int OW, T* grad_in, int64_t row_stride) {
  for (int c = 0; c < C; ++c) {
    T* plane = grad_in + static_cast<int64_t>(c) * H * W;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* row = cols + (static_cast<int64_t>(c) * k * k + kh * k + kw) * row_stride;
        for (int oh = 0; oh < OH; ++oh) {
          int ih = oh * stride - pad + kh;
          if (ih < 0 || ih >= H) continue;
          const T* src = row + static_cast<int64_t>(oh) * OW;
          T* dst_row = plane + static_cast<int64_t>(ih) * W;
          if (stride == 1) {
            int lo = std::max(0, pad - kw);
            int hi = std::min(OW, W + pad - kw);
            for (int ow = lo; ow < hi; ++ow) dst_row[ow - pad + kw] += src[ow];
          } else {
            for (int ow = 0; ow < OW; ++ow) {
              int iw = ow * stride - pad + kw;
              if (iw >= 0 && iw < W) dst_row[iw] += src[ow];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void check_conv_shapes(const Tensor<T>& input, const Tensor<T>& weight,
                       int stride, int padding) {
  if (input.rank() != 4)
    throw ShapeError("conv2d input must be [B,C,H,W], got " + input.shape_str());
  if (weight.rank() != 4)
    throw ShapeError("conv2d weight must be [M,C,k,k], got " + weight.shape_str());
  if (weight.dim(2) != weight.dim(3))
    throw ShapeError("conv2d kernel must be square, got " + weight.shape_str());
  if (input.dim(1) != weight.dim(1))
    throw ShapeError("conv2d channel mismatch: input has " +
                     std::to_string(input.dim(1)) + " channels, weight expects " +
                     std::to_string(weight.dim(1)));
  if (stride < 1) throw ConfigError("conv2d stride must be >= 1");
  if (padding < 0) throw ConfigError("conv2d padding must be >= 0");
}

// ----- specialized direct path for 3x3 stride-1 pad-1 (the conv family) -----

// Copies one H x W plane into an (H+2) x (W+2) zero-padded buffer.
template <typename T>
void pad_plane(const T* src, int H, int W, T* dst) {
  const int PW = W + 2;
  std::fill(dst, dst + PW, T{0});
  for (int h = 0; h < H; ++h) {
    T* row = dst + static_cast<int64_t>(h + 1) * PW;
    row[0] = T{0};
    std::copy_n(src + static_cast<int64_t>(h) * W, W, row + 1);
    row[W + 1] = T{0};
  }
  std::fill(dst + static_cast<int64_t>(H + 1) * PW, dst + static_cast<int64_t>(H + 2) * PW, T{0});
}

// out += pp (padded) correlated with the 3x3 kernel wk.
template <typename T>
void stencil3x3_accum(const T* pp, int H, int W, const T* wk, T* out) {
  const int PW = W + 2;
  const T w0 = wk[0], w1 = wk[1], w2 = wk[2], w3 = wk[3], w4 = wk[4];
  const T w5 = wk[5], w6 = wk[6], w7 = wk[7], w8 = wk[8];
  for (int oh = 0; oh < H; ++oh) {
    const T* r0 = pp + static_cast<int64_t>(oh) * PW;
    const T* r1 = r0 + PW;
    const T* r2 = r1 + PW;
    T* o = out + static_cast<int64_t>(oh) * W;
    for (int ow = 0; ow < W; ++ow)
      o[ow] += w0 * r0[ow] + w1 * r0[ow + 1] + w2 * r0[ow + 2] +
               w3 * r1[ow] + w4 * r1[ow + 1] + w5 * r1[ow + 2] +
               w6 * r2[ow] + w7 * r2[ow + 1] + w8 * r2[ow + 2];
  }
}

// gw9 += the nine correlation sums of go against the padded input plane.
template <typename T>
void stencil3x3_grad_weight(const T* pp, const T* go, int H, int W, T* gw9) {
  constexpr int L = 8;  // accumulator lanes, reduced once per plane
  const int PW = W + 2;
  T acc[9][L] = {};
  for (int oh = 0; oh < H; ++oh) {
    const T* g = go + static_cast<int64_t>(oh) * W;
    const T* r0 = pp + static_cast<int64_t>(oh) * PW;
    const T* r1 = r0 + PW;
    const T* r2 = r1 + PW;
    int ow = 0;
    for (; ow + L <= W; ow += L)
      for (int l = 0; l < L; ++l) {
        T gv = g[ow + l];
        acc[0][l] += gv * r0[ow + l];
        acc[1][l] += gv * r0[ow + l + 1];
        acc[2][l] += gv * r0[ow + l + 2];
        acc[3][l] += gv * r1[ow + l];
        acc[4][l] += gv * r1[ow + l + 1];
        acc[5][l] += gv * r1[ow + l + 2];
        acc[6][l] += gv * r2[ow + l];
        acc[7][l] += gv * r2[ow + l + 1];
        acc[8][l] += gv * r2[ow + l + 2];
      }
    for (; ow < W; ++ow) {
      T gv = g[ow];
      acc[0][0] += gv * r0[ow];
      acc[1][0] += gv * r0[ow + 1];
      acc[2][0] += gv * r0[ow + 2];
      acc[3][0] += gv * r1[ow];
      acc[4][0] += gv * r1[ow + 1];
      acc[5][0] += gv * r1[ow + 2];
      acc[6][0] += gv * r2[ow];
      acc[7][0] += gv * r2[ow + 1];
      acc[8][0] += gv * r2[ow + 2];
    }
  }
  for (int i = 0; i < 9; ++i) {
    T s{};
    for (int l = 0; l < L; ++l) s += acc[i][l];
    gw9[i] += s;
  }
}

template <typename T>
bool is_direct3x3(const Tensor<T>& weight, int stride, int padding) {
  return weight.dim(2) == 3 && stride == 1 && padding == 1;
}

// cols [C*k*k, B*P]: sample b occupies columns [b*P, (b+1)*P).
template <typename T>
void fill_cols(const Tensor<T>& input, int k, int stride, int padding, int OH,
               int OW, std::vector<T>& cols) {
  const int B = static_cast<int>(input.dim(0)), C = static_cast<int>(input.dim(1));
  const int H = static_cast<int>(input.dim(2)), W = static_cast<int>(input.dim(3));
  const int64_t P = static_cast<int64_t>(OH) * OW;
  const int64_t row_stride = P * B;
  cols.resize(static_cast<size_t>(row_stride) * C * k * k);
  for (int b = 0; b < B; ++b)
    im2col(input.data.data() + static_cast<int64_t>(b) * C * H * W, C, H, W, k,
           stride, padding, OH, OW, cols.data() + P * b, row_stride);
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weight,
                         int stride, int padding, ConvWorkspace<T>* ws = nullptr) {
  detail::check_conv_shapes(input, weight, stride, padding);
  const int B = static_cast<int>(input.dim(0)), C = static_cast<int>(input.dim(1));
  const int H = static_cast<int>(input.dim(2)), W = static_cast<int>(input.dim(3));
  const int M = static_cast<int>(weight.dim(0)), k = static_cast<int>(weight.dim(2));
  const int OH = conv_out_extent_checked(H, k, stride, padding);
  const int OW = conv_out_extent_checked(W, k, stride, padding);
  const int ckk = C * k * k;
  const int64_t P = static_cast<int64_t>(OH) * OW;

  ConvWorkspace<T> local;
  ConvWorkspace<T>& w = ws ? *ws : local;

  Tensor<T> output({B, M, OH, OW});
  if (detail::is_direct3x3(weight, stride, padding)) {
    // Direct stencil: padded input plane built once per (b,c), reused over m.
    w.scratch.resize(static_cast<size_t>(H + 2) * (W + 2));
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < C; ++c) {
        detail::pad_plane(input.data.data() + (static_cast<int64_t>(b) * C + c) * H * W,
                          H, W, w.scratch.data());
        for (int m = 0; m < M; ++m)
          detail::stencil3x3_accum(
              w.scratch.data(), H, W,
              weight.data.data() + (static_cast<int64_t>(m) * C + c) * 9,
              output.data.data() + (static_cast<int64_t>(b) * M + m) * P);
      }
    return output;
  }

  detail::fill_cols(input, k, stride, padding, OH, OW, w.cols);
  w.cols_valid = ws != nullptr;

  w.scratch.resize(static_cast<size_t>(B) * P * std::max<int64_t>(M, ckk));
  Eigen::Map<const RowMat<T>> cmap(w.cols.data(), ckk, B * P);
  Eigen::Map<const RowMat<T>> wmap(weight.data.data(), M, ckk);
  Eigen::Map<RowMat<T>> omat(w.scratch.data(), M, B * P);
  omat.noalias() = wmap * cmap;

  // stage [M, B*P] -> output [B, M, P], contiguous rows
  for (int b = 0; b < B; ++b)
    for (int m = 0; m < M; ++m)
      std::copy_n(w.scratch.data() + static_cast<int64_t>(m) * B * P + static_cast<int64_t>(b) * P,
                  P, output.data.data() + (static_cast<int64_t>(b) * M + m) * P);
  return output;
}

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> weight;
};

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weight,
                             const Tensor<T>& grad_out, int stride, int padding,
                             bool compute_grad_input = true,
                             ConvWorkspace<T>* ws = nullptr) {
  detail::check_conv_shapes(input, weight, stride, padding);
  const int B = static_cast<int>(input.dim(0)), C = static_cast<int>(input.dim(1));
  const int H = static_cast<int>(input.dim(2)), W = static_cast<int>(input.dim(3));
  const int M = static_cast<int>(weight.dim(0)), k = static_cast<int>(weight.dim(2));
  const int OH = conv_out_extent_checked(H, k, stride, padding);
  const int OW = conv_out_extent_checked(W, k, stride, padding);
  if (grad_out.shape != std::vector<int64_t>{B, M, OH, OW})
    throw ShapeError("conv2d grad_out shape " + grad_out.shape_str() +
                     " does not match output [" + std::to_string(B) + "," +
                     std::to_string(M) + "," + std::to_string(OH) + "," +
                     std::to_string(OW) + "]");
  const int ckk = C * k * k;
  const int64_t P = static_cast<int64_t>(OH) * OW;

  ConvWorkspace<T> local;
  ConvWorkspace<T>& w = ws ? *ws : local;

  if (detail::is_direct3x3(weight, stride, padding)) {
    ConvGrads<T> grads;
    grads.weight = Tensor<T>(weight.shape);
    w.scratch.resize(static_cast<size_t>(H + 2) * (W + 2));
    // grad_weight: correlate grad_out planes against padded input planes.
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < C; ++c) {
        detail::pad_plane(input.data.data() + (static_cast<int64_t>(b) * C + c) * H * W,
                          H, W, w.scratch.data());
        for (int m = 0; m < M; ++m)
          detail::stencil3x3_grad_weight(
              w.scratch.data(),
              grad_out.data.data() + (static_cast<int64_t>(b) * M + m) * P, H, W,
              grads.weight.data.data() + (static_cast<int64_t>(m) * C + c) * 9);
      }
    if (compute_grad_input) {
      // grad_input: stencil of padded grad_out with the flipped kernels.
      grads.input = Tensor<T>(input.shape);
      Tensor<T> flipped(weight.shape);
      for (int64_t mc = 0; mc < static_cast<int64_t>(M) * C; ++mc)
        for (int i = 0; i < 9; ++i)
          flipped[mc * 9 + i] = weight[mc * 9 + (8 - i)];
      for (int b = 0; b < B; ++b)
        for (int m = 0; m < M; ++m) {
          detail::pad_plane(grad_out.data.data() + (static_cast<int64_t>(b) * M + m) * P,
                            OH, OW, w.scratch.data());
          for (int c = 0; c < C; ++c)
            detail::stencil3x3_accum(
                w.scratch.data(), H, W,
                flipped.data.data() + (static_cast<int64_t>(m) * C + c) * 9,
                grads.input.data.data() + (static_cast<int64_t>(b) * C + c) * H * W);
        }
    }
    return grads;
  }

  if (!w.cols_valid ||
      w.cols.size() != static_cast<size_t>(B) * P * ckk)
    detail::fill_cols(input, k, stride, padding, OH, OW, w.cols);

  // grad_out [B, M, P] -> stage [M, B*P], contiguous rows
  w.scratch.resize(static_cast<size_t>(B) * P * std::max<int64_t>(M, ckk));
  std::vector<T> go_stage(static_cast<size_t>(B) * P * M);
  for (int b = 0; b < B; ++b)
    for (int m = 0; m < M; ++m)
      std::copy_n(grad_out.data.data() + (static_cast<int64_t>(b) * M + m) * P, P,
                  go_stage.data() + static_cast<int64_t>(m) * B * P + static_cast<int64_t>(b) * P);
  Eigen::Map<const RowMat<T>> gmap(go_stage.data(), M, B * P);
  Eigen::Map<const RowMat<T>> cmap(w.cols.data(), ckk, B * P);
  Eigen::Map<const RowMat<T>> wmap(weight.data.data(), M, ckk);

  ConvGrads<T> grads;
  grads.weight = Tensor<T>(weight.shape);
  Eigen::Map<RowMat<T>> gw(grads.weight.data.data(), M, ckk);
  gw.noalias() = gmap * cmap.transpose();

  if (compute_grad_input) {
    grads.input = Tensor<T>(input.shape);
    Eigen::Map<RowMat<T>> gcols(w.scratch.data(), ckk, B * P);
    gcols.noalias() = wmap.transpose() * gmap;
    for (int b = 0; b < B; ++b)
      detail::col2im_add(w.scratch.data() + static_cast<int64_t>(b) * P, C, H, W,
                         k, stride, padding, OH, OW,
                         grads.input.data.data() + static_cast<int64_t>(b) * C * H * W,
                         static_cast<int64_t>(B) * P);
  }
  w.cols_valid = false;  // consumed
  return grads;
}

template <typename T>
Tensor<T> linear_forward(const Tensor<T>& input, const Tensor<T>& weight) {
  if (input.rank() != 2)
    throw ShapeError("linear input must be [B,in], got " + input.shape_str());
  if (weight.rank() != 2)
    throw ShapeError("linear weight must be [out,in], got " + weight.shape_str());
  if (input.dim(1) != weight.dim(1))
    throw ShapeError("linear feature mismatch: input has " +
                     std::to_string(input.dim(1)) + ", weight expects " +
                     std::to_string(weight.dim(1)));
  const int B = static_cast<int>(input.dim(0));
  const int in = static_cast<int>(input.dim(1)), out = static_cast<int>(weight.dim(0));
  Tensor<T> output({B, out});
  Eigen::Map<const RowMat<T>> x(input.data.data(), B, in);
  Eigen::Map<const RowMat<T>> w(weight.data.data(), out, in);
  Eigen::Map<RowMat<T>> y(output.data.data(), B, out);
  y.noalias() = x * w.transpose();
  return output;
}

template <typename T>
struct LinearGrads {
  Tensor<T> input;
  Tensor<T> weight;
};

template <typename T>
LinearGrads<T> linear_backward(const Tensor<T>& input, const Tensor<T>& weight,
                               const Tensor<T>& grad_out) {
  const int B = static_cast<int>(input.dim(0));
  const int in = static_cast<int>(input.dim(1)), out = static_cast<int>(weight.dim(0));
  if (grad_out.shape != std::vector<int64_t>{B, out})
    throw ShapeError("linear grad_out shape " + grad_out.shape_str() +
                     " does not match output [" + std::to_string(B) + "," +
                     std::to_string(out) + "]");
  LinearGrads<T> grads{Tensor<T>(input.shape), Tensor<T>(weight.shape)};
  Eigen::Map<const RowMat<T>> x(input.data.data(), B, in);
  Eigen::Map<const RowMat<T>> w(weight.data.data(), out, in);
  Eigen::Map<const RowMat<T>> go(grad_out.data.data(), B, out);
  Eigen::Map<RowMat<T>> gx(grads.input.data.data(), B, in);
  Eigen::Map<RowMat<T>> gw(grads.weight.data.data(), out, in);
  gw.noalias() = go.transpose() * x;
  gx.noalias() = go * w;
  return grads;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& input) {
  Tensor<T> out(input.shape);
  for (int64_t i = 0; i < input.numel(); ++i)
    out[i] = input[i] > T{0} ? input[i] : T{0};
  return out;
}

// Subgradient at 0 is 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  require_same_shape(input, grad_out, "relu_backward");
  Tensor<T> out(input.shape);
  for (int64_t i = 0; i < input.numel(); ++i)
    out[i] = input[i] > T{0} ? grad_out[i] : T{0};
  return out;
}

template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<int64_t> argmax;  // flat index into the pool input, per output element
};

// 2x2 max pooling, stride 2. Ties keep the lowest flat input index.
template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input) {
  if (input.rank() != 4)
    throw ShapeError("maxpool2x2 input must be [B,C,H,W], got " + input.shape_str());
  const int64_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  if (H % 2 != 0 || W % 2 != 0)
    throw ShapeError("maxpool2x2 requires even spatial extents, got " + input.shape_str());
  PoolResult<T> res;
  res.output = Tensor<T>({B, C, H / 2, W / 2});
  res.argmax.resize(static_cast<size_t>(res.output.numel()));
  int64_t o = 0;
  for (int64_t bc = 0; bc < B * C; ++bc) {
    const T* plane = input.data.data() + bc * H * W;
    int64_t base = bc * H * W;
    for (int64_t oh = 0; oh < H / 2; ++oh)
      for (int64_t ow = 0; ow < W / 2; ++ow, ++o) {
        T best{};
        int64_t best_idx = -1;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int64_t idx = (2 * oh + dy) * W + (2 * ow + dx);
            if (best_idx < 0 || plane[idx] > best) {
              best = plane[idx];
              best_idx = idx;
            }
          }
        res.output[o] = best;
        res.argmax[static_cast<size_t>(o)] = base + best_idx;
      }
  }
  return res;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const std::vector<int64_t>& argmax,
                              const std::vector<int64_t>& input_shape,
                              const Tensor<T>& grad_out) {
  if (argmax.size() != static_cast<size_t>(grad_out.numel()))
    throw ShapeError("maxpool2x2 backward: argmax/grad_out size mismatch");
  Tensor<T> grad_in(input_shape);
  for (size_t i = 0; i < argmax.size(); ++i)
    grad_in[argmax[i]] += grad_out[static_cast<int64_t>(i)];
  return grad_in;
}

template <typename T>
Tensor<T> flatten_forward(const Tensor<T>& input) {
  int64_t rest = input.numel() / input.dim(0);
  Tensor<T> out = input;
  out.shape = {input.dim(0), rest};
  return out;
}

template <typename T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad_logits;
};

// Mean cross-entropy over the batch, stabilized by max subtraction.
// grad = (softmax - onehot) / B.
template <typename T>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                    const std::vector<int32_t>& labels) {
  if (logits.rank() != 2)
    throw ShapeError("logits must be [B,C], got " + logits.shape_str());
  const int64_t B = logits.dim(0), C = logits.dim(1);
  if (static_cast<int64_t>(labels.size()) != B)
    throw ShapeError("labels size " + std::to_string(labels.size()) +
                     " does not match batch size " + std::to_string(B));
  LossResult<T> res;
  res.grad_logits = Tensor<T>(logits.shape);
  double total = 0.0;
  for (int64_t b = 0; b < B; ++b) {
    int32_t y = labels[static_cast<size_t>(b)];
    if (y < 0 || y >= C)
      throw DataError("label " + std::to_string(y) + " out of range [0," +
                      std::to_string(C) + ")");
    const T* row = logits.data.data() + b * C;
    T* grow = res.grad_logits.data.data() + b * C;
    T m = row[0];
    for (int64_t c = 1; c < C; ++c) m = std::max(m, row[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < C; ++c) sum += std::exp(static_cast<double>(row[c] - m));
    double log_sum = std::log(sum);
    total += -(static_cast<double>(row[y] - m) - log_sum);
    for (int64_t c = 0; c < C; ++c) {
      double p = std::exp(static_cast<double>(row[c] - m)) / sum;
      grow[c] = static_cast<T>((p - (c == y ? 1.0 : 0.0)) / static_cast<double>(B));
    }
  }
  res.loss = total / static_cast<double>(B);
  return res;
}

}  // namespace mpt

#endif  // MPT_NN_OPS_HPP
