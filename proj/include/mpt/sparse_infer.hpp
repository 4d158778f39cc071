#ifndef MPT_SPARSE_INFER_HPP
#define MPT_SPARSE_INFER_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "mpt/engine.hpp"
#include "mpt/errors.hpp"
#include "mpt/model.hpp"
#include "mpt/network.hpp"
#include "mpt/nn_ops.hpp"
#include "mpt/sparsity.hpp"

// Kernel-skipping execution of a masked binarized checkpoint: conv layers
// store only their surviving kernels (a kernel whose mask slice is all zero
// is dropped from the computation graph); linear layers stay dense. The
// direct-convolution loop nest is identical whether or not kernels were
// dropped, so a model compacted with keep_zero_kernels reproduces the sparse
// path bit-for-bit and serves as the dense baseline.

namespace mpt {

template <typename T>
struct CompactConv {
  int layer_id = 0;
  int in_channels = 0, out_channels = 0, kernel_size = 0, stride = 1, padding = 0;
  std::vector<int32_t> offsets;  // per out channel, index range into the kernel list
  std::vector<int32_t> in_ch;    // surviving kernel -> input channel
  std::vector<T> values;         // k*k effective values per surviving kernel
  int64_t stored_kernels() const { return static_cast<int64_t>(in_ch.size()); }
};

template <typename T>
struct CompactModel {
  NetworkSpec spec;
  std::vector<CompactConv<T>> conv;      // prunable conv layers, in order
  std::vector<Tensor<T>> linear;         // effective weights of linear layers
};

template <typename T>
CompactModel<T> compact_model(const Checkpoint<T>& ckpt, bool keep_zero_kernels = false) {
  CompactModel<T> model;
  model.spec = ckpt.spec;
  for (const PrunableTensor<T>& p : ckpt.prunable) {
    const LayerSpec& l = ckpt.spec.layers[static_cast<size_t>(p.layer_index)];
    Binarized<T> bin = binarize_layer(p.weights, p.mask);
    Tensor<T> eff = effective_weights(bin.values, p.mask);
    if (l.kind == LayerKind::linear) {
      model.linear.push_back(std::move(eff));
      continue;
    }
    CompactConv<T> cc;
    cc.layer_id = p.layer_index;
    cc.in_channels = l.in_channels;
    cc.out_channels = l.out_channels;
    cc.kernel_size = l.kernel_size;
    cc.stride = l.stride;
    cc.padding = l.padding;
    const int64_t kk = static_cast<int64_t>(l.kernel_size) * l.kernel_size;
    cc.offsets.push_back(0);
    for (int m = 0; m < l.out_channels; ++m) {
      for (int n = 0; n < l.in_channels; ++n) {
        int64_t base = (static_cast<int64_t>(m) * l.in_channels + n) * kk;
        bool all_zero = true;
        for (int64_t i = 0; i < kk; ++i)
          if (p.mask[base + i]) {
            all_zero = false;
            break;
          }
        if (all_zero && !keep_zero_kernels) continue;
        cc.in_ch.push_back(n);
        for (int64_t i = 0; i < kk; ++i) cc.values.push_back(eff[base + i]);
      }
      cc.offsets.push_back(static_cast<int32_t>(cc.in_ch.size()));
    }
    model.conv.push_back(std::move(cc));
  }
  return model;
}

// Reconstructs the dense effective weight tensors (zero-filled where kernels
// were dropped), in prunable-layer order.
template <typename T>
std::vector<Tensor<T>> densify(const CompactModel<T>& model) {
  std::vector<Tensor<T>> out;
  size_t conv_i = 0, lin_i = 0;
  for (const LayerSpec& l : model.spec.layers) {
    if (l.kind == LayerKind::linear) {
      out.push_back(model.linear.at(lin_i++));
    } else if (l.kind == LayerKind::conv2d) {
      const CompactConv<T>& cc = model.conv.at(conv_i++);
      Tensor<T> w({l.out_channels, l.in_channels, l.kernel_size, l.kernel_size});
      const int64_t kk = static_cast<int64_t>(l.kernel_size) * l.kernel_size;
      for (int m = 0; m < cc.out_channels; ++m)
        for (int32_t kidx = cc.offsets[static_cast<size_t>(m)];
             kidx < cc.offsets[static_cast<size_t>(m) + 1]; ++kidx) {
          int64_t base = (static_cast<int64_t>(m) * cc.in_channels + cc.in_ch[static_cast<size_t>(kidx)]) * kk;
          for (int64_t i = 0; i < kk; ++i)
            w[base + i] = cc.values[static_cast<size_t>(kidx) * kk + i];
        }
      out.push_back(std::move(w));
    }
  }
  return out;
}

namespace detail {

// Direct convolution over the surviving-kernel list. Per output element the
// products accumulate in (kernel, kh, kw) order.
template <typename T>
Tensor<T> compact_conv_forward(const CompactConv<T>& cc, const Tensor<T>& input) {
  if (input.rank() != 4 || input.dim(1) != cc.in_channels)
    throw ShapeError("compact conv input mismatch: got " + input.shape_str() +
                     ", expected " + std::to_string(cc.in_channels) + " channels");
  const int B = static_cast<int>(input.dim(0));
  const int H = static_cast<int>(input.dim(2)), W = static_cast<int>(input.dim(3));
  const int k = cc.kernel_size;
  const int OH = conv_out_extent_checked(H, k, cc.stride, cc.padding);
  const int OW = conv_out_extent_checked(W, k, cc.stride, cc.padding);
  Tensor<T> out({B, cc.out_channels, OH, OW});
  const int64_t in_plane = static_cast<int64_t>(H) * W;
  const int64_t out_plane = static_cast<int64_t>(OH) * OW;
  for (int b = 0; b < B; ++b) {
    const T* in_base = input.data.data() + static_cast<int64_t>(b) * cc.in_channels * in_plane;
    T* out_base = out.data.data() + static_cast<int64_t>(b) * cc.out_channels * out_plane;
    for (int m = 0; m < cc.out_channels; ++m) {
      T* oplane = out_base + static_cast<int64_t>(m) * out_plane;
      for (int32_t kidx = cc.offsets[static_cast<size_t>(m)];
           kidx < cc.offsets[static_cast<size_t>(m) + 1]; ++kidx) {
        const T* kv = cc.values.data() + static_cast<int64_t>(kidx) * k * k;
        const T* iplane = in_base + static_cast<int64_t>(cc.in_ch[static_cast<size_t>(kidx)]) * in_plane;
        for (int oh = 0; oh < OH; ++oh) {
          int ih0 = oh * cc.stride - cc.padding;
          for (int ow = 0; ow < OW; ++ow) {
            int iw0 = ow * cc.stride - cc.padding;
            T acc{};
            for (int kh = 0; kh < k; ++kh) {
              int ih = ih0 + kh;
              if (ih < 0 || ih >= H) continue;
              for (int kw = 0; kw < k; ++kw) {
                int iw = iw0 + kw;
                if (iw < 0 || iw >= W) continue;
                acc += kv[kh * k + kw] * iplane[static_cast<int64_t>(ih) * W + iw];
              }
            }
            oplane[static_cast<int64_t>(oh) * OW + ow] += acc;
          }
        }
      }
    }
  }
  return out;
}

}  // namespace detail

template <typename T>
Tensor<T> sparse_forward(const CompactModel<T>& model, Tensor<T> input) {
  if (input.rank() != 4)
    throw ShapeError("input must be [B,C,H,W], got " + input.shape_str());
  std::vector<int64_t> expect = model.spec.input_shape;
  if (input.dim(1) != expect[0] || input.dim(2) != expect[1] || input.dim(3) != expect[2])
    throw ShapeError("input " + input.shape_str() + " does not match network input " +
                     Tensor<T>::shape_str(expect));
  size_t conv_i = 0, lin_i = 0;
  for (const LayerSpec& l : model.spec.layers) {
    switch (l.kind) {
      case LayerKind::conv2d:
        input = detail::compact_conv_forward(model.conv.at(conv_i++), input);
        break;
      case LayerKind::linear:
        input = linear_forward(input, model.linear.at(lin_i++));
        break;
      case LayerKind::relu:
        input = relu_forward(input);
        break;
      case LayerKind::maxpool2x2:
        input = maxpool2x2_forward(input).output;
        break;
      case LayerKind::flatten:
        input = flatten_forward(input);
        break;
    }
  }
  return input;
}

// Exact conv MAC count of a compact model: each stored kernel contributes
// D*D*k*k where D is that layer's output extent.
template <typename T>
uint64_t conv_mac_count(const CompactModel<T>& model) {
  std::vector<int64_t> d_sizes = conv_feature_map_sizes(model.spec);
  uint64_t macs = 0;
  for (size_t i = 0; i < model.conv.size(); ++i) {
    const CompactConv<T>& cc = model.conv[i];
    uint64_t dd = static_cast<uint64_t>(d_sizes[i]) * static_cast<uint64_t>(d_sizes[i]);
    uint64_t kk = static_cast<uint64_t>(cc.kernel_size) * cc.kernel_size;
    macs += static_cast<uint64_t>(cc.stored_kernels()) * dd * kk;
  }
  return macs;
}

inline uint64_t dense_conv_mac_count(const NetworkSpec& spec) {
  std::vector<int64_t> d_sizes = conv_feature_map_sizes(spec);
  uint64_t macs = 0;
  size_t conv_i = 0;
  for (const LayerSpec& l : spec.layers)
    if (l.kind == LayerKind::conv2d) {
      uint64_t dd = static_cast<uint64_t>(d_sizes[conv_i]) * static_cast<uint64_t>(d_sizes[conv_i]);
      ++conv_i;
      macs += static_cast<uint64_t>(l.out_channels) * l.in_channels * dd *
              static_cast<uint64_t>(l.kernel_size) * l.kernel_size;
    }
  return macs;
}

struct BenchResult {
  double dense_ns = 0;
  double sparse_ns = 0;
  double speedup = 1.0;
  double theoretical_ar = 1.0;
  uint64_t macs_dense = 0;
  uint64_t macs_sparse = 0;
};

namespace detail {

template <typename F>
double median_run_ns(F&& run, int repeats) {
  std::vector<double> times;
  times.reserve(static_cast<size_t>(repeats));
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    run();
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  size_t n = times.size();
  return n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

}  // namespace detail

// Median wall time over `repeats` single-thread runs of each model on the
// same input, after warmup.
template <typename T>
BenchResult bench_inference(const CompactModel<T>& dense, const CompactModel<T>& sparse,
                            const Tensor<T>& input, int repeats) {
  if (repeats < 10)
    throw ConfigError("bench repeats must be >= 10, got " + std::to_string(repeats));
  volatile T sink{};
  auto run_dense = [&] { sink = sparse_forward(dense, input)[0]; };
  auto run_sparse = [&] { sink = sparse_forward(sparse, input)[0]; };
  run_dense();
  run_sparse();  // warmup
  BenchResult res;
  res.dense_ns = detail::median_run_ns(run_dense, repeats);
  res.sparse_ns = detail::median_run_ns(run_sparse, repeats);
  res.speedup = res.dense_ns / res.sparse_ns;
  res.macs_dense = conv_mac_count(dense);
  res.macs_sparse = conv_mac_count(sparse);
  res.theoretical_ar = static_cast<double>(res.macs_dense) / static_cast<double>(res.macs_sparse);
  (void)sink;
  return res;
}

}  // namespace mpt

#endif  // MPT_SPARSE_INFER_HPP
