#ifndef MPT_TEST_SUPPORT_HPP
#define MPT_TEST_SUPPORT_HPP

// Shared oracles for the test suites. Everything here is independent of the
// library's execution paths: the convolution reference is a plain 6-loop
// nest, and gradients are checked against central finite differences.

#include <cmath>
#include <functional>
#include <vector>

#include "mpt/model.hpp"
#include "mpt/rng.hpp"
#include "mpt/supermask.hpp"
#include "mpt/tensor.hpp"

namespace mpt_test {

using mpt::CounterRng;
using mpt::Tensor;

template <typename T>
Tensor<T> random_tensor(std::vector<int64_t> shape, CounterRng& rng, double lo = -1.0,
                        double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

// Plain 6-loop cross-correlation, no lowering.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& input, const Tensor<T>& weight, int stride,
                       int pad) {
  const int64_t B = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
  const int64_t M = weight.dim(0), k = weight.dim(2);
  const int64_t OH = (H + 2 * pad - k) / stride + 1;
  const int64_t OW = (W + 2 * pad - k) / stride + 1;
  Tensor<T> out({B, M, OH, OW});
  for (int64_t b = 0; b < B; ++b)
    for (int64_t m = 0; m < M; ++m)
      for (int64_t oh = 0; oh < OH; ++oh)
        for (int64_t ow = 0; ow < OW; ++ow) {
          T acc{};
          for (int64_t c = 0; c < C; ++c)
            for (int64_t kh = 0; kh < k; ++kh)
              for (int64_t kw = 0; kw < k; ++kw) {
                int64_t ih = oh * stride - pad + kh;
                int64_t iw = ow * stride - pad + kw;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                acc += weight[((m * C + c) * k + kh) * k + kw] *
                       input[((b * C + c) * H + ih) * W + iw];
              }
          out[((b * M + m) * OH + oh) * OW + ow] = acc;
        }
  return out;
}

// Relative error with a floor so near-zero gradients are compared absolutely
// at the finite-difference noise scale.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

// Central finite differences of scalar(x) w.r.t. every element of x.
template <typename T>
Tensor<T> finite_diff(Tensor<T>& x, const std::function<double()>& scalar,
                      double step = 1e-5) {
  Tensor<T> grad(x.shape);
  for (int64_t i = 0; i < x.numel(); ++i) {
    T saved = x[i];
    x[i] = saved + static_cast<T>(step);
    double up = scalar();
    x[i] = saved - static_cast<T>(step);
    double down = scalar();
    x[i] = saved;
    grad[i] = static_cast<T>((up - down) / (2.0 * step));
  }
  return grad;
}

template <typename T>
double max_rel_err(const Tensor<T>& a, const Tensor<T>& b) {
  double worst = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i)
    worst = std::max(worst, rel_err(static_cast<double>(a[i]), static_cast<double>(b[i])));
  return worst;
}

// Random model state at an exact sparsity: masks from layerwise top-k
// selection over i.i.d. random scores (layerwise keeps every layer alive).
template <typename T>
mpt::Checkpoint<T> random_checkpoint(const mpt::NetworkSpec& spec, uint64_t seed,
                                     double prune_ratio) {
  mpt::Checkpoint<T> ckpt = mpt::init_checkpoint<T>(spec, 1.0, seed);
  if (prune_ratio > 0.0) {
    std::vector<Tensor<T>> scores;
    for (auto& p : ckpt.prunable) scores.push_back(p.scores);
    mpt::Masks masks =
        mpt::select_mask_topk(scores, prune_ratio, mpt::SelectionPolicy::Scope::layerwise);
    for (size_t j = 0; j < ckpt.prunable.size(); ++j) {
      ckpt.prunable[j].mask = std::move(masks[j]);
      ckpt.prunable[j].scale =
          mpt::binarize_layer(ckpt.prunable[j].weights, ckpt.prunable[j].mask).scale;
    }
  }
  return ckpt;
}

}  // namespace mpt_test

#endif  // MPT_TEST_SUPPORT_HPP
