#ifndef MPT_SUPERMASK_HPP
#define MPT_SUPERMASK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <type_traits>
#include <vector>

#include "mpt/errors.hpp"
#include "mpt/network.hpp"
#include "mpt/powerprop.hpp"
#include "mpt/rng.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

struct SelectionPolicy {
  enum class Method { topk_sort, threshold };
  enum class Scope { global, layerwise };
  Method method = Method::topk_sort;
  Scope scope = Scope::global;
  double prune_ratio = 0.5;  // topk_sort
  double theta = 0.0;        // threshold
  bool calibrate_theta = false;
};

// Raw power-prop score parameters, one tensor per prunable layer.
template <typename T>
struct ScoreState {
  std::vector<Tensor<T>> s;
  double alpha = 1.0;
};

template <typename T>
std::vector<Tensor<T>> effective_scores(const ScoreState<T>& state) {
  std::vector<Tensor<T>> out;
  out.reserve(state.s.size());
  for (const Tensor<T>& t : state.s) out.push_back(powerprop_apply(t, state.alpha));
  return out;
}

namespace detail {

inline int64_t score_fan_in(const LayerSpec& layer) {
  if (layer.kind == LayerKind::conv2d)
    return static_cast<int64_t>(layer.in_channels) * layer.kernel_size * layer.kernel_size;
  if (layer.kind == LayerKind::linear) return layer.in_features;
  throw ConfigError("layer is not prunable");
}

inline std::vector<int64_t> weight_shape(const LayerSpec& layer) {
  if (layer.kind == LayerKind::conv2d)
    return {layer.out_channels, layer.in_channels, layer.kernel_size, layer.kernel_size};
  if (layer.kind == LayerKind::linear)
    return {layer.out_features, layer.in_features};
  throw ConfigError("layer is not prunable");
}

}  // namespace detail

// Scores drawn i.i.d. uniform on [-b, b] with b = sqrt(6 / fan_in), one
// counter-based stream per prunable layer, so the state is fully determined
// by (spec, seed).
template <typename T>
ScoreState<T> init_scores(const NetworkSpec& spec, double alpha, uint64_t seed) {
  check_powerprop_alpha(alpha);
  ScoreState<T> state;
  state.alpha = alpha;
  std::vector<int> prunable = prunable_layer_indices(spec);
  for (size_t j = 0; j < prunable.size(); ++j) {
    const LayerSpec& layer = spec.layers[static_cast<size_t>(prunable[j])];
    double bound = std::sqrt(6.0 / static_cast<double>(detail::score_fan_in(layer)));
    Tensor<T> s(detail::weight_shape(layer));
    CounterRng rng(seed, rng_stream::kScores + j);
    bool pos = false, neg = false;
    for (int64_t i = 0; i < s.numel(); ++i) {
      s[i] = static_cast<T>(rng.uniform(-bound, bound));
      pos |= s[i] > T{0};
      neg |= s[i] < T{0};
    }
    if (s.numel() >= 32 && !(pos && neg))
      throw ConfigError("score initialization produced a single-signed layer");
    state.s.push_back(std::move(s));
  }
  return state;
}

// ----- mask selection -----

using Masks = std::vector<Tensor<uint8_t>>;

namespace detail {

// Keep exactly `keep` entries with the largest values across the given
// tensors; among entries equal to the cutoff value, higher flat index (and
// higher layer index) wins, i.e. the lowest-indexed ties are pruned first.
template <typename T>
void keep_largest(const std::vector<const Tensor<T>*>& scores,
                  std::vector<Tensor<uint8_t>*>& masks, int64_t keep,
                  int64_t total) {
  if (keep >= total) {
    for (Tensor<uint8_t>* m : masks) std::fill(m->data.begin(), m->data.end(), uint8_t{1});
    return;
  }
  std::vector<T> scratch;
  scratch.reserve(static_cast<size_t>(total));
  for (const Tensor<T>* s : scores)
    scratch.insert(scratch.end(), s->data.begin(), s->data.end());
  std::nth_element(scratch.begin(), scratch.begin() + (keep - 1), scratch.end(),
                   std::greater<T>());
  T cutoff = scratch[static_cast<size_t>(keep - 1)];

  int64_t greater = 0;
  for (const Tensor<T>* s : scores)
    for (int64_t i = 0; i < s->numel(); ++i)
      if ((*s)[i] > cutoff) ++greater;
  int64_t ties_to_keep = keep - greater;

  for (size_t l = 0; l < scores.size(); ++l)
    for (int64_t i = 0; i < scores[l]->numel(); ++i)
      (*masks[l])[i] = (*scores[l])[i] > cutoff ? 1 : 0;
  for (size_t l = scores.size(); l-- > 0 && ties_to_keep > 0;)
    for (int64_t i = scores[l]->numel(); i-- > 0 && ties_to_keep > 0;)
      if ((*scores[l])[i] == cutoff) {
        (*masks[l])[i] = 1;
        --ties_to_keep;
      }
}

}  // namespace detail

// Sort-based selection: prunes exactly floor(p * population) entries, where
// the population is the whole network (global) or each layer (layerwise).
// Depends on the scores only through their ordering.
template <typename T>
Masks select_mask_topk(const std::vector<Tensor<T>>& scores, double prune_ratio,
                       SelectionPolicy::Scope scope) {
  if (!(prune_ratio >= 0.0 && prune_ratio < 1.0))
    throw ConfigError("prune ratio must lie in [0,1), got " + std::to_string(prune_ratio));
  Masks masks;
  masks.reserve(scores.size());
  for (const Tensor<T>& s : scores) masks.emplace_back(Tensor<uint8_t>(s.shape));

  if (scope == SelectionPolicy::Scope::layerwise) {
    for (size_t l = 0; l < scores.size(); ++l) {
      int64_t n = scores[l].numel();
      int64_t keep = n - static_cast<int64_t>(std::floor(prune_ratio * static_cast<double>(n)));
      std::vector<const Tensor<T>*> sv{&scores[l]};
      std::vector<Tensor<uint8_t>*> mv{&masks[l]};
      detail::keep_largest(sv, mv, keep, n);
    }
  } else {
    int64_t total = 0;
    std::vector<const Tensor<T>*> sv;
    std::vector<Tensor<uint8_t>*> mv;
    for (size_t l = 0; l < scores.size(); ++l) {
      total += scores[l].numel();
      sv.push_back(&scores[l]);
      mv.push_back(&masks[l]);
    }
    int64_t keep = total - static_cast<int64_t>(std::floor(prune_ratio * static_cast<double>(total)));
    detail::keep_largest(sv, mv, keep, total);
  }
  return masks;
}

template <typename T>
struct ThresholdSelection {
  Masks masks;
  int64_t pruned = 0;
  int64_t total = 0;
  double achieved_prune_ratio() const {
    return total ? static_cast<double>(pruned) / static_cast<double>(total) : 0.0;
  }
};

// Single-pass selection: keep iff S > theta (strict), no ordering involved.
// The achieved prune ratio is emergent and reported alongside the masks.
template <typename T>
ThresholdSelection<T> select_mask_threshold(const std::vector<Tensor<T>>& scores,
                                            const std::vector<T>& thetas) {
  if (thetas.size() != scores.size())
    throw ConfigError("one threshold per layer required");
  ThresholdSelection<T> res;
  res.masks.reserve(scores.size());
  for (size_t l = 0; l < scores.size(); ++l) {
    Tensor<uint8_t> m(scores[l].shape);
    for (int64_t i = 0; i < scores[l].numel(); ++i) {
      m[i] = scores[l][i] > thetas[l] ? 1 : 0;
      res.pruned += m[i] ? 0 : 1;
    }
    res.total += scores[l].numel();
    res.masks.push_back(std::move(m));
  }
  return res;
}

template <typename T>
ThresholdSelection<T> select_mask_threshold(const std::vector<Tensor<T>>& scores,
                                            T theta) {
  return select_mask_threshold(scores, std::vector<T>(scores.size(), theta));
}

namespace detail {

template <typename T>
T quantile_theta(std::vector<T>& scratch, int64_t keep) {
  int64_t n = static_cast<int64_t>(scratch.size());
  if (keep >= n) return -std::numeric_limits<T>::infinity();
  // (keep+1)-th largest value: strict comparison then keeps exactly the top
  // `keep` entries whenever the scores are distinct.
  std::nth_element(scratch.begin(), scratch.begin() + keep, scratch.end(),
                   std::greater<T>());
  return scratch[static_cast<size_t>(keep)];
}

}  // namespace detail

// One-time calibration reconciling thresholding with a target prune ratio:
// theta is set to the p-quantile of the current scores and never updated.
template <typename T>
T calibrate_theta_global(const std::vector<Tensor<T>>& scores, double prune_ratio) {
  if (!(prune_ratio >= 0.0 && prune_ratio < 1.0))
    throw ConfigError("prune ratio must lie in [0,1), got " + std::to_string(prune_ratio));
  std::vector<T> scratch;
  int64_t total = 0;
  for (const Tensor<T>& s : scores) total += s.numel();
  scratch.reserve(static_cast<size_t>(total));
  for (const Tensor<T>& s : scores)
    scratch.insert(scratch.end(), s.data.begin(), s.data.end());
  int64_t keep = total - static_cast<int64_t>(std::floor(prune_ratio * static_cast<double>(total)));
  return detail::quantile_theta(scratch, keep);
}

template <typename T>
std::vector<T> calibrate_theta_layerwise(const std::vector<Tensor<T>>& scores,
                                         double prune_ratio) {
  if (!(prune_ratio >= 0.0 && prune_ratio < 1.0))
    throw ConfigError("prune ratio must lie in [0,1), got " + std::to_string(prune_ratio));
  std::vector<T> thetas;
  for (const Tensor<T>& s : scores) {
    std::vector<T> scratch(s.data.begin(), s.data.end());
    int64_t n = s.numel();
    int64_t keep = n - static_cast<int64_t>(std::floor(prune_ratio * static_cast<double>(n)));
    thetas.push_back(detail::quantile_theta(scratch, keep));
  }
  return thetas;
}

// ----- binarization -----

template <typename T>
struct Binarized {
  T scale = 0;       // per-layer magnitude, mean |W| over kept entries
  Tensor<T> values;  // scale * sign(W), defined on every entry
};

// Per-layer binarization: scale = ||M (.) W||_1 / ||M||_1 and
// W_b = scale * sign(W), with sign(0) := +1.
template <typename T>
Binarized<T> binarize_layer(const Tensor<T>& weights, const Tensor<uint8_t>& mask) {
  if (weights.shape != mask.shape)
    throw ShapeError("binarize_layer: weight shape " + weights.shape_str() +
                     " does not match mask shape " + mask.shape_str());
  int64_t kept = 0;
  double sum = 0.0;
  if constexpr (std::is_same_v<T, double>) {
    // Compensated summation keeps the mean exact to ~1 ulp regardless of n.
    double c = 0.0;
    for (int64_t i = 0; i < weights.numel(); ++i) {
      if (!mask[i]) continue;
      ++kept;
      double y = std::abs(weights[i]) - c;
      double t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
  } else {
    for (int64_t i = 0; i < weights.numel(); ++i) {
      if (!mask[i]) continue;
      ++kept;
      sum += static_cast<double>(std::abs(weights[i]));
    }
  }
  if (kept == 0) throw ConfigError("layer fully pruned: binarization scale undefined");

  Binarized<T> out;
  out.scale = static_cast<T>(sum / static_cast<double>(kept));
  out.values = Tensor<T>(weights.shape);
  for (int64_t i = 0; i < weights.numel(); ++i)
    out.values[i] = weights[i] < T{0} ? -out.scale : out.scale;
  return out;
}

// Latent weights with their mask, scale and binarized values.
template <typename T>
struct MaskedBinaryLayer {
  Tensor<T> weights;
  Tensor<uint8_t> mask;
  T scale = 0;
  Tensor<T> binarized;
};

template <typename T>
MaskedBinaryLayer<T> make_masked_binary_layer(Tensor<T> weights, Tensor<uint8_t> mask) {
  Binarized<T> b = binarize_layer(weights, mask);
  return MaskedBinaryLayer<T>{std::move(weights), std::move(mask), b.scale,
                              std::move(b.values)};
}

// W_b (.) M — the only weight tensor the forward passes see in MPT mode.
template <typename T>
Tensor<T> effective_weights(const Tensor<T>& binarized, const Tensor<uint8_t>& mask) {
  if (binarized.shape != mask.shape)
    throw ShapeError("effective_weights: shape mismatch " + binarized.shape_str() +
                     " vs " + mask.shape_str());
  Tensor<T> out(binarized.shape);
  for (int64_t i = 0; i < binarized.numel(); ++i)
    out[i] = mask[i] ? binarized[i] : T{0};
  return out;
}

template <typename T>
Tensor<T> effective_weights(const MaskedBinaryLayer<T>& layer) {
  return effective_weights(layer.binarized, layer.mask);
}

// Straight-through score gradient: the mask is treated as identity in the
// backward pass, so pruned positions keep receiving gradient.
template <typename T>
Tensor<T> score_gradient(const Tensor<T>& grad_eff, const Tensor<T>& binarized) {
  require_same_shape(grad_eff, binarized, "score_gradient");
  Tensor<T> out(grad_eff.shape);
  for (int64_t i = 0; i < grad_eff.numel(); ++i)
    out[i] = grad_eff[i] * binarized[i];
  return out;
}

}  // namespace mpt

#endif  // MPT_SUPERMASK_HPP
