#ifndef MPT_POWERPROP_HPP
#define MPT_POWERPROP_HPP

#include <cmath>

#include "mpt/errors.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

// Power-propagation reparameterization of importance scores: the effective
// score is S = s * |s|^(alpha-1), an odd, monotone map of the raw parameter.
// Integer exponents get closed-form specializations; alpha = 1 is exactly
// the identity, so that pipeline reduces bit-for-bit to plain score training.

inline void check_powerprop_alpha(double alpha) {
  if (!(alpha >= 1.0))
    throw ConfigError("powerprop exponent must satisfy alpha >= 1, got " +
                      std::to_string(alpha));
}

template <typename T>
Tensor<T> powerprop_apply(const Tensor<T>& s, double alpha) {
  check_powerprop_alpha(alpha);
  Tensor<T> out(s.shape);
  if (alpha == 1.0) {
    out.data = s.data;
  } else if (alpha == 2.0) {
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = s[i] * std::abs(s[i]);
  } else if (alpha == 3.0) {
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = s[i] * (s[i] * s[i]);
  } else {
    T e = static_cast<T>(alpha - 1.0);
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = s[i] * std::pow(std::abs(s[i]), e);
  }
  return out;
}

// Chain-rule factor of the reparameterization: gs = gS * alpha * |s|^(alpha-1).
// For alpha > 1 this vanishes at s = 0 and in a neighborhood of it.
template <typename T>
Tensor<T> powerprop_grad(const Tensor<T>& s, const Tensor<T>& grad_S, double alpha) {
  check_powerprop_alpha(alpha);
  require_same_shape(s, grad_S, "powerprop_grad");
  Tensor<T> out(s.shape);
  if (alpha == 1.0) {
    out.data = grad_S.data;
  } else if (alpha == 2.0) {
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = grad_S[i] * T{2} * std::abs(s[i]);
  } else if (alpha == 3.0) {
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = grad_S[i] * T{3} * (s[i] * s[i]);
  } else {
    T a = static_cast<T>(alpha);
    T e = static_cast<T>(alpha - 1.0);
    for (int64_t i = 0; i < s.numel(); ++i)
      out[i] = grad_S[i] * a * std::pow(std::abs(s[i]), e);
  }
  return out;
}

}  // namespace mpt

#endif  // MPT_POWERPROP_HPP
