#ifndef MPT_OPTIMIZER_HPP
#define MPT_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "mpt/errors.hpp"
#include "mpt/tensor.hpp"

namespace mpt {

enum class OptimizerKind { sgd, adam };
enum class LrSchedule { multistep, cosine, constant };

// Per-epoch learning rate. multistep decays by 10x at 50% and 75% of the
// epoch budget; cosine anneals from base_lr to 0.
inline double lr_at(LrSchedule schedule, double base_lr, int epoch, int total_epochs) {
  if (epoch < 0 || epoch > total_epochs)
    throw ConfigError("epoch " + std::to_string(epoch) + " outside [0," +
                      std::to_string(total_epochs) + "]");
  switch (schedule) {
    case LrSchedule::constant:
      return base_lr;
    case LrSchedule::cosine:
      return base_lr * 0.5 *
             (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                             static_cast<double>(total_epochs)));
    case LrSchedule::multistep: {
      double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs);
      int passed = (frac >= 0.5 ? 1 : 0) + (frac >= 0.75 ? 1 : 0);
      return base_lr * std::pow(0.1, passed);
    }
  }
  throw ConfigError("unknown lr schedule");
}

// Optimizer slots for one group of parameter tensors.
template <typename T>
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::sgd;
  std::vector<Tensor<T>> velocity;  // sgd momentum
  std::vector<Tensor<T>> m, v;      // adam moments
  int64_t step = 0;                 // adam timestep (shared across tensors)

  static OptimizerState make(OptimizerKind kind, const std::vector<const Tensor<T>*>& params) {
    OptimizerState st;
    st.kind = kind;
    for (const Tensor<T>* p : params) {
      if (kind == OptimizerKind::sgd) {
        st.velocity.emplace_back(Tensor<T>(p->shape));
      } else {
        st.m.emplace_back(Tensor<T>(p->shape));
        st.v.emplace_back(Tensor<T>(p->shape));
      }
    }
    return st;
  }
};

// v <- mu*v + g ; p <- p - lr*v, with decoupled-from-nothing classic L2:
// g includes weight_decay * p.
template <typename T>
void sgd_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& velocity,
              double lr, double momentum, double weight_decay) {
  require_same_shape(param, grad, "sgd_step");
  for (int64_t i = 0; i < param.numel(); ++i) {
    T g = grad[i] + static_cast<T>(weight_decay) * param[i];
    velocity[i] = static_cast<T>(momentum) * velocity[i] + g;
    param[i] -= static_cast<T>(lr) * velocity[i];
  }
}

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m, Tensor<T>& v,
               int64_t step, double lr, double weight_decay) {
  require_same_shape(param, grad, "adam_step");
  double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (int64_t i = 0; i < param.numel(); ++i) {
    double g = static_cast<double>(grad[i]) + weight_decay * static_cast<double>(param[i]);
    double mi = kAdamBeta1 * static_cast<double>(m[i]) + (1.0 - kAdamBeta1) * g;
    double vi = kAdamBeta2 * static_cast<double>(v[i]) + (1.0 - kAdamBeta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    double mhat = mi / bc1;
    double vhat = vi / bc2;
    param[i] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + kAdamEps));
  }
}

// Steps one parameter group (tensor j of the state) with the configured rule.
template <typename T>
void optimizer_step(OptimizerState<T>& state, size_t j, Tensor<T>& param,
                    const Tensor<T>& grad, double lr, double momentum,
                    double weight_decay) {
  if (state.kind == OptimizerKind::sgd)
    sgd_step(param, grad, state.velocity.at(j), lr, momentum, weight_decay);
  else
    adam_step(param, grad, state.m.at(j), state.v.at(j), state.step, lr, weight_decay);
}

}  // namespace mpt

#endif  // MPT_OPTIMIZER_HPP
