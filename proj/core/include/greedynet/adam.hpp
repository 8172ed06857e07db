#pragma once

#include "greedynet/linalg.hpp"

#include <span>
#include <vector>

namespace greedynet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Multiply lr by decay_factor after every decay_every epochs (0 = never).
  double decay_factor = 1.0;
  Index decay_every = 0;

  void validate() const;
};

/// ADAM with bias correction over a fixed list of parameter tensors.
class Adam {
public:
  Adam(AdamConfig cfg, std::span<const Matrix* const> params);

  /// params[k] -= lr·m̂/(√v̂ + ε). Throws ShapeMismatch on any shape change.
  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);
  /// Advances the epoch counter and applies the lr schedule.
  void end_epoch();

  double learning_rate() const { return lr_; }
  Index steps() const { return steps_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

private:
  AdamConfig cfg_;
  double lr_;
  Index steps_ = 0;
  Index epochs_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

} // namespace greedynet
