#include "greedynet/adam.hpp"

#include "greedynet/errors.hpp"

#include <cmath>

namespace greedynet {

void AdamConfig::validate() const {
  if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(eps > 0.0)) {
    throw ValidationError("adam: need lr > 0, beta in [0, 1) and eps > 0");
  }
  if (!(decay_factor > 0.0) || decay_every < 0) {
    throw ValidationError("adam: invalid lr decay");
  }
}

Adam::Adam(AdamConfig cfg, std::span<const Matrix* const> params) : cfg_(cfg), lr_(cfg.lr) {
  cfg_.validate();
  for (const Matrix* p : params) {
    m_.push_back(Matrix::Zero(p->rows(), p->cols()));
    v_.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeMismatch("adam: parameter count changed");
  }
  for (std::size_t k = 0; k < m_.size(); ++k) {
    if (params[k]->rows() != m_[k].rows() || params[k]->cols() != m_[k].cols() ||
        grads[k]->rows() != m_[k].rows() || grads[k]->cols() != m_[k].cols()) {
      throw ShapeMismatch("adam: tensor " + std::to_string(k) + " changed shape");
    }
  }
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  for (std::size_t k = 0; k < m_.size(); ++k) {
    const Matrix& g = *grads[k];
    m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * g;
    v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * g.cwiseAbs2();
    params[k]->array() -=
        lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + cfg_.eps);
  }
}

void Adam::end_epoch() {
  ++epochs_;
  if (cfg_.decay_every > 0 && epochs_ % cfg_.decay_every == 0) {
    lr_ *= cfg_.decay_factor;
  }
}

} // namespace greedynet
