#include "greedynet/losses.hpp"

#include "greedynet/errors.hpp"

#include <cmath>
#include <string>

namespace greedynet {

namespace {

// Plain sequential dot product; keeps results independent of vectorization.
double dot(const Matrix& d, Index a, Index b) {
  double acc = 0.0;
  for (Index r = 0; r < d.rows(); ++r) {
    acc += d(r, a) * d(r, b);
  }
  return acc;
}

} // namespace

CoherencePair coherence_pair(const Matrix& dict) {
  const Index m = dict.cols();
  if (m < 2) {
    throw ValidationError("mutual coherence needs at least two atoms");
  }
  std::vector<double> norms(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    norms[static_cast<std::size_t>(i)] = std::sqrt(dot(dict, i, i));
    if (!(norms[static_cast<std::size_t>(i)] > 0.0)) {
      throw ZeroAtom("mutual coherence: atom " + std::to_string(i) + " has zero norm");
    }
  }
  CoherencePair best{-1.0, 0, 1};
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const double c = std::abs(dot(dict, i, j)) /
                       (norms[static_cast<std::size_t>(i)] * norms[static_cast<std::size_t>(j)]);
      if (c > best.value) {
        best = {c, i, j};
      }
    }
  }
  return best;
}

double mutual_coherence(const Matrix& dict) { return coherence_pair(dict).value; }

Matrix mutual_coherence_gradient(const Matrix& dict) {
  const CoherencePair pair = coherence_pair(dict);
  Matrix grad = Matrix::Zero(dict.rows(), dict.cols());
  const auto di = dict.col(pair.i);
  const auto dj = dict.col(pair.j);
  const double g = di.dot(dj);
  const double ni = di.norm();
  const double nj = dj.norm();
  const double sgn = (g > 0.0) - (g < 0.0);
  // μ = |g| / (‖d_i‖‖d_j‖).
  grad.col(pair.i) = sgn * dj / (ni * nj) - pair.value * di / (ni * ni);
  grad.col(pair.j) = sgn * di / (ni * nj) - pair.value * dj / (nj * nj);
  return grad;
}

void LossConfig::validate() const {
  if (!(xi >= 0.0) || !std::isfinite(xi)) {
    throw ValidationError("coherence coefficient xi must be finite and non-negative");
  }
}

LossResult loss(const Matrix& outputs, const Matrix& targets,
                std::span<const Matrix* const> dicts, const LossConfig& cfg) {
  cfg.validate();
  if (outputs.cols() == 0) {
    throw EmptyBatch("loss: empty batch");
  }
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw ShapeMismatch("loss: outputs and targets differ in shape");
  }
  LossResult res;
  const Matrix diff = targets - outputs;
  res.squared_error = diff.squaredNorm();
  if (cfg.kind == LossKind::SumL2) {
    res.value = res.squared_error;
    res.output_grad = -2.0 * diff;
  } else {
    res.value = std::log(res.squared_error);
    res.output_grad = -2.0 * diff / res.squared_error;
  }
  for (const Matrix* d : dicts) {
    if (cfg.xi > 0.0) {
      res.coherence += mutual_coherence(*d);
      res.dict_grads.push_back(cfg.xi * mutual_coherence_gradient(*d));
    } else {
      res.dict_grads.push_back(Matrix::Zero(d->rows(), d->cols()));
    }
  }
  res.value += cfg.xi * res.coherence;
  return res;
}

} // namespace greedynet
