#include "greedynet/attention.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/random.hpp"

#include <cmath>
#include <string>

namespace greedynet {

namespace {

Matrix gaussian(Index rows, Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = stddev * standard_normal(rng);
    }
  }
  return m;
}

} // namespace

Index AttentionParams::parameter_count() const {
  Index count = w_out.size();
  for (const auto& blk : blocks) {
    count += blk.w1.size() + blk.w2.size() + blk.b.size();
  }
  return count;
}

AttentionParams AttentionParams::zeros(Index signal_dim, Index layers) {
  AttentionParams p;
  for (auto& blk : p.blocks) {
    blk.w1 = Matrix::Zero(signal_dim, signal_dim);
    blk.w2 = Matrix::Zero(layers, layers);
    blk.b = Matrix::Zero(layers, 1);
  }
  p.w_out = Matrix::Zero(signal_dim, 1);
  return p;
}

AttentionParams AttentionParams::initial(Index signal_dim, Index layers, std::uint64_t seed) {
  Rng rng(seed);
  AttentionParams p = zeros(signal_dim, layers);
  const double sd = 1.0 / std::sqrt(static_cast<double>(signal_dim));
  for (auto& blk : p.blocks) {
    blk.w1 = gaussian(signal_dim, signal_dim, sd, rng);
    blk.w2 = Matrix::Identity(layers, layers) + gaussian(layers, layers, 0.01, rng);
  }
  return p;
}

AttentionParams AttentionParams::random(Index signal_dim, Index layers, std::uint64_t seed,
                                        double scale) {
  Rng rng(seed);
  AttentionParams p;
  for (auto& blk : p.blocks) {
    blk.w1 = gaussian(signal_dim, signal_dim, scale, rng);
    blk.w2 = gaussian(layers, layers, scale, rng);
    blk.b = gaussian(layers, 1, scale, rng);
  }
  p.w_out = gaussian(signal_dim, 1, scale, rng);
  return p;
}

std::vector<Matrix*> AttentionParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& blk : blocks) {
    out.push_back(&blk.w1);
    out.push_back(&blk.w2);
    out.push_back(&blk.b);
  }
  out.push_back(&w_out);
  return out;
}

std::vector<const Matrix*> AttentionParams::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& blk : blocks) {
    out.push_back(&blk.w1);
    out.push_back(&blk.w2);
    out.push_back(&blk.b);
  }
  out.push_back(&w_out);
  return out;
}

std::vector<std::string> AttentionParams::tensor_names() {
  std::vector<std::string> names;
  for (int k = 0; k < 4; ++k) {
    const std::string tag = "attention.block" + std::to_string(k);
    names.push_back(tag + ".w1");
    names.push_back(tag + ".w2");
    names.push_back(tag + ".b");
  }
  names.push_back("attention.w_out");
  return names;
}

AttentionParams& AttentionParams::operator+=(const AttentionParams& other) {
  auto mine = tensors();
  auto theirs = other.tensors();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    *mine[i] += *theirs[i];
  }
  return *this;
}

AttentionParams& AttentionParams::operator*=(double scale) {
  for (Matrix* t : tensors()) {
    *t *= scale;
  }
  return *this;
}

Vector attention_forward(const Matrix& residuals, const AttentionParams& params,
                         AttentionCache* cache) {
  if (residuals.rows() != params.layers() || residuals.cols() != params.signal_dim()) {
    throw ShapeMismatch("attention input is " + std::to_string(residuals.rows()) + "x" +
                        std::to_string(residuals.cols()) + ", expected " +
                        std::to_string(params.layers()) + "x" +
                        std::to_string(params.signal_dim()));
  }
  Matrix m = residuals;
  for (std::size_t k = 0; k < params.blocks.size(); ++k) {
    const auto& blk = params.blocks[k];
    Matrix z = blk.w2 * (m * blk.w1);
    z.colwise() += blk.b.col(0);
    if (cache) {
      cache->inputs[k] = std::move(m);
      cache->preactivation[k] = z;
    }
    m = z.cwiseMax(0.0);
  }
  const Vector logits = m * params.w_out;
  const double top = logits.maxCoeff();
  Vector p = (logits.array() - top).exp();
  p /= p.sum();
  if (cache) {
    cache->last = std::move(m);
    cache->weights = p;
  }
  return p;
}

Matrix attention_backward(const AttentionParams& params, const AttentionCache& cache,
                          const Vector& grad_weights, AttentionParams& grads) {
  const Vector& p = cache.weights;
  if (grad_weights.size() != p.size()) {
    throw_shape("attention weight gradient", p.size(), grad_weights.size());
  }
  const Vector grad_logits = p.cwiseProduct(grad_weights.array().matrix() -
                                            Vector::Constant(p.size(), p.dot(grad_weights)));
  grads.w_out.noalias() += cache.last.transpose() * grad_logits;
  Matrix grad_m = grad_logits * params.w_out.transpose();
  for (std::size_t k = params.blocks.size(); k-- > 0;) {
    const auto& blk = params.blocks[k];
    auto& gblk = grads.blocks[k];
    const Matrix gz = (cache.preactivation[k].array() > 0.0).select(grad_m, 0.0);
    const Matrix& in = cache.inputs[k];
    gblk.b.noalias() += gz.rowwise().sum();
    gblk.w2.noalias() += gz * (in * blk.w1).transpose();
    const Matrix w2t_gz = blk.w2.transpose() * gz;
    gblk.w1.noalias() += in.transpose() * w2t_gz;
    grad_m = w2t_gz * blk.w1.transpose();
  }
  return grad_m;
}

} // namespace greedynet
