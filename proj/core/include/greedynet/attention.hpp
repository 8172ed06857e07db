#pragma once

#include "greedynet/linalg.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace greedynet {

struct AttentionBlock {
  Matrix w1;  // p²×p², applied from the right
  Matrix w2;  // s×s, applied from the left
  Matrix b;   // s×1, broadcast along rows
};

/// Small network turning the s×p² matrix of per-layer residuals (one residual
/// per row) into softmax weights over the layers:
/// four blocks M ← relu(W2·M·W1 + b·1ᵀ), then p = softmax(M·w_out).
struct AttentionParams {
  std::array<AttentionBlock, 4> blocks;
  Matrix w_out;  // p²×1

  Index signal_dim() const { return w_out.rows(); }
  Index layers() const { return blocks[0].w2.rows(); }
  /// 4(p⁴ + s² + s) + p².
  Index parameter_count() const;

  /// All-zero parameters (uniform output weights).
  static AttentionParams zeros(Index signal_dim, Index layers);
  /// W1 ~ N(0, 1/p²), W2 = I + N(0, 0.01²), b = 0, w_out = 0.
  static AttentionParams initial(Index signal_dim, Index layers, std::uint64_t seed);
  /// Every entry N(0, scale²). Used by gradient checks.
  static AttentionParams random(Index signal_dim, Index layers, std::uint64_t seed, double scale);

  /// Flat views of every tensor, in a fixed order, for optimizers and checkpoints.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  static std::vector<std::string> tensor_names();

  AttentionParams& operator+=(const AttentionParams& other);
  AttentionParams& operator*=(double scale);
};

struct AttentionCache {
  std::array<Matrix, 4> inputs;       // M fed to each block
  std::array<Matrix, 4> preactivation; // W2·M·W1 + b·1ᵀ
  Matrix last;                         // output of the fourth block
  Vector weights;
};

/// Returns the s softmax weights. `cache` receives what backward needs.
Vector attention_forward(const Matrix& residuals, const AttentionParams& params,
                         AttentionCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` and returns ∂L/∂residuals.
Matrix attention_backward(const AttentionParams& params, const AttentionCache& cache,
                          const Vector& grad_weights, AttentionParams& grads);

} // namespace greedynet
