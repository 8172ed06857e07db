#pragma once

#include "greedynet/linalg.hpp"

#include <vector>

namespace greedynet {

/// LISTA with a learned encoder W (m×n), inner dictionary D1, synthesis
/// dictionary D2 (both n×m) and per-entry thresholds θ:
/// α_t = S_θ(α_{t−1} + W(x − D1·α_{t−1})), α_0 = 0, x̂ = D2·α_T.
struct ListaParams {
  Matrix w;
  Matrix d1;
  Matrix d2;
  Vector theta;
  Index layers = 1;

  /// W = Dᵀ/c, D1 = D2 = D, θ = λ/c with c = 1.05·λ_max(DᵀD) from 100
  /// power iterations.
  static ListaParams from_dictionary(const Matrix& dict, Index layers, double lambda);

  void validate() const;
};

/// Largest eigenvalue of DᵀD by power iteration from a fixed start vector.
double spectral_norm_squared(const Matrix& dict, Index iterations = 100);

struct ListaTape {
  Vector x;
  std::vector<Vector> pre;    // v_t
  std::vector<Vector> codes;  // α_0..α_T
};

struct ListaOutput {
  Vector code;
  Vector reconstruction;
};

ListaOutput lista_forward(const ListaParams& params, const Vector& x, ListaTape* tape = nullptr);

struct ListaGradients {
  Matrix w;
  Matrix d1;
  Matrix d2;
  Vector theta;

  static ListaGradients zeros_like(const ListaParams& params);
};

/// Accumulates gradients given ∂L/∂α_T and ∂L/∂x̂ (either may be empty).
void lista_backward_accumulate(const ListaParams& params, const ListaTape& tape,
                               const Vector& code_grad, const Vector& recon_grad,
                               ListaGradients& grads);

} // namespace greedynet
