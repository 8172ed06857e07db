#pragma once

#include "greedynet/lgm.hpp"

namespace greedynet {

/// Unrolled matching pursuit: α_k = α_{k−1} + W_D·MPT(W_D·Dᵀr_{k−1}) with
/// r_{k−1} = x − D₂α_{k−1}, reconstruction x̂_k = D₂α_k. s = 0 gives x̂ = 0.
UnrolledTrace lmp_forward(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                          GradientTape* tape = nullptr);

/// Reverse pass through the recorded selection path; gradients flow through
/// the selected correlation values and their norm weights.
LgmGradients lmp_backward(const GradientTape& tape, const Vector& output_grad);
void lmp_backward_accumulate(const GradientTape& tape, const Vector& output_grad,
                             LgmGradients& grads);

} // namespace greedynet
