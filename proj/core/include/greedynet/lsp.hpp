#pragma once

#include "greedynet/lgm.hpp"

namespace greedynet {

/// Unrolled subspace pursuit (inference only). Supports are chosen and pruned
/// on the analysis dictionary; x̂_k = D₂_{S_k}·α_{S_k}. Stops when the residual
/// grows (keeping the previous iterate), when the support repeats, or after
/// max_iterations refinements.
UnrolledTrace lsp_forward(const LgmParams& params, const Vector& x, Index s,
                          const SpOptions& opts = {});

} // namespace greedynet
