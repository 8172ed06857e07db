#pragma once

#include "greedynet/linalg.hpp"
#include "greedynet/random.hpp"

#include <cstdint>
#include <span>

namespace greedynet {

/// Randomized maximal-projection choice: among unmasked entries, discard those
/// with |u_i| < tau_factor·max|u| and draw an index with probability
/// proportional to |u_i| from the rest. Returns -1 if every eligible entry is 0.
Index sample_thresholded(const Eigen::Ref<const Vector>& u, std::span<const std::uint8_t> mask,
                         double tau_factor, Rng& rng);

/// The probabilities sample_thresholded draws from (zero for discarded or
/// masked entries). Exposed for tests.
Vector thresholded_distribution(const Eigen::Ref<const Vector>& u,
                                std::span<const std::uint8_t> mask, double tau_factor);

/// Largest |u_i| over unmasked entries (0 when none).
double max_abs(const Eigen::Ref<const Vector>& u, std::span<const std::uint8_t> mask = {});

} // namespace greedynet
