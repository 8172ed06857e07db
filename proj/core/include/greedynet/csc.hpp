#pragma once

#include "greedynet/pursuit.hpp"

namespace greedynet {

/// Convolutional dictionary: a bank of m local filters of length n acting on
/// signals of length N with circular boundaries. Global atom g = f·N + t is
/// filter f placed at shift t, i.e. entry (t + i) mod N holds local(i, f).
class CscDictionary {
public:
  CscDictionary(Matrix local_atoms, Index signal_len);

  const Matrix& local_atoms() const { return local_; }
  Index filter_len() const { return local_.rows(); }
  Index filters() const { return local_.cols(); }
  Index signal_len() const { return signal_len_; }
  Index global_size() const { return local_.cols() * signal_len_; }

  /// W_D diagonal, one weight per global atom (shifts share the filter norm).
  Vector weights() const;

  /// Dᵀr by circular cross-correlation.
  Vector correlate(const Eigen::Ref<const Vector>& r) const;
  /// Dα by circular convolution.
  Vector synthesize(const Eigen::Ref<const Vector>& alpha) const;

  /// Explicit N × mN global matrix. Only meant for small test instances.
  Matrix materialize() const;

  /// True when the supports of global atoms a and b intersect.
  bool overlaps(Index a, Index b) const;

private:
  Matrix local_;
  Index signal_len_;
  Vector filter_norms_;
};

/// Group maximal-projection thresholding: repeatedly keeps the largest
/// remaining |u_i| and removes every atom overlapping it.
Vector gmpt(const Eigen::Ref<const Vector>& u, const CscDictionary& csc);

/// Convolutional greedy pursuit: α_k = α_{k−1} + W_D·GMPT(W_D·Dᵀr_{k−1}).
PursuitResult gcmp(const CscDictionary& csc, const Vector& x, const PursuitConfig& cfg);

} // namespace greedynet
