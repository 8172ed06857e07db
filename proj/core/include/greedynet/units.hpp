#pragma once

#include "greedynet/linalg.hpp"

#include <vector>

namespace greedynet {

/// Maximal projection thresholding: keeps u at argmax|u| (lowest index on
/// ties) and zeroes everything else.
Vector mpt(const Eigen::Ref<const Vector>& u);

/// Gradient of mpt: the upstream gradient restricted to the surviving index.
Vector mpt_backward(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& upstream);

/// Atom extraction D·|y| / ‖y‖∞. For a one-hot y this is the selected column.
/// Throws AllZeroInput when y = 0.
Vector atos(const Matrix& dict, const Eigen::Ref<const Vector>& y);

struct AtosGrad {
  Matrix dict;
  Vector y;
};

/// Gradients of atos with respect to D and y.
AtosGrad atos_backward(const Matrix& dict, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& upstream);

/// Multi-selection thresholding: column j is one-hot at the j-th largest |u_i|
/// (descending magnitude, ties to the lowest index) and holds u there.
Matrix mspt(const Eigen::Ref<const Vector>& u, Index s);

/// Row indices selected by mspt, in column order.
std::vector<Index> mspt_indices(const Eigen::Ref<const Vector>& u, Index s);

/// Column-wise atos.
Matrix satos(const Matrix& dict, const Matrix& y);

/// Element-wise soft thresholding sign(v)·max(|v| − θ, 0).
Vector soft_threshold(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& theta);

} // namespace greedynet
