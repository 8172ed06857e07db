#include "greedynet/units.hpp"

#include "greedynet/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace greedynet {

Vector mpt(const Eigen::Ref<const Vector>& u) {
  Vector y = Vector::Zero(u.size());
  if (u.size() > 0) {
    const Index i0 = argmax_abs(u);
    y[i0] = u[i0];
  }
  return y;
}

Vector mpt_backward(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& upstream) {
  if (upstream.size() != u.size()) {
    throw_shape("mpt_backward upstream", u.size(), upstream.size());
  }
  Vector g = Vector::Zero(u.size());
  if (u.size() > 0) {
    const Index i0 = argmax_abs(u);
    g[i0] = upstream[i0];
  }
  return g;
}

Vector atos(const Matrix& dict, const Eigen::Ref<const Vector>& y) {
  if (y.size() != dict.cols()) {
    throw_shape("atos selector length", dict.cols(), y.size());
  }
  const double peak = y.cwiseAbs().maxCoeff();
  if (peak == 0.0) {
    throw AllZeroInput("atos: selector is all zero");
  }
  return dict * y.cwiseAbs() / peak;
}

AtosGrad atos_backward(const Matrix& dict, const Eigen::Ref<const Vector>& y,
                       const Eigen::Ref<const Vector>& upstream) {
  if (y.size() != dict.cols()) {
    throw_shape("atos selector length", dict.cols(), y.size());
  }
  if (upstream.size() != dict.rows()) {
    throw_shape("atos upstream length", dict.rows(), upstream.size());
  }
  const Vector mag = y.cwiseAbs();
  const Index peak_at = argmax_abs(y);
  const double peak = mag[peak_at];
  if (peak == 0.0) {
    throw AllZeroInput("atos: selector is all zero");
  }
  AtosGrad g;
  g.dict = upstream * (mag / peak).transpose();
  // d/dy_j of D|y|/‖y‖∞: sign(y_j)·d_j/peak, minus the peak's own term.
  const Vector proj = dict.transpose() * upstream;
  g.y = Vector::Zero(y.size());
  for (Index j = 0; j < y.size(); ++j) {
    const double sgn = (y[j] > 0.0) - (y[j] < 0.0);
    g.y[j] = sgn * proj[j] / peak;
  }
  const double sgn_peak = (y[peak_at] > 0.0) - (y[peak_at] < 0.0);
  g.y[peak_at] -= sgn_peak * proj.dot(mag) / (peak * peak);
  return g;
}

std::vector<Index> mspt_indices(const Eigen::Ref<const Vector>& u, Index s) {
  if (s < 0 || s > u.size()) {
    throw ValidationError("mspt: s must lie in [0, dim(u)]");
  }
  std::vector<Index> order(static_cast<std::size_t>(u.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(u[a]) > std::abs(u[b]); });
  order.resize(static_cast<std::size_t>(s));
  return order;
}

Matrix mspt(const Eigen::Ref<const Vector>& u, Index s) {
  const std::vector<Index> rows = mspt_indices(u, s);
  Matrix y = Matrix::Zero(u.size(), s);
  for (Index j = 0; j < s; ++j) {
    const Index i = rows[static_cast<std::size_t>(j)];
    y(i, j) = u[i];
  }
  return y;
}

Matrix satos(const Matrix& dict, const Matrix& y) {
  Matrix out(dict.rows(), y.cols());
  for (Index j = 0; j < y.cols(); ++j) {
    out.col(j) = atos(dict, y.col(j));
  }
  return out;
}

Vector soft_threshold(const Eigen::Ref<const Vector>& v, const Eigen::Ref<const Vector>& theta) {
  if (theta.size() != v.size()) {
    throw_shape("soft_threshold thresholds", v.size(), theta.size());
  }
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - theta[i];
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

} // namespace greedynet
