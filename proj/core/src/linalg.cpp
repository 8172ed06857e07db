#include "greedynet/linalg.hpp"

#include "greedynet/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace greedynet {

CholFactor::CholFactor(Index capacity) { reserve(capacity); }

void CholFactor::reserve(Index capacity) {
  if (capacity <= storage_.rows()) {
    return;
  }
  Matrix grown = Matrix::Zero(capacity, capacity);
  grown.topLeftCorner(order_, order_) = storage_.topLeftCorner(order_, order_);
  storage_ = std::move(grown);
}

Matrix CholFactor::lower() const { return storage_.topLeftCorner(order_, order_); }

void CholFactor::append(const Eigen::Ref<const Vector>& gram_col, double gram_diag) {
  if (gram_col.size() != order_) {
    throw_shape("cholesky_append gram column", order_, gram_col.size());
  }
  if (!(gram_diag > 0.0)) {
    throw NotPositiveDefinite("cholesky_append: non-positive diagonal entry");
  }
  Vector w;
  double pivot = gram_diag;
  if (order_ > 0) {
    w = storage_.topLeftCorner(order_, order_).triangularView<Eigen::Lower>().solve(gram_col);
    pivot -= w.squaredNorm();
  }
  if (!(pivot > kPivotTolerance)) {
    throw NotPositiveDefinite("cholesky_append: Schur pivot " + std::to_string(pivot) +
                              " at or below tolerance (atom dependent on support)");
  }
  if (order_ + 1 > storage_.rows()) {
    reserve(std::max<Index>(2 * storage_.rows(), order_ + 1));
  }
  if (order_ > 0) {
    storage_.row(order_).head(order_) = w.transpose();
  }
  storage_(order_, order_) = std::sqrt(pivot);
  ++order_;
}

Vector CholFactor::solve(const Eigen::Ref<const Vector>& rhs) const {
  if (rhs.size() != order_) {
    throw_shape("cholesky solve rhs", order_, rhs.size());
  }
  const auto lower = storage_.topLeftCorner(order_, order_);
  Vector y = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(y);
  return y;
}

Matrix CholFactor::inverse() const {
  const auto lower = storage_.topLeftCorner(order_, order_);
  Matrix inv = Matrix::Identity(order_, order_);
  lower.triangularView<Eigen::Lower>().solveInPlace(inv);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return inv;
}

Matrix CholFactor::reconstruct() const {
  const Matrix l = lower();
  return l * l.transpose();
}

CholFactor cholesky(const Matrix& gram) {
  if (gram.rows() != gram.cols()) {
    throw_shape("cholesky: matrix must be square, columns", gram.rows(), gram.cols());
  }
  const Index n = gram.rows();
  const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
  if (n > 0 && (gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ShapeMismatch("cholesky: matrix is not symmetric within 1e-9");
  }

  CholFactor factor(n);
  Matrix& l = factor.storage_;
  for (Index j = 0; j < n; ++j) {
    double pivot = gram(j, j);
    for (Index k = 0; k < j; ++k) {
      pivot -= l(j, k) * l(j, k);
    }
    if (!(pivot > kPivotTolerance)) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) + " at column " +
                                std::to_string(j));
    }
    const double diag = std::sqrt(pivot);
    l(j, j) = diag;
    for (Index i = j + 1; i < n; ++i) {
      double sum = gram(i, j);
      for (Index k = 0; k < j; ++k) {
        sum -= l(i, k) * l(j, k);
      }
      l(i, j) = sum / diag;
    }
  }
  factor.order_ = n;
  return factor;
}

CholFactor cholesky_append(CholFactor factor, const Vector& gram_col, double gram_diag) {
  factor.append(gram_col, gram_diag);
  return factor;
}

Vector ls_solve(const Matrix& sub_dict, const Vector& x) {
  if (sub_dict.rows() != x.size()) {
    throw_shape("ls_solve signal length", sub_dict.rows(), x.size());
  }
  const Matrix gram = sub_dict.transpose() * sub_dict;
  const CholFactor factor = cholesky(gram);
  return factor.solve(sub_dict.transpose() * x);
}

Matrix inverse_gradient(const Matrix& a_inv, const Matrix& upstream) {
  if (a_inv.rows() != a_inv.cols()) {
    throw ShapeMismatch("inverse_gradient: inverse must be square");
  }
  if (upstream.rows() != a_inv.rows() || upstream.cols() != a_inv.cols()) {
    throw ShapeMismatch("inverse_gradient: upstream gradient shape differs from inverse");
  }
  const Matrix a_inv_t = a_inv.transpose();
  return -(a_inv_t * upstream * a_inv_t);
}

Matrix gather_columns(const Matrix& dict, std::span<const Index> indices) {
  Matrix out(dict.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    out.col(static_cast<Index>(j)) = dict.col(indices[j]);
  }
  return out;
}

Index argmax_abs(const Eigen::Ref<const Vector>& v, std::span<const std::uint8_t> mask) {
  Index best = -1;
  double best_val = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (!mask.empty() && mask[static_cast<std::size_t>(i)] != 0) {
      continue;
    }
    const double a = std::abs(v[i]);
    if (a > best_val) {
      best_val = a;
      best = i;
    }
  }
  return best;
}

} // namespace greedynet
