#pragma once

#include "greedynet/linalg.hpp"
#include "greedynet/random.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace greedynet::testing {

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = standard_normal(rng);
    }
  }
  return m;
}

inline Vector gaussian(Index n, Rng& rng) { return gaussian(n, 1, rng).col(0); }

inline Matrix unit_columns(Matrix m) {
  for (Index j = 0; j < m.cols(); ++j) {
    m.col(j).normalize();
  }
  return m;
}

/// k distinct indices from [0, m), uniformly.
inline std::vector<Index> random_support(Index m, Index k, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng() % static_cast<std::uint64_t>(m - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

/// Σ c_i d_i over `support` with |c_i| in [0.5, 1.5] and random signs.
inline Vector combine(const Matrix& d, const std::vector<Index>& support, Rng& rng) {
  Vector x = Vector::Zero(d.rows());
  for (Index i : support) {
    const double mag = 0.5 + uniform01(rng);
    x += (rng() & 1 ? mag : -mag) * d.col(i);
  }
  return x;
}

/// Central difference of f along every entry of `param`.
inline Matrix central_difference(Matrix& param, const std::function<double()>& f, double h = 1e-6) {
  Matrix out(param.rows(), param.cols());
  for (Index k = 0; k < param.size(); ++k) {
    const double saved = param.data()[k];
    param.data()[k] = saved + h;
    const double up = f();
    param.data()[k] = saved - h;
    const double down = f();
    param.data()[k] = saved;
    out.data()[k] = (up - down) / (2.0 * h);
  }
  return out;
}

inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

} // namespace greedynet::testing
