#include "greedynet/synthetic.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace greedynet {

Matrix make_dct_dictionary(Index n, Index m) {
  if (n < 1 || m < n) {
    throw ValidationError("dct dictionary needs 1 <= n <= m");
  }
  Matrix d(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      d(i, j) = std::cos(std::numbers::pi * static_cast<double>(j) * (static_cast<double>(i) + 0.5) /
                         static_cast<double>(m));
    }
    if (j > 0) {
      d.col(j).array() -= d.col(j).mean();
    }
    const double norm = d.col(j).norm();
    if (!(norm > 1e-12)) {
      throw ZeroAtom("dct column " + std::to_string(j) + " vanishes after mean removal");
    }
    d.col(j) /= norm;
  }
  return d;
}

Matrix random_dictionary(Index n, Index m, std::uint64_t seed) {
  Rng rng(seed);
  Matrix d(n, m);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < n; ++i) {
      d(i, j) = standard_normal(rng);
    }
    d.col(j).normalize();
  }
  return d;
}

void SyntheticSpec::validate() const {
  if (n < 1 || m < n) {
    throw ValidationError("synthetic spec needs 1 <= n <= m");
  }
  if (cardinalities.empty()) {
    throw ValidationError("synthetic spec needs at least one cardinality");
  }
  for (Index c : cardinalities) {
    if (c < 1 || c > m) {
      throw ValidationError("cardinality " + std::to_string(c) + " outside [1, " +
                            std::to_string(m) + "]");
    }
  }
  if (train_per_cardinality < 0 || test_per_cardinality < 0) {
    throw ValidationError("signal counts must be non-negative");
  }
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw ValidationError("noise levels must be positive");
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<Index>& indices) const {
  LabeledDataset out;
  out.sigma = sigma;
  out.clean = gather_columns(clean, indices);
  out.noisy = gather_columns(noisy, indices);
  out.codes = gather_columns(codes, indices);
  for (Index j : indices) {
    out.supports.push_back(supports[static_cast<std::size_t>(j)]);
  }
  return out;
}

LabeledDataset gen_dataset(const Matrix& d_true, const std::vector<Index>& cardinalities,
                           Index per_cardinality, double sigma, std::uint64_t seed) {
  const Index n = d_true.rows();
  const Index m = d_true.cols();
  for (Index c : cardinalities) {
    if (c < 1 || c > m) {
      throw ValidationError("cardinality " + std::to_string(c) + " outside [1, " +
                            std::to_string(m) + "]");
    }
  }
  if (sigma < 0.0) {
    throw ValidationError("noise level must be non-negative");
  }
  const Index total = per_cardinality * static_cast<Index>(cardinalities.size());
  LabeledDataset ds;
  ds.sigma = sigma;
  ds.clean.resize(n, total);
  ds.codes = Matrix::Zero(m, total);
  ds.supports.reserve(static_cast<std::size_t>(total));

  Rng rng(derive_seed(seed, 0));
  std::vector<Index> pool(static_cast<std::size_t>(m));
  Index col = 0;
  for (Index card : cardinalities) {
    for (Index k = 0; k < per_cardinality; ++k, ++col) {
      std::iota(pool.begin(), pool.end(), Index{0});
      for (Index t = 0; t < card; ++t) {
        const auto remaining = static_cast<std::uint64_t>(m - t);
        const auto pick = static_cast<std::size_t>(t) + static_cast<std::size_t>(rng() % remaining);
        std::swap(pool[static_cast<std::size_t>(t)], pool[pick]);
      }
      std::vector<Index> support(pool.begin(), pool.begin() + card);
      std::sort(support.begin(), support.end());
      for (Index i : support) {
        const double magnitude = 1.0 - uniform01(rng);
        ds.codes(i, col) = (rng() & 1u) ? magnitude : -magnitude;
      }
      Vector x = d_true * ds.codes.col(col);
      const double peak = x.cwiseAbs().maxCoeff();
      if (peak > 0.0) {
        ds.codes.col(col) /= peak;
        x = d_true * ds.codes.col(col);
      }
      ds.clean.col(col) = x;
      ds.supports.push_back(std::move(support));
    }
  }

  Rng noise(derive_seed(seed, 1));
  ds.noisy = ds.clean;
  for (Index j = 0; j < total; ++j) {
    for (Index i = 0; i < n; ++i) {
      ds.noisy(i, j) += sigma * standard_normal(noise);
    }
  }
  return ds;
}

SplitDataset gen_split(const SyntheticSpec& spec, const Matrix& d_true, double sigma) {
  spec.validate();
  if (d_true.rows() != spec.n || d_true.cols() != spec.m) {
    throw ShapeMismatch("true dictionary does not match the spec dimensions");
  }
  // Clean streams depend only on the spec seed; noise streams also on σ.
  auto with_sigma = [&](std::uint64_t base) {
    LabeledDataset clean_part = gen_dataset(d_true, spec.cardinalities,
                                            base == 0 ? spec.train_per_cardinality
                                                      : spec.test_per_cardinality,
                                            0.0, derive_seed(spec.seed, base));
    Rng noise(derive_seed(derive_seed(spec.seed, base + 2),
                          static_cast<std::uint64_t>(std::llround(sigma * 1e9))));
    clean_part.sigma = sigma;
    for (Index j = 0; j < clean_part.noisy.cols(); ++j) {
      for (Index i = 0; i < clean_part.noisy.rows(); ++i) {
        clean_part.noisy(i, j) += sigma * standard_normal(noise);
      }
    }
    return clean_part;
  };
  return {with_sigma(0), with_sigma(1)};
}

double dictionary_distance(const Matrix& d_true, const Matrix& d_approx) {
  if (d_true.rows() != d_approx.rows()) {
    throw ShapeMismatch("dictionary_distance: signal dimensions differ");
  }
  if (d_true.cols() == 0 || d_approx.cols() == 0) {
    throw ValidationError("dictionary_distance: empty dictionary");
  }
  // Sequential inner products and squared cosines: the result is exactly 0 for
  // identical dictionaries and exactly invariant to column order and signs.
  auto inner = [n = d_true.rows()](const auto& a, const auto& b) {
    double acc = 0.0;
    for (Index r = 0; r < n; ++r) {
      acc += a[r] * b[r];
    }
    return acc;
  };
  auto squared_norms = [&](const Matrix& d, const char* which) {
    Vector out(d.cols());
    for (Index j = 0; j < d.cols(); ++j) {
      out[j] = inner(d.col(j), d.col(j));
      if (!(out[j] > 0.0)) {
        throw ZeroAtom(std::string("dictionary_distance: zero atom in ") + which);
      }
    }
    return out;
  };
  const Vector true_sq = squared_norms(d_true, "true dictionary");
  const Vector approx_sq = squared_norms(d_approx, "approximate dictionary");
  double total = 0.0;
  for (Index i = 0; i < d_true.cols(); ++i) {
    double best = 0.0;
    for (Index j = 0; j < d_approx.cols(); ++j) {
      const double g = inner(d_approx.col(j), d_true.col(i));
      best = std::max(best, (g * g) / (approx_sq[j] * true_sq[i]));
    }
    total += std::clamp(1.0 - std::sqrt(best), 0.0, 1.0);
  }
  return total / static_cast<double>(d_true.cols());
}

} // namespace greedynet
