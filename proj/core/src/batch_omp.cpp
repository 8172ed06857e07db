#include "greedynet/pursuit.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/parallel.hpp"
#include "greedynet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace greedynet {

namespace {

struct Shared {
  const Dictionary& dict;
  const Matrix& gram;
  const PursuitConfig& cfg;
};

// OMP on one signal given p0 = Dᵀx and ‖x‖², without touching D again except
// for the final reconstruction.
PursuitResult batch_one(const Shared& sh, const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& p0) {
  const Dictionary& dict = sh.dict;
  const Index m = dict.size();
  const Index s = sh.cfg.max_cardinality;
  const Vector& w = dict.weights();

  PursuitResult result;
  result.code.ambient_dim = m;
  result.reconstruction = Vector::Zero(dict.signal_dim());
  const double energy = x.squaredNorm();
  result.residual_norms.push_back(std::sqrt(energy));
  if (energy == 0.0) {
    return result;
  }

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m), 0);
  std::vector<Index>& support = result.code.support;
  CholFactor chol(std::min(s, dict.signal_dim()) + 1);
  Vector rhs(s);
  Vector coeffs;
  Vector u = p0.cwiseProduct(w);
  const double floor = kCorrelationFloor * max_abs(u);

  for (Index k = 1; k <= s; ++k) {
    if (max_abs(u, mask) <= floor) {
      break;
    }
    Index chosen = argmax_abs(u, mask);
    const Index order = k - 1;
    auto try_append = [&](Index i) {
      Vector col(order);
      for (Index j = 0; j < order; ++j) {
        col[j] = sh.gram(support[static_cast<std::size_t>(j)], i);
      }
      chol.append(col, sh.gram(i, i));
    };
    try {
      try_append(chosen);
    } catch (const NotPositiveDefinite&) {
      mask[static_cast<std::size_t>(chosen)] = 1;
      chosen = argmax_abs(u, mask);
      if (chosen < 0) {
        throw RankDeficientSupport("batch_omp: no independent atom left to add");
      }
      try {
        try_append(chosen);
      } catch (const NotPositiveDefinite& e) {
        throw RankDeficientSupport(std::string("batch_omp: ") + e.what());
      }
    }
    mask[static_cast<std::size_t>(chosen)] = 1;
    support.push_back(chosen);
    rhs[order] = p0[chosen];
    coeffs = chol.solve(rhs.head(k));

    // Dᵀr = Dᵀx − G_S α and ‖r‖² = ‖x‖² − αᵀ(D_Sᵀx).
    u = p0;
    for (Index j = 0; j < k; ++j) {
      u.noalias() -= coeffs[j] * sh.gram.col(support[static_cast<std::size_t>(j)]);
    }
    u.array() *= w.array();
    const double norm = std::sqrt(std::max(0.0, energy - coeffs.dot(rhs.head(k))));

    result.residual_norms.push_back(norm);
    result.selections.push_back({chosen});
    result.iterations = k;
    if (sh.cfg.should_stop(k, norm)) {
      break;
    }
  }
  result.code.coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
  if (!support.empty()) {
    result.reconstruction = gather_columns(dict.atoms(), support) * coeffs;
    result.residual_norms.back() = (x - result.reconstruction).norm();
  }
  return result;
}

} // namespace

std::vector<PursuitResult> batch_omp(const Dictionary& dict, const Matrix& signals,
                                     const PursuitConfig& cfg, unsigned threads) {
  cfg.validate(dict.size());
  if (signals.rows() != dict.signal_dim()) {
    throw_shape("batch_omp signal length", dict.signal_dim(), signals.rows());
  }
  if (!signals.allFinite()) {
    throw ValidationError("batch_omp: signals have non-finite entries");
  }
  std::vector<PursuitResult> out(static_cast<std::size_t>(signals.cols()));
  if (signals.cols() == 0) {
    return out;
  }
  const Matrix gram = dict.atoms().transpose() * dict.atoms();
  const Matrix proj = dict.atoms().transpose() * signals;
  const Shared sh{dict, gram, cfg};
  parallel_for(out.size(), threads, [&](std::size_t j) {
    const auto col = static_cast<Index>(j);
    out[j] = batch_one(sh, signals.col(col), proj.col(col));
  });
  return out;
}

} // namespace greedynet
