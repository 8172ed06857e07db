#include "greedynet/pursuit.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/random.hpp"
#include "greedynet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace greedynet {

void PursuitConfig::validate(Index atom_count, bool allow_zero) const {
  const Index lo = allow_zero ? 0 : 1;
  if (max_cardinality < lo || max_cardinality > atom_count) {
    throw ValidationError("max cardinality " + std::to_string(max_cardinality) +
                          " outside [" + std::to_string(lo) + ", " + std::to_string(atom_count) +
                          "]");
  }
  if (!std::isfinite(residual_threshold) || residual_threshold < 0.0) {
    throw ValidationError("residual threshold must be finite and non-negative");
  }
}

bool PursuitConfig::should_stop(Index iteration, double residual_norm) const {
  if (iteration >= max_cardinality) {
    return true;
  }
  return stop_mode == StopMode::ThresholdOrMax && residual_norm <= residual_threshold;
}

void RandConfig::validate() const {
  if (!(tau_factor > 0.0 && tau_factor <= 1.0)) {
    throw ValidationError("tau_factor must lie in (0, 1]");
  }
  if (draws < 1) {
    throw ValidationError("rand draws must be at least 1");
  }
}

double max_abs(const Eigen::Ref<const Vector>& u, std::span<const std::uint8_t> mask) {
  double best = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    if (mask.empty() || mask[static_cast<std::size_t>(i)] == 0) {
      best = std::max(best, std::abs(u[i]));
    }
  }
  return best;
}

Vector thresholded_distribution(const Eigen::Ref<const Vector>& u,
                                std::span<const std::uint8_t> mask, double tau_factor) {
  Vector p = Vector::Zero(u.size());
  const double top = max_abs(u, mask);
  if (top == 0.0) {
    return p;
  }
  const double tau = tau_factor * top;
  for (Index i = 0; i < u.size(); ++i) {
    const bool eligible = mask.empty() || mask[static_cast<std::size_t>(i)] == 0;
    if (eligible && std::abs(u[i]) >= tau) {
      p[i] = std::abs(u[i]);
    }
  }
  return p / p.sum();
}

Index sample_thresholded(const Eigen::Ref<const Vector>& u, std::span<const std::uint8_t> mask,
                         double tau_factor, Rng& rng) {
  const double top = max_abs(u, mask);
  if (top == 0.0) {
    return -1;
  }
  const double tau = tau_factor * top;
  double total = 0.0;
  Index last = -1;
  for (Index i = 0; i < u.size(); ++i) {
    const bool eligible = mask.empty() || mask[static_cast<std::size_t>(i)] == 0;
    if (eligible && std::abs(u[i]) >= tau) {
      total += std::abs(u[i]);
      last = i;
    }
  }
  const double target = uniform01(rng) * total;
  double cumulative = 0.0;
  for (Index i = 0; i < u.size(); ++i) {
    const bool eligible = mask.empty() || mask[static_cast<std::size_t>(i)] == 0;
    if (eligible && std::abs(u[i]) >= tau) {
      cumulative += std::abs(u[i]);
      if (target < cumulative) {
        return i;
      }
    }
  }
  return last;
}

namespace {

void check_signal(const Dictionary& dict, const Vector& x) {
  if (x.size() != dict.signal_dim()) {
    throw_shape("signal length", dict.signal_dim(), x.size());
  }
  if (!x.allFinite()) {
    throw ValidationError("signal has non-finite entries");
  }
}

// Shared OMP loop; `select(u, mask)` returns the chosen atom or -1.
template <class Select>
PursuitResult omp_loop(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg,
                       Select&& select) {
  cfg.validate(dict.size());
  check_signal(dict, x);

  const Index n = dict.signal_dim();
  const Index m = dict.size();
  const Index s = cfg.max_cardinality;

  PursuitResult result;
  result.code.ambient_dim = m;
  result.reconstruction = Vector::Zero(n);
  result.residual_norms.push_back(x.norm());
  if (result.residual_norms.front() == 0.0) {
    return result;
  }

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m), 0);
  CholFactor chol(std::min(s, n) + 1);
  Matrix sub(n, s);
  Vector rhs(s);
  Vector coeffs;
  Vector r = x;
  double floor = 0.0;

  for (Index k = 1; k <= s; ++k) {
    const Vector u = dict.weighted_correlations(r);
    const double top = max_abs(u, mask);
    if (k == 1) {
      floor = kCorrelationFloor * top;
    }
    if (top <= floor) {
      break;
    }

    Index chosen = select(u, mask);
    const Index order = k - 1;
    auto try_append = [&](Index i) {
      const Vector col = sub.leftCols(order).transpose() * dict.atom(i);
      chol.append(col, dict.atom_norms()[i] * dict.atom_norms()[i]);
    };
    try {
      try_append(chosen);
    } catch (const NotPositiveDefinite&) {
      mask[static_cast<std::size_t>(chosen)] = 1;
      chosen = select(u, mask);
      if (chosen < 0) {
        throw RankDeficientSupport("omp: no independent atom left to add");
      }
      try {
        try_append(chosen);
      } catch (const NotPositiveDefinite& e) {
        throw RankDeficientSupport(std::string("omp: ") + e.what());
      }
    }
    mask[static_cast<std::size_t>(chosen)] = 1;
    sub.col(order) = dict.atom(chosen);
    rhs[order] = dict.atom(chosen).dot(x);
    coeffs = chol.solve(rhs.head(k));
    result.code.support.push_back(chosen);
    result.reconstruction = sub.leftCols(k) * coeffs;
    r = x - result.reconstruction;

    const double norm = r.norm();
    result.residual_norms.push_back(norm);
    result.selections.push_back({chosen});
    result.iterations = k;
    if (cfg.should_stop(k, norm)) {
      break;
    }
  }
  result.code.coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
  return result;
}

// Indices of the `count` largest |values| (descending, ties to the lowest
// index), skipping masked entries.
std::vector<Index> top_magnitudes(const Vector& values, Index count,
                                  std::span<const std::uint8_t> mask = {}) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) {
    if (mask.empty() || mask[static_cast<std::size_t>(i)] == 0) {
      idx.push_back(i);
    }
  }
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  if (static_cast<Index>(idx.size()) > count) {
    idx.resize(static_cast<std::size_t>(count));
  }
  return idx;
}

Vector ls_on_support(const Dictionary& dict, const std::vector<Index>& support, const Vector& x) {
  try {
    return ls_solve(gather_columns(dict.atoms(), support), x);
  } catch (const NotPositiveDefinite& e) {
    throw RankDeficientSupport(std::string("least squares on degenerate support: ") + e.what());
  }
}

} // namespace

PursuitResult omp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg) {
  return omp_loop(dict, x, cfg, [](const Vector& u, std::span<const std::uint8_t> mask) {
    return argmax_abs(u, mask);
  });
}

PursuitResult rand_omp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg,
                       const RandConfig& rand) {
  rand.validate();
  Rng rng(rand.seed);
  return omp_loop(dict, x, cfg, [&](const Vector& u, std::span<const std::uint8_t> mask) {
    return sample_thresholded(u, mask, rand.tau_factor, rng);
  });
}

PursuitResult mp(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg) {
  cfg.validate(dict.size());
  check_signal(dict, x);

  const Index m = dict.size();
  PursuitResult result;
  result.code.ambient_dim = m;
  result.residual_norms.push_back(x.norm());

  Vector alpha = Vector::Zero(m);
  Vector r = x;
  double floor = 0.0;
  for (Index k = 1; k <= cfg.max_cardinality && result.residual_norms.front() > 0.0; ++k) {
    const Vector u = dict.weighted_correlations(r);
    const Index chosen = argmax_abs(u);
    const double top = std::abs(u[chosen]);
    if (k == 1) {
      floor = kCorrelationFloor * top;
    }
    if (top <= floor) {
      break;
    }
    const double step = dict.weights()[chosen] * u[chosen];
    if (std::find(result.code.support.begin(), result.code.support.end(), chosen) ==
        result.code.support.end()) {
      result.code.support.push_back(chosen);
    }
    alpha[chosen] += step;
    r -= step * dict.atom(chosen);

    const double norm = r.norm();
    result.residual_norms.push_back(norm);
    result.selections.push_back({chosen});
    result.iterations = k;
    if (cfg.should_stop(k, norm)) {
      break;
    }
  }
  for (Index i : result.code.support) {
    result.code.coeffs.push_back(alpha[i]);
  }
  result.reconstruction = dict.atoms() * alpha;
  return result;
}

PursuitResult sp(const Dictionary& dict, const Vector& x, Index s, const SpOptions& opts) {
  const Index m = dict.size();
  if (s < 1 || s > m) {
    throw ValidationError("sp: cardinality must lie in [1, m]");
  }
  if (opts.max_iterations < 0) {
    throw ValidationError("sp: negative iteration cap");
  }
  check_signal(dict, x);

  PursuitResult result;
  result.code.ambient_dim = m;
  result.residual_norms.push_back(x.norm());

  const Vector u0 = dict.weighted_correlations(x);
  const double floor = kCorrelationFloor * max_abs(u0);

  std::vector<Index> support = top_magnitudes(u0, s);
  Vector coeffs = ls_on_support(dict, support, x);
  Vector recon = gather_columns(dict.atoms(), support) * coeffs;
  double norm = (x - recon).norm();
  result.residual_norms.push_back(norm);
  result.selections.push_back(support);
  result.iterations = 1;

  bool converged = false;
  for (Index k = 1; k <= opts.max_iterations; ++k) {
    const Vector u = dict.weighted_correlations(x - recon);
    if (max_abs(u) <= floor) {
      converged = true;
      break;
    }
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(m), 0);
    for (Index i : support) {
      mask[static_cast<std::size_t>(i)] = 1;
    }
    std::vector<Index> merged = support;
    for (Index i : top_magnitudes(u, s, mask)) {
      merged.push_back(i);
    }
    const Vector merged_coeffs = ls_on_support(dict, merged, x);

    // Prune by contribution magnitude |α_j|·‖d_j‖ (W_D⁻¹ α).
    Vector contribution(static_cast<Index>(merged.size()));
    for (std::size_t j = 0; j < merged.size(); ++j) {
      contribution[static_cast<Index>(j)] = merged_coeffs[static_cast<Index>(j)] /
                                            dict.weights()[merged[j]];
    }
    std::vector<Index> next;
    for (Index j : top_magnitudes(contribution, s)) {
      next.push_back(merged[static_cast<std::size_t>(j)]);
    }

    std::vector<Index> a = support;
    std::vector<Index> b = next;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) {
      converged = true;
      break;
    }

    const Vector next_coeffs = ls_on_support(dict, next, x);
    const Vector next_recon = gather_columns(dict.atoms(), next) * next_coeffs;
    const double next_norm = (x - next_recon).norm();
    if (next_norm > norm) {
      converged = true;
      break;
    }
    support = std::move(next);
    coeffs = next_coeffs;
    recon = next_recon;
    norm = next_norm;
    result.residual_norms.push_back(norm);
    result.selections.push_back(support);
    ++result.iterations;
  }
  result.iteration_cap_hit = !converged;
  result.code.support = support;
  result.code.coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
  result.reconstruction = recon;
  return result;
}

MmseEstimate mmse_estimate(const Dictionary& dict, const Vector& x, const PursuitConfig& cfg,
                           const RandConfig& rand, const MmseOptions& opts) {
  rand.validate();
  const Dictionary& synth = opts.synthesis ? *opts.synthesis : dict;
  if (synth.signal_dim() != dict.signal_dim() || synth.size() != dict.size()) {
    throw ShapeMismatch("mmse_estimate: synthesis dictionary shape differs from analysis");
  }
  MmseEstimate est;
  est.code = Vector::Zero(dict.size());
  for (Index i = 0; i < rand.draws; ++i) {
    RandConfig run = rand;
    run.seed = derive_seed(rand.seed, static_cast<std::uint64_t>(i));
    est.code += rand_omp(dict, x, cfg, run).code.to_dense();
  }
  Index terms = rand.draws;
  if (opts.include_map) {
    est.code += omp(dict, x, cfg).code.to_dense();
    ++terms;
  }
  est.code /= static_cast<double>(terms);
  est.reconstruction = synth.atoms() * est.code;
  return est;
}

Vector oracle_estimate(const Dictionary& dict, const std::vector<Index>& support, const Vector& x) {
  check_signal(dict, x);
  if (support.empty()) {
    return Vector::Zero(dict.signal_dim());
  }
  for (Index i : support) {
    if (i < 0 || i >= dict.size()) {
      throw ValidationError("oracle_estimate: support index out of range");
    }
  }
  const Matrix sub = gather_columns(dict.atoms(), support);
  return sub * ls_on_support(dict, support, x);
}

} // namespace greedynet
