#include "greedynet/lsp.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/selection.hpp"
#include "greedynet/units.hpp"

#include <algorithm>
#include <string>

namespace greedynet {

namespace {

struct Iterate {
  std::vector<Index> support;
  Vector coeffs;
  Vector recon;
  double norm = 0.0;
};

Iterate fit(const LgmParams& params, std::vector<Index> support, const Vector& x) {
  Iterate it;
  try {
    it.coeffs = ls_solve(gather_columns(params.analysis.atoms(), support), x);
  } catch (const NotPositiveDefinite& e) {
    throw RankDeficientSupport(std::string("l-sp: ") + e.what());
  }
  it.recon = gather_columns(params.synthesis.atoms(), support) * it.coeffs;
  it.norm = (x - it.recon).norm();
  it.support = std::move(support);
  return it;
}

} // namespace

UnrolledTrace lsp_forward(const LgmParams& params, const Vector& x, Index s,
                          const SpOptions& opts) {
  const Index m = params.size();
  if (s < 1 || s > m) {
    throw ValidationError("l-sp: cardinality must lie in [1, m]");
  }
  if (x.size() != params.signal_dim()) {
    throw_shape("l-sp input length", params.signal_dim(), x.size());
  }
  const Vector& w = params.analysis.weights();

  UnrolledTrace trace;
  const Vector u0 = params.analysis.weighted_correlations(x);
  const double floor = kCorrelationFloor * max_abs(u0);
  Iterate cur = fit(params, mspt_indices(u0, s), x);
  auto push = [&](const Iterate& it) {
    trace.reconstructions.push_back(it.recon);
    trace.residuals.push_back(x - it.recon);
  };
  push(cur);

  for (Index k = 1; k <= opts.max_iterations; ++k) {
    const Vector u = params.analysis.weighted_correlations(x - cur.recon);
    if (max_abs(u) <= floor) {
      break;
    }
    // Candidates come from outside the current support so the union has 2s
    // distinct atoms.
    std::vector<Index> outside;
    for (Index i = 0; i < m; ++i) {
      if (std::find(cur.support.begin(), cur.support.end(), i) == cur.support.end()) {
        outside.push_back(i);
      }
    }
    Vector u_out(static_cast<Index>(outside.size()));
    for (std::size_t j = 0; j < outside.size(); ++j) {
      u_out[static_cast<Index>(j)] = u[outside[j]];
    }
    std::vector<Index> merged = cur.support;
    for (Index j : mspt_indices(u_out, std::min<Index>(s, u_out.size()))) {
      merged.push_back(outside[static_cast<std::size_t>(j)]);
    }
    Vector merged_coeffs;
    try {
      merged_coeffs = ls_solve(gather_columns(params.analysis.atoms(), merged), x);
    } catch (const NotPositiveDefinite& e) {
      throw RankDeficientSupport(std::string("l-sp: ") + e.what());
    }
    Vector contribution(merged_coeffs.size());
    for (Index j = 0; j < merged_coeffs.size(); ++j) {
      contribution[j] = merged_coeffs[j] / w[merged[static_cast<std::size_t>(j)]];
    }
    std::vector<Index> next;
    for (Index j : mspt_indices(contribution, s)) {
      next.push_back(merged[static_cast<std::size_t>(j)]);
    }
    std::vector<Index> a = cur.support;
    std::vector<Index> b = next;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) {
      break;
    }
    Iterate cand = fit(params, std::move(next), x);
    if (cand.norm > cur.norm) {
      break;
    }
    cur = std::move(cand);
    push(cur);
  }

  trace.selected = cur.support;
  trace.code = Vector::Zero(m);
  for (std::size_t j = 0; j < cur.support.size(); ++j) {
    trace.code[cur.support[j]] = cur.coeffs[static_cast<Index>(j)];
  }
  trace.output = cur.recon;
  return trace;
}

} // namespace greedynet
