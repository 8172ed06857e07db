#pragma once

#include "greedynet/lgm.hpp"
#include "greedynet/lista.hpp"
#include "greedynet/synthetic.hpp"

#include <string>
#include <vector>

namespace greedynet {

/// Method names accepted by evaluate_methods:
/// lgm, lgm-true-cardinality, lgm-post-mmse, lgm-mmse, lista,
/// omp-true-dict, omp-true-dict-cardinality, omp-true-dict-mmse, oracle.
const std::vector<std::string>& known_methods();

struct EvalContext {
  const Matrix* true_dict = nullptr;
  /// Trained models; a method whose model is missing raises ValidationError.
  const LgmParams* lgm = nullptr;
  const LgmParams* lgm_true_cardinality = nullptr;
  const LgmParams* lgm_mmse = nullptr;
  const ListaParams* lista = nullptr;
  Index s = 15;
  /// Residual threshold; negative means σ√n of each dataset.
  double eps = -1.0;
  Index mmse_draws = 5;
  double tau_factor = 0.8;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ResultRow {
  std::string method;
  double sigma = 0.0;
  double mse = 0.0;
  double card_mean = 0.0;
  double card_std = 0.0;
};

/// One row per (method, dataset). The oracle row is always included.
/// Throws UnknownMethod for unrecognized names.
std::vector<ResultRow> evaluate_methods(const std::vector<const LabeledDataset*>& datasets,
                                        const std::vector<std::string>& methods,
                                        const EvalContext& ctx);

/// method,sigma,mse,card_mean,card_std
std::string results_csv(const std::vector<ResultRow>& rows);

} // namespace greedynet
