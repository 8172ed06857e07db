#pragma once

#include "greedynet/adam.hpp"
#include "greedynet/lgm.hpp"
#include "greedynet/lista.hpp"
#include "greedynet/losses.hpp"
#include "greedynet/synthetic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace greedynet {

enum class ModelKind { Lgm, LgmTrueCardinality, LgmMmse, Lmp, Lista };

std::string to_string(ModelKind kind);
/// Accepts lgm, lgm-true-cardinality, lgm-mmse, lmp, lista. Throws UnknownMethod.
ModelKind parse_model_kind(const std::string& name);

struct TrainConfig {
  ModelKind model = ModelKind::Lgm;
  /// Maximum layers (cardinality) for the greedy models.
  Index s = 15;
  /// Residual threshold, usually σ√n.
  double eps = 0.0;
  LossConfig loss{LossKind::SumL2, 5e-5};
  AdamConfig adam{0.002};
  Index batch = 50;
  Index epochs = 10;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Randomized LGM.
  Index mmse_draws = 5;
  double tau_factor = 0.8;
  // LISTA.
  Index lista_layers = 7;
  double lista_lambda = 0.05;
  /// Train LISTA against the true codes instead of the clean signals.
  bool lista_supervised = false;

  void validate() const;
};

struct Model {
  ModelKind kind = ModelKind::Lgm;
  LgmParams lgm;
  ListaParams lista;

  /// Every learned dictionary starts from `init_dict`.
  static Model initial(ModelKind kind, const Matrix& init_dict, const TrainConfig& cfg);
};

struct EpochRecord {
  Index epoch = 0;
  /// Mean ‖x* − x̂‖² over the training set after the epoch.
  double train_loss = 0.0;
  /// Mean ‖x* − x̂‖² over the test set.
  double test_mse = 0.0;
  double card_mean = 0.0;
  double card_std = 0.0;
  /// Distance of the analysis (LISTA: D1) and synthesis (D2) dictionaries to
  /// the true one; NaN when unknown.
  double dict_distance = 0.0;
  double dict_distance_synthesis = 0.0;
};

struct TrainRun {
  EpochRecord initial;
  std::vector<EpochRecord> history;

  /// Header plus the initial record (epoch 0) and one row per epoch.
  std::string to_csv() const;
};

struct EvalStats {
  double mse = 0.0;
  double card_mean = 0.0;
  double card_std = 0.0;
};

/// Denoises every noisy column and compares with the clean one. Randomized
/// models seed signal j with derive_seed(seed, j).
EvalStats evaluate_model(const Model& model, const LabeledDataset& data, const TrainConfig& cfg);

/// Output (and dense code) of `model` on one signal.
Vector predict(const Model& model, const TrainConfig& cfg, const Vector& x, Index true_cardinality,
               std::uint64_t seed, Vector* code = nullptr);

/// Shuffled mini-batches of summed loss, exact gradients and ADAM. The
/// returned run has one record per completed epoch. `true_dict` enables the
/// dictionary distance columns.
TrainRun train(Model& model, const LabeledDataset& train_set, const LabeledDataset& test_set,
               const TrainConfig& cfg, const Matrix* true_dict = nullptr);

} // namespace greedynet
