#include "support.hpp"

#include "greedynet/adam.hpp"
#include "greedynet/checkpoint.hpp"
#include "greedynet/errors.hpp"
#include "greedynet/losses.hpp"
#include "greedynet/synthetic.hpp"
#include "greedynet/train.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <string>

namespace greedynet {
namespace {

using testing::central_difference;
using testing::gaussian;
using testing::relative_error;

// ---------------------------------------------------------------- coherence

TEST(Coherence, IdentityIsZero) { EXPECT_EQ(mutual_coherence(Matrix::Identity(5, 5)), 0.0); }

TEST(Coherence, DuplicatedAtomIsOne) {
  Rng rng(1);
  Matrix d = gaussian(6, 4, rng);
  d.col(3) = -2.0 * d.col(1);
  EXPECT_NEAR(mutual_coherence(d), 1.0, 1e-15);
  const CoherencePair p = coherence_pair(d);
  EXPECT_EQ(p.i, 1);
  EXPECT_EQ(p.j, 3);
}

TEST(Coherence, MatchesBruteForce) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Matrix d = gaussian(10, 20, rng);
    double best = 0.0;
    for (Index i = 0; i < 20; ++i) {
      for (Index j = i + 1; j < 20; ++j) {
        best = std::max(best, std::abs(d.col(i).dot(d.col(j))) / (d.col(i).norm() * d.col(j).norm()));
      }
    }
    EXPECT_NEAR(mutual_coherence(d), best, 1e-15);
    EXPECT_GE(mutual_coherence(d), 0.0);
    EXPECT_LE(mutual_coherence(d), 1.0);
  }
}

TEST(Coherence, Errors) {
  EXPECT_THROW(mutual_coherence(Matrix::Ones(3, 1)), ValidationError);
  Matrix d = Matrix::Ones(3, 2);
  d.col(1).setZero();
  EXPECT_THROW(mutual_coherence(d), ZeroAtom);
}

TEST(Coherence, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  Matrix d = gaussian(6, 5, rng);
  const Matrix g = mutual_coherence_gradient(d);
  EXPECT_LT(relative_error(g, central_difference(d, [&] { return mutual_coherence(d); })), 1e-6);
}

// ---------------------------------------------------------------- loss

TEST(Loss, PerfectReconstructionIsZero) {
  Rng rng(4);
  const Matrix x = gaussian(4, 3, rng);
  const LossResult r = loss(x, x, {}, LossConfig{LossKind::SumL2, 0.0});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.output_grad, Matrix::Zero(4, 3));
}

TEST(Loss, EmptyBatchThrows) {
  EXPECT_THROW(loss(Matrix(4, 0), Matrix(4, 0), {}, LossConfig{}), EmptyBatch);
}

TEST(Loss, NegativeXiRejected) {
  EXPECT_THROW((LossConfig{LossKind::SumL2, -1.0}).validate(), ValidationError);
}

void check_loss_gradient(LossKind kind) {
  Rng rng(5);
  Matrix out = gaussian(5, 4, rng);
  const Matrix target = gaussian(5, 4, rng);
  Matrix d1 = gaussian(5, 6, rng);
  Matrix d2 = gaussian(5, 6, rng);
  const LossConfig cfg{kind, 0.3};
  const auto f = [&] {
    const std::array<const Matrix*, 2> dicts{&d1, &d2};
    return loss(out, target, dicts, cfg).value;
  };
  const std::array<const Matrix*, 2> dicts{&d1, &d2};
  const LossResult r = loss(out, target, dicts, cfg);
  EXPECT_NEAR(r.coherence, mutual_coherence(d1) + mutual_coherence(d2), 1e-15);
  ASSERT_EQ(r.dict_grads.size(), 2u);
  EXPECT_LT(relative_error(r.output_grad, central_difference(out, f)), 1e-6);
  EXPECT_LT(relative_error(r.dict_grads[0], central_difference(d1, f)), 1e-6);
  EXPECT_LT(relative_error(r.dict_grads[1], central_difference(d2, f)), 1e-6);
}

TEST(Loss, SumGradientMatchesFiniteDifferences) { check_loss_gradient(LossKind::SumL2); }
TEST(Loss, LogSumGradientMatchesFiniteDifferences) { check_loss_gradient(LossKind::LogSumL2); }

TEST(Loss, LogSumValue) {
  Matrix out = Matrix::Zero(2, 2);
  Matrix target(2, 2);
  target << 1, 0, 2, 0;
  const LossResult r = loss(out, target, {}, LossConfig{LossKind::LogSumL2, 0.0});
  EXPECT_DOUBLE_EQ(r.value, std::log(5.0));
  EXPECT_DOUBLE_EQ(r.squared_error, 5.0);
}

// ---------------------------------------------------------------- Adam

TEST(Adam, ZeroGradientIsIdentity) {
  Rng rng(6);
  Matrix p = gaussian(3, 4, rng);
  const Matrix before = p;
  const Matrix zero = Matrix::Zero(3, 4);
  const std::array<const Matrix*, 1> cp{&p};
  Adam adam(AdamConfig{0.01}, cp);
  const std::array<Matrix*, 1> ps{&p};
  const std::array<const Matrix*, 1> gs{&zero};
  for (int i = 0; i < 5; ++i) adam.step(ps, gs);
  EXPECT_EQ(p, before);
  EXPECT_EQ(adam.steps(), 5);
}

TEST(Adam, FirstStepClosedForm) {
  Matrix p(1, 3);
  p << 1.0, -2.0, 0.5;
  Matrix g(1, 3);
  g << 0.3, -4.0, 1e-3;
  const Matrix before = p;
  const AdamConfig cfg{0.002};
  const std::array<const Matrix*, 1> cp{&p};
  Adam adam(cfg, cp);
  const std::array<Matrix*, 1> ps{&p};
  const std::array<const Matrix*, 1> gs{&g};
  adam.step(ps, gs);
  // m̂ = g and v̂ = g² after one bias-corrected step.
  for (Index k = 0; k < 3; ++k) {
    const double expected = before(0, k) - cfg.lr * g(0, k) / (std::abs(g(0, k)) + cfg.eps);
    EXPECT_NEAR(p(0, k), expected, 1e-15);
  }
}

TEST(Adam, TwoStepOracle) {
  Matrix p(1, 1);
  p << 0.0;
  const AdamConfig cfg{0.1, 0.9, 0.999, 1e-8};
  const std::array<const Matrix*, 1> cp{&p};
  Adam adam(cfg, cp);
  const std::array<Matrix*, 1> ps{&p};
  Matrix g(1, 1);
  const std::array<const Matrix*, 1> gs{&g};
  double m = 0.0, v = 0.0, ref = 0.0;
  for (int t = 1; t <= 2; ++t) {
    g(0, 0) = t == 1 ? 1.0 : -3.0;
    adam.step(ps, gs);
    m = 0.9 * m + 0.1 * g(0, 0);
    v = 0.999 * v + 0.001 * g(0, 0) * g(0, 0);
    ref -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(p(0, 0), ref, 1e-14);
}

TEST(Adam, DecaySchedule) {
  Matrix p = Matrix::Zero(1, 1);
  const std::array<const Matrix*, 1> cp{&p};
  Adam adam(AdamConfig{1.0, 0.9, 0.999, 1e-8, 0.5, 2}, cp);
  adam.end_epoch();
  EXPECT_EQ(adam.learning_rate(), 1.0);
  adam.end_epoch();
  EXPECT_EQ(adam.learning_rate(), 0.5);
  adam.end_epoch();
  adam.end_epoch();
  EXPECT_EQ(adam.learning_rate(), 0.25);
}

TEST(Adam, ShapeChangeThrows) {
  Matrix p = Matrix::Zero(2, 2);
  const std::array<const Matrix*, 1> cp{&p};
  Adam adam(AdamConfig{}, cp);
  Matrix q = Matrix::Zero(3, 2);
  const std::array<Matrix*, 1> ps{&q};
  const std::array<const Matrix*, 1> gs{&q};
  EXPECT_THROW(adam.step(ps, gs), ShapeMismatch);
}

// ---------------------------------------------------------------- train

struct TinyProblem {
  Matrix d_true;
  Matrix init;
  LabeledDataset train_set;
  LabeledDataset test_set;
};

TinyProblem tiny_problem() {
  TinyProblem p;
  p.d_true = random_dictionary(16, 32, 40);
  p.init = random_dictionary(16, 32, 41);
  p.train_set = gen_dataset(p.d_true, {3}, 200, 0.02, 42);
  p.test_set = gen_dataset(p.d_true, {3}, 50, 0.02, 43);
  return p;
}

TrainConfig tiny_config(ModelKind kind) {
  TrainConfig cfg;
  cfg.model = kind;
  cfg.s = 3;
  cfg.eps = 0.02 * 4.0;
  cfg.adam.lr = kind == ModelKind::Lista ? 1e-3 : 0.002;
  cfg.batch = 20;
  cfg.epochs = 5;
  cfg.seed = 44;
  cfg.lista_layers = 3;
  cfg.mmse_draws = 2;
  return cfg;
}

Index count_upticks(const TrainRun& run) {
  Index n = 0;
  double prev = run.initial.train_loss;
  for (const EpochRecord& r : run.history) {
    if (r.train_loss > prev) ++n;
    prev = r.train_loss;
  }
  return n;
}

TEST(Train, ModelKindNames) {
  for (ModelKind k : {ModelKind::Lgm, ModelKind::LgmTrueCardinality, ModelKind::LgmMmse,
                      ModelKind::Lmp, ModelKind::Lista}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_model_kind("nope"), UnknownMethod);
}

TEST(Train, ZeroEpochsRecordsInitialMetricsOnly) {
  const TinyProblem p = tiny_problem();
  TrainConfig cfg = tiny_config(ModelKind::Lgm);
  cfg.epochs = 0;
  Model model = Model::initial(cfg.model, p.init, cfg);
  const Matrix before = model.lgm.analysis.atoms();
  const TrainRun run = train(model, p.train_set, p.test_set, cfg, &p.d_true);
  EXPECT_TRUE(run.history.empty());
  EXPECT_EQ(model.lgm.analysis.atoms(), before);
  EXPECT_NEAR(run.initial.dict_distance, dictionary_distance(p.d_true, p.init), 1e-15);
  EXPECT_EQ(run.initial.test_mse, evaluate_model(model, p.test_set, cfg).mse);
}

class TinyTrain : public ::testing::TestWithParam<ModelKind> {};

TEST_P(TinyTrain, LossMostlyDecreases) {
  const TinyProblem p = tiny_problem();
  const TrainConfig cfg = tiny_config(GetParam());
  Model model = Model::initial(cfg.model, p.init, cfg);
  const TrainRun run = train(model, p.train_set, p.test_set, cfg, &p.d_true);
  ASSERT_EQ(static_cast<Index>(run.history.size()), cfg.epochs);
  EXPECT_LE(count_upticks(run), 2);
  EXPECT_LT(run.history.back().train_loss, run.initial.train_loss);
}

INSTANTIATE_TEST_SUITE_P(Kinds, TinyTrain,
                         ::testing::Values(ModelKind::Lgm, ModelKind::LgmTrueCardinality,
                                           ModelKind::LgmMmse, ModelKind::Lmp, ModelKind::Lista),
                         [](const auto& info) {
                           std::string name = to_string(info.param);
                           std::erase(name, '-');
                           return name;
                         });

TEST(Train, LgmReducesDictionaryDistance) {
  const TinyProblem p = tiny_problem();
  TrainConfig cfg = tiny_config(ModelKind::Lgm);
  cfg.epochs = 10;
  Model model = Model::initial(cfg.model, p.init, cfg);
  const TrainRun run = train(model, p.train_set, p.test_set, cfg, &p.d_true);
  EXPECT_LT(run.history.back().dict_distance, run.initial.dict_distance);
}

TEST(Train, BitReproducible) {
  const TinyProblem p = tiny_problem();
  const TrainConfig cfg = tiny_config(ModelKind::Lgm);
  Model a = Model::initial(cfg.model, p.init, cfg);
  Model b = Model::initial(cfg.model, p.init, cfg);
  const std::string csv_a = train(a, p.train_set, p.test_set, cfg, &p.d_true).to_csv();
  const std::string csv_b = train(b, p.train_set, p.test_set, cfg, &p.d_true).to_csv();
  EXPECT_EQ(csv_a, csv_b);
  EXPECT_EQ(a.lgm.analysis.atoms(), b.lgm.analysis.atoms());
  EXPECT_EQ(a.lgm.synthesis.atoms(), b.lgm.synthesis.atoms());
}

TEST(Train, WorkersReproducibleAndAgreeUpToRounding) {
  const TinyProblem p = tiny_problem();
  TrainConfig cfg = tiny_config(ModelKind::Lgm);
  cfg.epochs = 2;
  Model serial = Model::initial(cfg.model, p.init, cfg);
  train(serial, p.train_set, p.test_set, cfg);
  cfg.threads = 3;
  Model a = Model::initial(cfg.model, p.init, cfg);
  Model b = Model::initial(cfg.model, p.init, cfg);
  train(a, p.train_set, p.test_set, cfg);
  train(b, p.train_set, p.test_set, cfg);
  // Fixed worker count: fixed partition and reduction order.
  EXPECT_EQ(a.lgm.analysis.atoms(), b.lgm.analysis.atoms());
  // Other counts regroup the batch sum, so only rounding differs.
  EXPECT_LT(relative_error(a.lgm.analysis.atoms(), serial.lgm.analysis.atoms()), 1e-10);
}

TEST(Train, CsvHasOneRowPerEpochPlusInitial) {
  const TinyProblem p = tiny_problem();
  TrainConfig cfg = tiny_config(ModelKind::Lmp);
  cfg.epochs = 2;
  Model model = Model::initial(cfg.model, p.init, cfg);
  const std::string csv = train(model, p.train_set, p.test_set, cfg).to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("epoch,train_loss,test_mse,card_mean,card_std,dict_distance", 0), 0u);
}

TEST(Train, ConfigValidation) {
  TrainConfig cfg;
  cfg.batch = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.s = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.adam.lr = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

// ---------------------------------------------------------------- checkpoints

class TempDir {
public:
  TempDir() {
    path_ = std::filesystem::temp_directory_path() /
            ("greedynet_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

TEST(Checkpoint, LgmRoundTripIsBitExact) {
  const TinyProblem p = tiny_problem();
  TrainConfig cfg = tiny_config(ModelKind::Lgm);
  cfg.epochs = 1;
  Model model = Model::initial(cfg.model, p.init, cfg);
  train(model, p.train_set, p.test_set, cfg);

  TempDir dir;
  save_checkpoint(dir.path() / "model.json", to_checkpoint(model));
  const Model loaded = model_from_checkpoint(load_checkpoint(dir.path() / "model.json"));
  EXPECT_EQ(loaded.kind, model.kind);
  EXPECT_EQ(loaded.lgm.analysis.atoms(), model.lgm.analysis.atoms());
  EXPECT_EQ(loaded.lgm.synthesis.atoms(), model.lgm.synthesis.atoms());
  const Vector x = p.test_set.noisy.col(0);
  EXPECT_EQ(predict(loaded, cfg, x, 3, 0), predict(model, cfg, x, 3, 0));
}

TEST(Checkpoint, ListaRoundTripIsBitExact) {
  const TinyProblem p = tiny_problem();
  const TrainConfig cfg = tiny_config(ModelKind::Lista);
  const Model model = Model::initial(cfg.model, p.init, cfg);
  TempDir dir;
  save_checkpoint(dir.path() / "lista.json", to_checkpoint(model));
  const Model loaded = model_from_checkpoint(load_checkpoint(dir.path() / "lista.json"));
  EXPECT_EQ(loaded.lista.w, model.lista.w);
  EXPECT_EQ(loaded.lista.d1, model.lista.d1);
  EXPECT_EQ(loaded.lista.d2, model.lista.d2);
  EXPECT_EQ(loaded.lista.theta, model.lista.theta);
  EXPECT_EQ(loaded.lista.layers, model.lista.layers);
}

TEST(Checkpoint, MissingTensorThrows) {
  Checkpoint c;
  c.add("a", Matrix::Zero(1, 1));
  EXPECT_THROW(c.at("b"), ValidationError);
  EXPECT_THROW(c.meta_at("kind"), ValidationError);
}

TEST(Checkpoint, MissingFileThrows) {
  EXPECT_THROW(load_checkpoint("/nonexistent/greedynet.json"), IoError);
}

} // namespace
} // namespace greedynet
