#include "greedynet/train.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/lmp.hpp"
#include "greedynet/parallel.hpp"
#include "greedynet/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace greedynet {

std::string to_string(ModelKind kind) {
  switch (kind) {
  case ModelKind::Lgm:
    return "lgm";
  case ModelKind::LgmTrueCardinality:
    return "lgm-true-cardinality";
  case ModelKind::LgmMmse:
    return "lgm-mmse";
  case ModelKind::Lmp:
    return "lmp";
  case ModelKind::Lista:
    return "lista";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k : {ModelKind::Lgm, ModelKind::LgmTrueCardinality, ModelKind::LgmMmse,
                      ModelKind::Lmp, ModelKind::Lista}) {
    if (to_string(k) == name) {
      return k;
    }
  }
  throw UnknownMethod("unknown model kind '" + name + "'");
}

void TrainConfig::validate() const {
  if (s < 1) {
    throw ValidationError("train: s must be at least 1");
  }
  if (!(eps >= 0.0)) {
    throw ValidationError("train: eps must be non-negative");
  }
  loss.validate();
  adam.validate();
  if (batch < 1 || epochs < 0) {
    throw ValidationError("train: batch must be >= 1 and epochs >= 0");
  }
  if (mmse_draws < 1 || !(tau_factor > 0.0 && tau_factor <= 1.0)) {
    throw ValidationError("train: invalid randomized-selection settings");
  }
  if (lista_layers < 1 || lista_lambda < 0.0) {
    throw ValidationError("train: invalid LISTA settings");
  }
}

Model Model::initial(ModelKind kind, const Matrix& init_dict, const TrainConfig& cfg) {
  Model m;
  m.kind = kind;
  if (kind == ModelKind::Lista) {
    m.lista = ListaParams::from_dictionary(init_dict, cfg.lista_layers, cfg.lista_lambda);
  } else {
    m.lgm = LgmParams::tied(init_dict);
  }
  return m;
}

namespace {

bool is_lgm_family(ModelKind k) {
  return k == ModelKind::Lgm || k == ModelKind::LgmTrueCardinality || k == ModelKind::LgmMmse;
}

PursuitConfig pursuit_config(const TrainConfig& cfg, Index m, Index true_cardinality,
                             ModelKind kind) {
  PursuitConfig pc;
  if (kind == ModelKind::LgmTrueCardinality) {
    pc.max_cardinality = std::min(true_cardinality, m);
    pc.stop_mode = StopMode::ExactCardinality;
  } else {
    pc.max_cardinality = std::min(cfg.s, m);
    pc.residual_threshold = cfg.eps;
  }
  return pc;
}

LgmMmseOptions mmse_options(const TrainConfig& cfg, std::uint64_t seed) {
  return {cfg.mmse_draws, cfg.tau_factor, seed, true};
}

struct Accumulator {
  LgmGradients lgm;
  ListaGradients lista;
  double squared_error = 0.0;
};

// Forward with recording plus backward of ‖x* − x̂‖² for one training signal.
void accumulate_sample(const Model& model, const TrainConfig& cfg, const LabeledDataset& data,
                       Index j, std::uint64_t seed, Accumulator& acc) {
  const Vector x = data.noisy.col(j);
  const Vector target = data.clean.col(j);
  const Index card = data.cardinality(j);
  switch (model.kind) {
  case ModelKind::Lgm:
  case ModelKind::LgmTrueCardinality: {
    GradientTape tape;
    const auto pc = pursuit_config(cfg, model.lgm.size(), card, model.kind);
    const UnrolledTrace t = lgm_forward(model.lgm, x, pc, {}, &tape);
    const Vector diff = target - t.output;
    acc.squared_error += diff.squaredNorm();
    lgm_backward_accumulate(tape, -2.0 * diff, acc.lgm);
    break;
  }
  case ModelKind::LgmMmse: {
    std::vector<GradientTape> tapes;
    const auto pc = pursuit_config(cfg, model.lgm.size(), card, model.kind);
    const LgmMmseResult r = lgm_mmse(model.lgm, x, pc, mmse_options(cfg, seed), &tapes);
    const Vector diff = target - r.output;
    acc.squared_error += diff.squaredNorm();
    const Vector g = -2.0 * diff / static_cast<double>(r.terms);
    for (const GradientTape& tape : tapes) {
      lgm_backward_accumulate(tape, g, acc.lgm);
    }
    break;
  }
  case ModelKind::Lmp: {
    GradientTape tape;
    const auto pc = pursuit_config(cfg, model.lgm.size(), card, model.kind);
    const UnrolledTrace t = lmp_forward(model.lgm, x, pc, &tape);
    const Vector diff = target - t.output;
    acc.squared_error += diff.squaredNorm();
    lmp_backward_accumulate(tape, -2.0 * diff, acc.lgm);
    break;
  }
  case ModelKind::Lista: {
    ListaTape tape;
    const ListaOutput out = lista_forward(model.lista, x, &tape);
    if (cfg.lista_supervised) {
      const Vector diff = Vector(data.codes.col(j)) - out.code;
      acc.squared_error += diff.squaredNorm();
      lista_backward_accumulate(model.lista, tape, -2.0 * diff, Vector(), acc.lista);
    } else {
      const Vector diff = target - out.reconstruction;
      acc.squared_error += diff.squaredNorm();
      lista_backward_accumulate(model.lista, tape, Vector(), -2.0 * diff, acc.lista);
    }
    break;
  }
  }
}

Accumulator zero_accumulator(const Model& model) {
  Accumulator acc;
  if (model.kind == ModelKind::Lista) {
    acc.lista = ListaGradients::zeros_like(model.lista);
  } else {
    acc.lgm = LgmGradients::zeros_like(model.lgm, nullptr);
  }
  return acc;
}

double count_nonzeros(const Vector& v) {
  double c = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    c += v[i] != 0.0 ? 1.0 : 0.0;
  }
  return c;
}

// Trainable tensors of a model, in a fixed order, plus write-back.
class TensorView {
public:
  explicit TensorView(const Model& model) : kind_(model.kind) {
    if (kind_ == ModelKind::Lista) {
      tensors_ = {model.lista.w, model.lista.d1, model.lista.d2, model.lista.theta};
    } else {
      Matrix dc(2, 1);
      dc << model.lgm.dc_scale_analysis, model.lgm.dc_scale_synthesis;
      tensors_ = {model.lgm.analysis.atoms(), model.lgm.synthesis.atoms(), dc};
    }
  }

  std::vector<Matrix*> pointers() {
    std::vector<Matrix*> out;
    for (Matrix& t : tensors_) {
      out.push_back(&t);
    }
    return out;
  }

  void write_back(Model& model) const {
    if (kind_ == ModelKind::Lista) {
      model.lista.w = tensors_[0];
      model.lista.d1 = tensors_[1];
      model.lista.d2 = tensors_[2];
      model.lista.theta = tensors_[3].col(0).cwiseMax(0.0);
    } else {
      model.lgm.dc_scale_analysis = tensors_[2](0, 0);
      model.lgm.dc_scale_synthesis = tensors_[2](1, 0);
      model.lgm.assign(tensors_[0], tensors_[1]);
    }
  }

  // Keeps the optimizer's copy of θ inside the feasible set.
  void clamp(const Model& model) {
    if (kind_ == ModelKind::Lista) {
      tensors_[3].col(0) = model.lista.theta;
    }
  }

private:
  ModelKind kind_;
  std::vector<Matrix> tensors_;
};

void add_coherence(const Model& model, const LossConfig& loss, Accumulator& acc) {
  if (!is_lgm_family(model.kind) && model.kind != ModelKind::Lmp) {
    return;
  }
  if (loss.xi <= 0.0) {
    return;
  }
  const auto fold = [&](const Matrix& dict, Matrix& grad, double& dc_grad) {
    Matrix g = loss.xi * mutual_coherence_gradient(dict);
    if (auto dc = model.lgm.dc_index()) {
      dc_grad += g.col(*dc).sum();
      g.col(*dc).setZero();
    }
    grad += g;
  };
  fold(model.lgm.analysis.atoms(), acc.lgm.analysis, acc.lgm.dc_scale_analysis);
  fold(model.lgm.synthesis.atoms(), acc.lgm.synthesis, acc.lgm.dc_scale_synthesis);
}

EpochRecord make_record(const Model& model, Index epoch, const LabeledDataset& train_set,
                        const LabeledDataset& test_set, const TrainConfig& cfg,
                        const Matrix* true_dict) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.train_loss = train_set.size() > 0 ? evaluate_model(model, train_set, cfg).mse : 0.0;
  if (test_set.size() > 0) {
    const EvalStats st = evaluate_model(model, test_set, cfg);
    rec.test_mse = st.mse;
    rec.card_mean = st.card_mean;
    rec.card_std = st.card_std;
  }
  rec.dict_distance = std::numeric_limits<double>::quiet_NaN();
  rec.dict_distance_synthesis = std::numeric_limits<double>::quiet_NaN();
  if (true_dict) {
    if (model.kind == ModelKind::Lista) {
      rec.dict_distance = dictionary_distance(*true_dict, model.lista.d1);
      rec.dict_distance_synthesis = dictionary_distance(*true_dict, model.lista.d2);
    } else {
      rec.dict_distance = dictionary_distance(*true_dict, model.lgm.analysis.atoms());
      rec.dict_distance_synthesis = dictionary_distance(*true_dict, model.lgm.synthesis.atoms());
    }
  }
  return rec;
}

} // namespace

Vector predict(const Model& model, const TrainConfig& cfg, const Vector& x, Index true_cardinality,
               std::uint64_t seed, Vector* code) {
  switch (model.kind) {
  case ModelKind::Lgm:
  case ModelKind::LgmTrueCardinality: {
    const auto pc = pursuit_config(cfg, model.lgm.size(), true_cardinality, model.kind);
    UnrolledTrace t = lgm_forward(model.lgm, x, pc);
    if (code) {
      *code = std::move(t.code);
    }
    return t.output;
  }
  case ModelKind::LgmMmse: {
    const auto pc = pursuit_config(cfg, model.lgm.size(), true_cardinality, model.kind);
    LgmMmseResult r = lgm_mmse(model.lgm, x, pc, mmse_options(cfg, seed));
    if (code) {
      *code = std::move(r.code);
    }
    return r.output;
  }
  case ModelKind::Lmp: {
    const auto pc = pursuit_config(cfg, model.lgm.size(), true_cardinality, model.kind);
    UnrolledTrace t = lmp_forward(model.lgm, x, pc);
    if (code) {
      *code = std::move(t.code);
    }
    return t.output;
  }
  case ModelKind::Lista: {
    ListaOutput out = lista_forward(model.lista, x);
    if (code) {
      *code = std::move(out.code);
    }
    return out.reconstruction;
  }
  }
  throw UnknownMethod("predict: unknown model kind");
}

EvalStats evaluate_model(const Model& model, const LabeledDataset& data, const TrainConfig& cfg) {
  const Index count = data.size();
  if (count == 0) {
    throw EmptyBatch("evaluate_model: empty dataset");
  }
  std::vector<double> err(static_cast<std::size_t>(count));
  std::vector<double> card(static_cast<std::size_t>(count));
  const std::uint64_t eval_seed = derive_seed(cfg.seed, 0x65766131ull);
  parallel_for(static_cast<std::size_t>(count), cfg.threads, [&](std::size_t jj) {
    const auto j = static_cast<Index>(jj);
    Vector code;
    const Vector out = predict(model, cfg, data.noisy.col(j), data.cardinality(j),
                               derive_seed(eval_seed, jj), &code);
    err[jj] = (Vector(data.clean.col(j)) - out).squaredNorm();
    card[jj] = count_nonzeros(code);
  });
  EvalStats st;
  for (std::size_t j = 0; j < err.size(); ++j) {
    st.mse += err[j];
    st.card_mean += card[j];
  }
  st.mse /= static_cast<double>(count);
  st.card_mean /= static_cast<double>(count);
  for (double c : card) {
    st.card_std += (c - st.card_mean) * (c - st.card_mean);
  }
  st.card_std = std::sqrt(st.card_std / static_cast<double>(count));
  return st;
}

TrainRun train(Model& model, const LabeledDataset& train_set, const LabeledDataset& test_set,
               const TrainConfig& cfg, const Matrix* true_dict) {
  cfg.validate();
  if (train_set.size() == 0) {
    throw EmptyBatch("train: empty training set");
  }
  if (model.kind != cfg.model) {
    throw ValidationError("train: model kind differs from the configuration");
  }

  TrainRun run;
  run.initial = make_record(model, 0, train_set, test_set, cfg, true_dict);

  TensorView view(model);
  std::vector<const Matrix*> shapes;
  for (Matrix* t : view.pointers()) {
    shapes.push_back(t);
  }
  Adam adam(cfg.adam, shapes);

  Rng shuffle_rng(derive_seed(cfg.seed, 0x73687566ull));
  std::vector<Index> order(static_cast<std::size_t>(train_set.size()));
  std::iota(order.begin(), order.end(), Index{0});
  Index step = 0;

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng() % i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      const std::size_t size = stop - start;
      const unsigned workers = static_cast<unsigned>(
          std::min<std::size_t>(cfg.threads == 0 ? default_threads() : cfg.threads, size));
      std::vector<Accumulator> accs(workers, zero_accumulator(model));
      const std::uint64_t batch_seed = derive_seed(cfg.seed, 0x1000000ull + static_cast<std::uint64_t>(step));
      parallel_chunks(size, workers, [&](unsigned w, std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
          accumulate_sample(model, cfg, train_set, order[start + k], derive_seed(batch_seed, k),
                            accs[w]);
        }
      });
      Accumulator total = std::move(accs[0]);
      for (std::size_t w = 1; w < accs.size(); ++w) {
        total.squared_error += accs[w].squared_error;
        if (model.kind == ModelKind::Lista) {
          total.lista.w += accs[w].lista.w;
          total.lista.d1 += accs[w].lista.d1;
          total.lista.d2 += accs[w].lista.d2;
          total.lista.theta += accs[w].lista.theta;
        } else {
          total.lgm += accs[w].lgm;
        }
      }
      if (cfg.loss.kind == LossKind::LogSumL2 && total.squared_error > 0.0) {
        const double scale = 1.0 / total.squared_error;
        if (model.kind == ModelKind::Lista) {
          total.lista.w *= scale;
          total.lista.d1 *= scale;
          total.lista.d2 *= scale;
          total.lista.theta *= scale;
        } else {
          total.lgm *= scale;
        }
      }
      add_coherence(model, cfg.loss, total);

      std::vector<const Matrix*> grads;
      Matrix dc_grad(2, 1);
      Matrix theta_grad;
      if (model.kind == ModelKind::Lista) {
        theta_grad = total.lista.theta;
        grads = {&total.lista.w, &total.lista.d1, &total.lista.d2, &theta_grad};
      } else {
        dc_grad << total.lgm.dc_scale_analysis, total.lgm.dc_scale_synthesis;
        grads = {&total.lgm.analysis, &total.lgm.synthesis, &dc_grad};
      }
      adam.step(view.pointers(), grads);
      view.write_back(model);
      view.clamp(model);
      ++step;
    }
    adam.end_epoch();
    run.history.push_back(make_record(model, epoch, train_set, test_set, cfg, true_dict));
  }
  return run;
}

std::string TrainRun::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,train_loss,test_mse,card_mean,card_std,dict_distance,dict_distance_synthesis\n";
  auto row = [&](const EpochRecord& r) {
    os << r.epoch << ',' << r.train_loss << ',' << r.test_mse << ',' << r.card_mean << ','
       << r.card_std << ',' << r.dict_distance << ',' << r.dict_distance_synthesis << '\n';
  };
  row(initial);
  for (const EpochRecord& r : history) {
    row(r);
  }
  return os.str();
}

} // namespace greedynet
