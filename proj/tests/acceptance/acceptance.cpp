// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include "greedynet/csc.hpp"
#include "greedynet/denoiser.hpp"
#include "greedynet/evaluate.hpp"
#include "greedynet/image.hpp"
#include "greedynet/lgm.hpp"
#include "greedynet/losses.hpp"
#include "greedynet/pursuit.hpp"
#include "greedynet/random.hpp"
#include "greedynet/synthetic.hpp"
#include "greedynet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#ifndef GREEDYNET_TEST_DATA_DIR
#error "GREEDYNET_TEST_DATA_DIR must point at tests/data"
#endif

using namespace greedynet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix gaussian(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      m(i, j) = standard_normal(rng);
    }
  }
  return m;
}

Vector gaussian(Index n, Rng& rng) { return gaussian(n, 1, rng).col(0); }

// Random dictionary whose atoms have norms in [0.5, 2] so that the W_D weights
// matter.
Matrix scaled_random_dictionary(Index n, Index m, Rng& rng) {
  Matrix d = gaussian(n, m, rng);
  for (Index j = 0; j < m; ++j) {
    d.col(j) *= (0.5 + 1.5 * uniform01(rng)) / d.col(j).norm();
  }
  return d;
}

// Signal with a planted random support of size k.
Vector planted_signal(const Matrix& d, Index k, Rng& rng, std::vector<Index>* support = nullptr) {
  std::vector<Index> idx(static_cast<std::size_t>(d.cols()));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng() % static_cast<std::uint64_t>(d.cols() - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Vector x = Vector::Zero(d.rows());
  for (Index i = 0; i < k; ++i) {
    const double mag = 0.2 + 0.8 * uniform01(rng);
    x += (rng() & 1 ? mag : -mag) * d.col(idx[static_cast<std::size_t>(i)]);
  }
  if (support) {
    support->assign(idx.begin(), idx.begin() + k);
  }
  return x;
}

// 1. lgm_forward with tied dictionaries reproduces omp.
Outcome unrolling_fidelity() {
  const auto t0 = Clock::now();
  Rng rng(101);
  const Index n = 64, m = 128;
  Index support_mismatch = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix d = scaled_random_dictionary(n, m, rng);
    const Index s = 1 + static_cast<Index>(rng() % 12);
    const Vector x = planted_signal(d, 1 + static_cast<Index>(rng() % 12), rng) + 0.05 * gaussian(n, rng);
    PursuitConfig cfg;
    cfg.max_cardinality = s;
    cfg.residual_threshold = trial % 2 == 0 ? 0.0 : 0.5 * uniform01(rng) * x.norm();
    const PursuitResult ref = omp(Dictionary(d), x, cfg);
    const UnrolledTrace net = lgm_forward(LgmParams::tied(d), x, cfg);
    if (net.selected != ref.code.support) {
      ++support_mismatch;
      continue;
    }
    worst = std::max(worst, (net.code - ref.code.to_dense()).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {support_mismatch == 0 && worst < 1e-8 && secs < 60.0,
          fmt("1000 instances, support mismatches %ld, max |coef diff| %.3e, %.1f s",
              static_cast<long>(support_mismatch), worst, secs)};
}

// 2. batch_omp matches omp column by column.
Outcome batch_equivalence() {
  const auto t0 = Clock::now();
  const Index n = 100, m = 400;
  const double sigma = 0.04;
  const Matrix d = make_dct_dictionary(n, m);
  const LabeledDataset data = gen_dataset(d, {10}, 500, sigma, 202);
  PursuitConfig cfg;
  cfg.max_cardinality = 15;
  cfg.residual_threshold = sigma * std::sqrt(static_cast<double>(n));
  const Dictionary dict(d);
  const std::vector<PursuitResult> batch = batch_omp(dict, data.noisy, cfg);
  Index support_mismatch = 0;
  double worst = 0.0;
  for (Index j = 0; j < data.size(); ++j) {
    const PursuitResult ref = omp(dict, data.noisy.col(j), cfg);
    const PursuitResult& got = batch[static_cast<std::size_t>(j)];
    if (got.code.support != ref.code.support) {
      ++support_mismatch;
      continue;
    }
    for (std::size_t k = 0; k < ref.code.coeffs.size(); ++k) {
      worst = std::max(worst, std::abs(got.code.coeffs[k] - ref.code.coeffs[k]));
    }
  }
  const double secs = seconds_since(t0);
  return {support_mismatch == 0 && worst < 1e-8 && secs < 120.0,
          fmt("500 signals, support mismatches %ld, max |coef diff| %.3e, %.1f s",
              static_cast<long>(support_mismatch), worst, secs)};
}

// 3. Full LGM backward against central differences.
struct FdProblem {
  Matrix a, b;
  AttentionParams att;
  Vector x, g;
  PursuitConfig cfg;

  double objective(std::vector<Index>* path = nullptr) const {
    const LgmParams params(Dictionary{a}, Dictionary{b});
    const UnrolledTrace t = lgm_forward(params, x, cfg, {&att, {}});
    if (path) {
      *path = t.selected;
    }
    return g.dot(t.output);
  }
};

Outcome gradient_correctness() {
  Rng rng(303);
  const Index n = 6, m = 10, layers = 3;
  const double h = 1e-6;
  int instances = 0;
  int attempts = 0;
  double worst = 0.0;
  int path_changes = 0;
  while (instances < 50 && attempts < 1000) {
    ++attempts;
    FdProblem p;
    p.a = scaled_random_dictionary(n, m, rng);
    p.b = p.a + 0.3 * gaussian(n, m, rng);
    p.att = AttentionParams::random(n, layers, rng(), 0.5);
    p.x = gaussian(n, rng);
    p.g = gaussian(n, rng);
    p.cfg.max_cardinality = layers;
    const LgmParams params(Dictionary{p.a}, Dictionary{p.b});
    GradientTape tape;
    const UnrolledTrace trace = lgm_forward(params, p.x, p.cfg, {&p.att, {}}, &tape);
    // Selection-stable: every winner beats its runner-up by a clear margin.
    if (*std::min_element(trace.margins.begin(), trace.margins.end()) < 1e-3) {
      continue;
    }
    ++instances;
    const LgmGradients grads = lgm_backward(tape, p.g);

    std::vector<double> analytic, numeric;
    auto probe = [&](double& slot, double expected) {
      const double saved = slot;
      std::vector<Index> path_plus, path_minus;
      slot = saved + h;
      const double up = p.objective(&path_plus);
      slot = saved - h;
      const double down = p.objective(&path_minus);
      slot = saved;
      if (path_plus != trace.selected || path_minus != trace.selected) {
        ++path_changes;
      }
      numeric.push_back((up - down) / (2.0 * h));
      analytic.push_back(expected);
    };
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < n; ++i) {
        probe(p.a(i, j), grads.analysis(i, j));
        probe(p.b(i, j), grads.synthesis(i, j));
      }
    }
    const std::vector<Matrix*> tensors = p.att.tensors();
    const std::vector<const Matrix*> grad_tensors = std::as_const(*grads.attention).tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      Matrix& tensor = *tensors[t];
      for (Index k = 0; k < tensor.size(); ++k) {
        probe(tensor.data()[k], grad_tensors[t]->data()[k]);
      }
    }
    const Eigen::Map<const Vector> an(analytic.data(), static_cast<Index>(analytic.size()));
    const Eigen::Map<const Vector> nu(numeric.data(), static_cast<Index>(numeric.size()));
    const double rel = (an - nu).norm() / std::max({an.norm(), nu.norm(), 1e-300});
    worst = std::max(worst, rel);
  }
  return {instances == 50 && path_changes == 0 && worst < 1e-4,
          fmt("%d instances (%d drawn), path changes under perturbation %d, max relative error %.3e",
              instances, attempts, path_changes, worst)};
}

// Sylvester Hadamard matrix of order 2^k, columns normalized.
Matrix hadamard(Index n) {
  Matrix h = Matrix::Ones(1, 1);
  while (h.rows() < n) {
    const Index k = h.rows();
    Matrix next(2 * k, 2 * k);
    next << h, h, h, -h;
    h = next;
  }
  return h / std::sqrt(static_cast<double>(n));
}

// 4. Exact recovery below the coherence bound.
Outcome omp_guarantee() {
  Rng rng(404);
  int recovered = 0;
  double worst_mu = 0.0;
  Index worst_k = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = trial % 2 == 0 ? 128 : 256;
    Matrix d(n, 2 * n);
    d << Matrix::Identity(n, n), hadamard(n);
    // Random atom order and signs leave the coherence unchanged.
    std::vector<Index> perm(static_cast<std::size_t>(2 * n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng() % i)]);
    }
    Matrix shuffled(n, 2 * n);
    for (Index j = 0; j < 2 * n; ++j) {
      shuffled.col(j) = (rng() & 1 ? 1.0 : -1.0) * d.col(perm[static_cast<std::size_t>(j)]);
    }
    const double mu = mutual_coherence(shuffled);
    worst_mu = std::max(worst_mu, mu);
    const auto k_max = static_cast<Index>(std::ceil((1.0 + 1.0 / mu) / 2.0) - 1.0);
    const Index k = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(k_max));
    worst_k = std::max(worst_k, k);
    std::vector<Index> planted;
    const Vector x = planted_signal(shuffled, k, rng, &planted);
    PursuitConfig cfg;
    cfg.max_cardinality = k;
    const PursuitResult res = omp(Dictionary(shuffled), x, cfg);
    const std::set<Index> want(planted.begin(), planted.end());
    const std::set<Index> got(res.code.support.begin(), res.code.support.end());
    recovered += want == got ? 1 : 0;
  }
  return {recovered == 100 && worst_mu < 0.1,
          fmt("%d/100 exact supports, max coherence %.4f, largest planted cardinality %ld",
              recovered, worst_mu, static_cast<long>(worst_k))};
}

// 5. ‖D_Sᵀr‖∞ after every layer.
Outcome orthogonality() {
  Rng rng(505);
  const Index n = 64, m = 128;
  double worst = 0.0;
  int checks = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix d = scaled_random_dictionary(n, m, rng);
    const Vector x = planted_signal(d, 10, rng) + 0.1 * gaussian(n, rng);
    PursuitConfig cfg;
    cfg.max_cardinality = 12;
    const UnrolledTrace net = lgm_forward(LgmParams::tied(d), x, cfg);
    for (Index k = 0; k < net.layers(); ++k) {
      const std::vector<Index> support(net.selected.begin(), net.selected.begin() + k + 1);
      const Vector proj = gather_columns(d, support).transpose() * net.residuals[static_cast<std::size_t>(k)];
      worst = std::max(worst, proj.cwiseAbs().maxCoeff());
      ++checks;
    }
    const Dictionary dict(d);
    for (Index k = 1; k <= 12; ++k) {
      PursuitConfig prefix;
      prefix.max_cardinality = k;
      const PursuitResult res = omp(dict, x, prefix);
      const Vector r = x - res.reconstruction;
      worst = std::max(worst, (gather_columns(d, res.code.support).transpose() * r).cwiseAbs().maxCoeff());
      ++checks;
    }
  }
  return {worst < 1e-8, fmt("%d layer checks, max |D_S^T r| %.3e", checks, worst)};
}

// 6. Scaled synthetic experiment: trained LGM against trained LISTA.
Outcome synthetic_trend() {
  constexpr Index kEpochs = 150;
  constexpr Index kBatch = 50;
  constexpr double kLgmLearningRate = 0.002;
  const auto t0 = Clock::now();
  const double sigma = 0.06;
  SyntheticSpec spec;
  spec.n = 64;
  spec.m = 128;
  spec.cardinalities = {8};
  spec.train_per_cardinality = 2000;
  spec.test_per_cardinality = 500;
  spec.sigmas = {sigma};
  spec.seed = 606;
  spec.validate();
  const Matrix d_true = make_dct_dictionary(spec.n, spec.m);
  const SplitDataset split = gen_split(spec, d_true, sigma);
  const Matrix init = random_dictionary(spec.n, spec.m, 607);

  TrainConfig lgm_cfg;
  lgm_cfg.model = ModelKind::Lgm;
  lgm_cfg.s = 15;
  lgm_cfg.eps = sigma * std::sqrt(static_cast<double>(spec.n));
  lgm_cfg.adam.lr = kLgmLearningRate;
  lgm_cfg.batch = kBatch;
  lgm_cfg.epochs = kEpochs;
  lgm_cfg.seed = 608;
  Model lgm = Model::initial(ModelKind::Lgm, init, lgm_cfg);
  const TrainRun lgm_run = train(lgm, split.train, split.test, lgm_cfg, &d_true);

  TrainConfig lista_cfg = lgm_cfg;
  lista_cfg.model = ModelKind::Lista;
  lista_cfg.adam.lr = 1e-5;
  Model lista = Model::initial(ModelKind::Lista, init, lista_cfg);
  const TrainRun lista_run = train(lista, split.train, split.test, lista_cfg, &d_true);

  // Per-epoch histories for inspection, next to the binary's working directory.
  std::ofstream("acceptance_synthetic_lgm.csv") << lgm_run.to_csv();
  std::ofstream("acceptance_synthetic_lista.csv") << lista_run.to_csv();

  const EpochRecord& lgm_last = lgm_run.history.back();
  const EpochRecord& lista_last = lista_run.history.back();
  int upticks = 0;
  double prev = lgm_run.initial.dict_distance;
  for (const EpochRecord& r : lgm_run.history) {
    upticks += r.dict_distance > prev ? 1 : 0;
    prev = r.dict_distance;
  }
  const bool mse_ok = lgm_last.test_mse <= lista_last.test_mse;
  const bool card_ok = std::abs(lgm_last.card_mean - 8.0) <= 2.0 && lista_last.card_mean > lgm_last.card_mean;
  const bool dist_ok = upticks <= 2;
  const double secs = seconds_since(t0);
  return {mse_ok && card_ok && dist_ok && secs <= 1800.0,
          fmt("%ld epochs: (a) mse LGM %.4f vs LISTA %.4f [%s]; (b) cardinality LGM %.2f vs LISTA %.2f [%s]; "
              "(c) dict distance %.4f -> %.4f with %d upticks [%s]; %.0f s",
              static_cast<long>(kEpochs), lgm_last.test_mse, lista_last.test_mse, mse_ok ? "ok" : "fail",
              lgm_last.card_mean, lista_last.card_mean, card_ok ? "ok" : "fail",
              lgm_run.initial.dict_distance, lgm_last.dict_distance, upticks, dist_ok ? "ok" : "fail", secs)};
}

// 7. Randomized averaging beats plain OMP with the true dictionary.
Outcome mmse_boost() {
  const double sigma = 0.12;
  const Matrix d_true = make_dct_dictionary(64, 128);
  const LabeledDataset data = gen_dataset(d_true, {8}, 500, sigma, 707);
  EvalContext ctx;
  ctx.true_dict = &d_true;
  ctx.s = 15;
  ctx.mmse_draws = 5;
  ctx.seed = 708;
  const std::vector<ResultRow> rows = evaluate_methods({&data}, {"omp-true-dict", "omp-true-dict-mmse"}, ctx);
  double omp_mse = 0.0, mmse_mse = 0.0;
  for (const ResultRow& r : rows) {
    if (r.method == "omp-true-dict") {
      omp_mse = r.mse;
    } else if (r.method == "omp-true-dict-mmse") {
      mmse_mse = r.mse;
    }
  }
  return {mmse_mse <= omp_mse, fmt("500 trials at sigma %.2f: MMSE mse %.5f vs OMP mse %.5f", sigma, mmse_mse, omp_mse)};
}

// 8. Convolutional pursuit.
Outcome gcmp_correctness() {
  Rng rng(808);
  const Index big_n = 16, n = 4, m = 2;
  double worst_corr = 0.0;
  int overlaps = 0;
  int growths = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const CscDictionary csc(gaussian(n, m, rng), big_n);
    const Matrix global = csc.materialize();
    const Vector r = gaussian(big_n, rng);
    worst_corr = std::max(worst_corr, (csc.correlate(r) - global.transpose() * r).cwiseAbs().maxCoeff());
    PursuitConfig cfg;
    cfg.max_cardinality = 1 + static_cast<Index>(rng() % 4);
    const PursuitResult res = gcmp(csc, r, cfg);
    for (const std::vector<Index>& group : res.selections) {
      for (std::size_t i = 0; i < group.size(); ++i) {
        for (std::size_t j = i + 1; j < group.size(); ++j) {
          overlaps += csc.overlaps(group[i], group[j]) ? 1 : 0;
        }
      }
    }
    for (std::size_t k = 1; k < res.residual_norms.size(); ++k) {
      growths += res.residual_norms[k] > res.residual_norms[k - 1] ? 1 : 0;
    }
  }
  return {worst_corr < 1e-10 && overlaps == 0 && growths == 0,
          fmt("100 instances: max |conv - matrix| %.3e, overlapping picks %d, residual increases %d", worst_corr,
              overlaps, growths)};
}

// 9. Patch identity, untrained denoiser, smoke training.
Outcome imaging() {
  const auto t0 = Clock::now();
  const std::string dir = GREEDYNET_TEST_DATA_DIR;
  const Image camera = load_pgm(dir + "/camera256.pgm");
  const Image brick = load_pgm(dir + "/brick128.pgm");
  const Image grass = load_pgm(dir + "/grass128.pgm");

  double identity_err = 0.0;
  Rng rng(909);
  for (const Index p : {Index{1}, Index{5}, Index{8}}) {
    const Image img{gaussian(41, 37, rng) * 40.0 + Matrix::Constant(41, 37, 128.0)};
    const Image back = reconstruct_average(extract_patches(img, p), img.height(), img.width(), p);
    identity_err = std::max(identity_err, (back.pixels - img.pixels).cwiseAbs().maxCoeff());
  }
  const Image cam_crop = crop(camera, 64, 64, 128, 128);
  const Image back = reconstruct_average(extract_patches(cam_crop, 8), 128, 128, 8);
  identity_err = std::max(identity_err, (back.pixels - cam_crop.pixels).cwiseAbs().maxCoeff());

  DenoiserModel model = DenoiserModel::dct_initialized(8, 10, 910);
  const Image noisy = add_noise(cam_crop, 25.0, 911);
  const double noisy_psnr = psnr(noisy, cam_crop);
  const double denoised_psnr = psnr(denoise(model, noisy), cam_crop);

  // Training crops from the upper half of each image, test crops from the
  // lower half.
  auto upper = [](const Image& i) { return crop(i, 0, 0, i.height() / 2, i.width()); };
  auto lower = [](const Image& i) { return crop(i, i.height() / 2, 0, i.height() - i.height() / 2, i.width()); };
  const std::vector<Image> train_crops = random_crops({upper(camera), upper(brick), upper(grass)}, 200, 16, 912);
  const std::vector<Image> test_crops = random_crops({lower(camera), lower(brick), lower(grass)}, 20, 16, 913);
  DenoiserTrainConfig cfg;
  cfg.sigma = 25.0;
  cfg.epochs = 3;
  cfg.seed = 914;
  const std::vector<DenoiserEpoch> history = train_denoiser(model, train_crops, test_crops, cfg);
  const double before = history.front().test_psnr;
  const double after = history.back().test_psnr;

  const bool ok = identity_err <= 1e-12 && denoised_psnr > noisy_psnr && after > before;
  return {ok, fmt("identity max err %.2e; untrained 128x128 sigma 25: %.2f dB -> %.2f dB; smoke training 200 "
                  "crops x 3 epochs: test %.2f dB -> %.2f dB; %.0f s",
                  identity_err, noisy_psnr, denoised_psnr, before, after, seconds_since(t0))};
}

// Brute-force coherence: every pair, straightforward loops.
double brute_coherence(const Matrix& d) {
  double best = -1.0;
  for (Index i = 0; i < d.cols(); ++i) {
    for (Index j = i + 1; j < d.cols(); ++j) {
      double gij = 0.0, gii = 0.0, gjj = 0.0;
      for (Index r = 0; r < d.rows(); ++r) {
        gij += d(r, i) * d(r, j);
      }
      for (Index r = 0; r < d.rows(); ++r) {
        gii += d(r, i) * d(r, i);
      }
      for (Index r = 0; r < d.rows(); ++r) {
        gjj += d(r, j) * d(r, j);
      }
      best = std::max(best, std::abs(gij) / (std::sqrt(gii) * std::sqrt(gjj)));
    }
  }
  return best;
}

// 10. Dictionary distance and mutual coherence.
Outcome metric_properties() {
  Rng rng(1010);
  double self_worst = 0.0;
  double lo = 1.0, hi = 0.0;
  double invariance_worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 4 + static_cast<Index>(rng() % 20);
    const Index m = 2 + static_cast<Index>(rng() % 40);
    const Matrix a = gaussian(n, m, rng);
    const Matrix b = gaussian(n, 1 + static_cast<Index>(rng() % 40), rng);
    self_worst = std::max(self_worst, dictionary_distance(a, a));
    const double dist = dictionary_distance(a, b);
    lo = std::min(lo, dist);
    hi = std::max(hi, dist);
    Matrix shuffled(n, b.cols());
    std::vector<Index> perm(static_cast<std::size_t>(b.cols()));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng() % i)]);
    }
    for (Index j = 0; j < b.cols(); ++j) {
      shuffled.col(j) = (rng() & 1 ? -1.0 : 1.0) * b.col(perm[static_cast<std::size_t>(j)]);
    }
    invariance_worst = std::max(invariance_worst, std::abs(dictionary_distance(a, shuffled) - dist));
  }
  int coherence_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix d = gaussian(3 + static_cast<Index>(rng() % 30), 2 + static_cast<Index>(rng() % 50), rng);
    coherence_mismatch += mutual_coherence(d) == brute_coherence(d) ? 0 : 1;
  }
  const bool ok = self_worst == 0.0 && lo >= 0.0 && hi <= 1.0 && invariance_worst <= 1e-15 && coherence_mismatch == 0;
  return {ok, fmt("self distance max %.1e, range [%.4f, %.4f], permutation/sign drift %.1e, coherence mismatches %d/100",
                  self_worst, lo, hi, invariance_worst, coherence_mismatch)};
}

} // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"unrolling-fidelity", unrolling_fidelity},
      {"batch-omp-equivalence", batch_equivalence},
      {"gradient-correctness", gradient_correctness},
      {"omp-recovery-guarantee", omp_guarantee},
      {"orthogonality-invariant", orthogonality},
      {"synthetic-lgm-vs-lista", synthetic_trend},
      {"mmse-boost", mmse_boost},
      {"gcmp-correctness", gcmp_correctness},
      {"imaging-identity-and-sanity", imaging},
      {"metric-properties", metric_properties},
  };
  // Optional filter: run only the criteria whose numbers are listed.
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int number = static_cast<int>(k) + 1;
    if (!only.empty() && !only.contains(number)) {
      continue;
    }
    Outcome out;
    try {
      out = criteria[k].run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += out.pass ? 0 : 1;
    std::printf("%s %2d %s: %s\n", out.pass ? "PASS" : "FAIL", number, criteria[k].name, out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
