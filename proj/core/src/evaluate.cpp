#include "greedynet/evaluate.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/parallel.hpp"
#include "greedynet/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>

namespace greedynet {

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> names{
      "lgm",           "lgm-true-cardinality",      "lgm-post-mmse",
      "lgm-mmse",      "lista",                     "omp-true-dict",
      "omp-true-dict-cardinality", "omp-true-dict-mmse", "oracle"};
  return names;
}

namespace {

struct Estimate {
  Vector output;
  Vector code;
};

using Estimator = std::function<Estimate(const LabeledDataset&, Index, std::uint64_t)>;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h = (h ^ c) * 0x100000001b3ull;
  }
  return h;
}

template <class T>
const T& require(const T* ptr, const std::string& method) {
  if (!ptr) {
    throw ValidationError("method '" + method + "' needs a model that was not provided");
  }
  return *ptr;
}

PursuitConfig threshold_config(const EvalContext& ctx, const LabeledDataset& ds, Index m) {
  PursuitConfig pc;
  pc.max_cardinality = std::min(ctx.s, m);
  pc.residual_threshold =
      ctx.eps >= 0.0 ? ctx.eps : ds.sigma * std::sqrt(static_cast<double>(ds.clean.rows()));
  return pc;
}

PursuitConfig cardinality_config(const LabeledDataset& ds, Index j) {
  PursuitConfig pc;
  pc.max_cardinality = ds.cardinality(j);
  pc.stop_mode = StopMode::ExactCardinality;
  return pc;
}

Estimator make_estimator(const std::string& method, const EvalContext& ctx,
                         const Dictionary& truth) {
  auto lgm_greedy = [&ctx](const LgmParams& p, bool true_card) -> Estimator {
    return [&p, &ctx, true_card](const LabeledDataset& ds, Index j, std::uint64_t) {
      const PursuitConfig pc =
          true_card ? cardinality_config(ds, j) : threshold_config(ctx, ds, p.size());
      UnrolledTrace t = lgm_forward(p, ds.noisy.col(j), pc);
      return Estimate{std::move(t.output), std::move(t.code)};
    };
  };
  auto lgm_random = [&ctx](const LgmParams& p) -> Estimator {
    return [&p, &ctx](const LabeledDataset& ds, Index j, std::uint64_t seed) {
      const LgmMmseOptions opts{ctx.mmse_draws, ctx.tau_factor, seed, true};
      LgmMmseResult r = lgm_mmse(p, ds.noisy.col(j), threshold_config(ctx, ds, p.size()), opts);
      return Estimate{std::move(r.output), std::move(r.code)};
    };
  };

  if (method == "lgm") {
    return lgm_greedy(require(ctx.lgm, method), false);
  }
  if (method == "lgm-true-cardinality") {
    return lgm_greedy(require(ctx.lgm_true_cardinality, method), true);
  }
  if (method == "lgm-post-mmse") {
    return lgm_random(require(ctx.lgm, method));
  }
  if (method == "lgm-mmse") {
    return lgm_random(require(ctx.lgm_mmse, method));
  }
  if (method == "lista") {
    const ListaParams& p = require(ctx.lista, method);
    return [&p](const LabeledDataset& ds, Index j, std::uint64_t) {
      ListaOutput out = lista_forward(p, ds.noisy.col(j));
      return Estimate{std::move(out.reconstruction), std::move(out.code)};
    };
  }
  if (method == "omp-true-dict" || method == "omp-true-dict-cardinality") {
    const bool true_card = method == "omp-true-dict-cardinality";
    return [&truth, &ctx, true_card](const LabeledDataset& ds, Index j, std::uint64_t) {
      const PursuitConfig pc =
          true_card ? cardinality_config(ds, j) : threshold_config(ctx, ds, truth.size());
      PursuitResult r = omp(truth, ds.noisy.col(j), pc);
      return Estimate{std::move(r.reconstruction), r.code.to_dense()};
    };
  }
  if (method == "omp-true-dict-mmse") {
    return [&truth, &ctx](const LabeledDataset& ds, Index j, std::uint64_t seed) {
      const RandConfig rc{ctx.tau_factor, ctx.mmse_draws, seed};
      MmseEstimate e = mmse_estimate(truth, ds.noisy.col(j), threshold_config(ctx, ds, truth.size()), rc);
      return Estimate{std::move(e.reconstruction), std::move(e.code)};
    };
  }
  if (method == "oracle") {
    return [&truth](const LabeledDataset& ds, Index j, std::uint64_t) {
      const auto& support = ds.supports[static_cast<std::size_t>(j)];
      Estimate e;
      e.output = oracle_estimate(truth, support, ds.noisy.col(j));
      e.code = Vector::Zero(truth.size());
      for (Index i : support) {
        e.code[i] = 1.0;
      }
      return e;
    };
  }
  throw UnknownMethod("unknown method '" + method + "'");
}

} // namespace

std::vector<ResultRow> evaluate_methods(const std::vector<const LabeledDataset*>& datasets,
                                        const std::vector<std::string>& methods,
                                        const EvalContext& ctx) {
  for (const std::string& m : methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
      throw UnknownMethod("unknown method '" + m + "'");
    }
  }
  const Dictionary truth(require(ctx.true_dict, "oracle"));
  std::vector<std::string> order = methods;
  if (std::find(order.begin(), order.end(), "oracle") == order.end()) {
    order.push_back("oracle");
  }

  std::vector<ResultRow> rows;
  for (const LabeledDataset* ds : datasets) {
    const Index count = ds->size();
    if (count == 0) {
      throw EmptyBatch("evaluate_methods: empty dataset");
    }
    for (const std::string& method : order) {
      const Estimator est = make_estimator(method, ctx, truth);
      std::vector<double> err(static_cast<std::size_t>(count));
      std::vector<double> card(static_cast<std::size_t>(count));
      const std::uint64_t base = derive_seed(ctx.seed, fnv1a(method));
      parallel_for(static_cast<std::size_t>(count), ctx.threads, [&](std::size_t jj) {
        const auto j = static_cast<Index>(jj);
        const Estimate e = est(*ds, j, derive_seed(base, jj));
        err[jj] = (Vector(ds->clean.col(j)) - e.output).squaredNorm();
        card[jj] = static_cast<double>((e.code.array() != 0.0).count());
      });
      ResultRow row{method, ds->sigma, 0.0, 0.0, 0.0};
      for (std::size_t j = 0; j < err.size(); ++j) {
        row.mse += err[j];
        row.card_mean += card[j];
      }
      row.mse /= static_cast<double>(count);
      row.card_mean /= static_cast<double>(count);
      for (double c : card) {
        row.card_std += (c - row.card_mean) * (c - row.card_mean);
      }
      row.card_std = std::sqrt(row.card_std / static_cast<double>(count));
      rows.push_back(row);
    }
  }
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "method,sigma,mse,card_mean,card_std\n";
  for (const ResultRow& r : rows) {
    os << r.method << ',' << r.sigma << ',' << r.mse << ',' << r.card_mean << ',' << r.card_std
       << '\n';
  }
  return os.str();
}

} // namespace greedynet
