// greedynet: command-line front end for data generation, pursuit, training,
// evaluation, image denoising and dictionary comparison.

#include "dataset_store.hpp"
#include "settings.hpp"

#include "greedynet/checkpoint.hpp"
#include "greedynet/csc.hpp"
#include "greedynet/denoiser.hpp"
#include "greedynet/errors.hpp"
#include "greedynet/evaluate.hpp"
#include "greedynet/image.hpp"
#include "greedynet/matrix_io.hpp"
#include "greedynet/parallel.hpp"
#include "greedynet/pursuit.hpp"
#include "greedynet/random.hpp"
#include "greedynet/synthetic.hpp"
#include "greedynet/train.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace greedynet::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

std::string require_path(const json& cfg, const std::string& key) {
  auto v = get<std::string>(cfg, key);
  if (v.empty()) {
    throw ValidationError("missing required setting --" + key);
  }
  return v;
}

unsigned threads_of(const json& cfg) {
  const auto t = get<long>(cfg, "threads");
  if (t < 0) {
    throw ValidationError("--threads must be non-negative");
  }
  return t == 0 ? default_threads() : static_cast<unsigned>(t);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
}

std::string fmt_double(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// ---------------------------------------------------------------- gen-data

struct GenData {
  explicit GenData(CLI::App& root) : app(root.add_subcommand("gen-data", "Generate a synthetic dataset")),
                                     s(app) {
    const SyntheticSpec d;
    s.add<std::string>("out", "", "Output directory");
    s.add<long>("n", d.n, "Signal dimension");
    s.add<long>("m", d.m, "Number of atoms");
    s.add<std::vector<long>>("cardinalities", {d.cardinalities.begin(), d.cardinalities.end()},
                             "Cardinalities, comma separated");
    s.add<long>("train", d.train_per_cardinality, "Training signals per cardinality");
    s.add<long>("test", d.test_per_cardinality, "Test signals per cardinality");
    s.add<std::vector<double>>("sigmas", d.sigmas, "Noise levels, comma separated");
    s.add<std::uint64_t>("seed", 0, "Signal seed");
    s.add<std::string>("dictionary", "dct", "True dictionary: dct or random")
        ->check(CLI::IsMember({"dct", "random"}));
    s.add<std::uint64_t>("dictionary-seed", 1, "Seed of the random true dictionary");
  }

  int run() const {
    const json cfg = s.resolve();
    const fs::path out = require_path(cfg, "out");
    DatasetManifest m;
    m.spec.n = get<long>(cfg, "n");
    m.spec.m = get<long>(cfg, "m");
    const auto cards = get<std::vector<long>>(cfg, "cardinalities");
    m.spec.cardinalities.assign(cards.begin(), cards.end());
    m.spec.train_per_cardinality = get<long>(cfg, "train");
    m.spec.test_per_cardinality = get<long>(cfg, "test");
    m.spec.sigmas = get<std::vector<double>>(cfg, "sigmas");
    m.spec.seed = get<std::uint64_t>(cfg, "seed");
    m.dictionary_kind = get<std::string>(cfg, "dictionary");
    m.dictionary_seed = get<std::uint64_t>(cfg, "dictionary-seed");
    if (m.dictionary_kind != "dct" && m.dictionary_kind != "random") {
      throw ValidationError("unknown dictionary kind '" + m.dictionary_kind + "'");
    }
    m.spec.validate();

    const Matrix d_true = m.dictionary_kind == "dct"
                              ? make_dct_dictionary(m.spec.n, m.spec.m)
                              : random_dictionary(m.spec.n, m.spec.m, m.dictionary_seed);
    save_dataset(out, m, d_true);
    write_snapshot(out / "resolved_config.json", "gen-data", cfg);
    std::cout << "wrote " << m.spec.sigmas.size() << " noise levels to " << out.string() << '\n';
    return kExitOk;
  }

  CLI::App* app;
  Settings s;
};

// ---------------------------------------------------------------- pursuit

struct PursuitCmd {
  explicit PursuitCmd(CLI::App& root)
      : app(root.add_subcommand("pursuit", "Run a pursuit engine over a matrix of signals")), s(app) {
    s.add<std::string>("algo", "omp", "omp, mp, sp, batch-omp, rand-omp or gcmp")
        ->check(CLI::IsMember({"omp", "mp", "sp", "batch-omp", "rand-omp", "gcmp"}));
    s.add<std::string>("dict", "", "Dictionary matrix header (gcmp: local filters)");
    s.add<std::string>("signals", "", "Signals matrix header, one signal per column");
    s.add<std::string>("out", "", "Result CSV");
    s.add<std::string>("recon", "", "Optional reconstruction matrix header");
    s.add<long>("s", 10, "Maximum cardinality (sp: exact cardinality)");
    s.add<double>("eps", 0.0, "Residual threshold");
    s.add<bool>("exact", false, "Ignore eps and run to s atoms");
    s.add<double>("tau", 0.8, "rand-omp threshold factor");
    s.add<std::uint64_t>("seed", 0, "rand-omp seed; signal j uses derive_seed(seed, j)");
    s.add<long>("max-iterations", 50, "sp refinement cap");
    s.add<long>("threads", 0, "Worker threads (0: all cores)");
  }

  int run() const {
    const json cfg = s.resolve();
    const std::string algo = get<std::string>(cfg, "algo");
    const Matrix atoms = load_matrix(require_path(cfg, "dict"));
    const Matrix x = load_matrix(require_path(cfg, "signals"));
    const fs::path out = require_path(cfg, "out");
    const unsigned threads = threads_of(cfg);

    PursuitConfig pc;
    pc.max_cardinality = get<long>(cfg, "s");
    pc.residual_threshold = get<double>(cfg, "eps");
    pc.stop_mode = get<bool>(cfg, "exact") ? StopMode::ExactCardinality : StopMode::ThresholdOrMax;

    std::vector<PursuitResult> results(static_cast<std::size_t>(x.cols()));
    if (algo == "gcmp") {
      const CscDictionary csc(atoms, x.rows());
      pc.validate(csc.global_size());
      parallel_for(results.size(), threads, [&](std::size_t j) {
        results[j] = gcmp(csc, x.col(static_cast<Index>(j)), pc);
      });
    } else {
      const Dictionary dict(atoms);
      if (x.rows() != dict.signal_dim()) {
        throw ShapeMismatch("signals have " + std::to_string(x.rows()) + " rows, dictionary has " +
                            std::to_string(dict.signal_dim()));
      }
      if (algo == "batch-omp") {
        results = batch_omp(dict, x, pc, threads);
      } else {
        if (algo != "sp") pc.validate(dict.size());
        RandConfig rc{get<double>(cfg, "tau"), 1, get<std::uint64_t>(cfg, "seed")};
        rc.validate();
        const SpOptions sp_opts{get<long>(cfg, "max-iterations")};
        parallel_for(results.size(), threads, [&](std::size_t j) {
          const Vector xj = x.col(static_cast<Index>(j));
          if (algo == "omp") {
            results[j] = omp(dict, xj, pc);
          } else if (algo == "mp") {
            results[j] = mp(dict, xj, pc);
          } else if (algo == "sp") {
            results[j] = sp(dict, xj, pc.max_cardinality, sp_opts);
          } else {
            RandConfig rj = rc;
            rj.seed = derive_seed(rc.seed, j);
            results[j] = rand_omp(dict, xj, pc, rj);
          }
        });
      }
    }

    std::ostringstream csv;
    csv << "signal,iterations,cardinality,residual_norm,support,coeffs\n";
    Matrix recon(x.rows(), x.cols());
    for (std::size_t j = 0; j < results.size(); ++j) {
      const PursuitResult& r = results[j];
      csv << j << ',' << r.iterations << ',' << r.code.cardinality() << ','
          << fmt_double(r.residual_norms.back()) << ',';
      for (std::size_t k = 0; k < r.code.support.size(); ++k) {
        csv << (k ? ";" : "") << r.code.support[k];
      }
      csv << ',';
      for (std::size_t k = 0; k < r.code.coeffs.size(); ++k) {
        csv << (k ? ";" : "") << fmt_double(r.code.coeffs[k]);
      }
      csv << '\n';
      recon.col(static_cast<Index>(j)) = r.reconstruction;
    }
    write_text(out, csv.str());
    write_snapshot(snapshot_for(out), "pursuit", cfg);
    if (const auto recon_path = get<std::string>(cfg, "recon"); !recon_path.empty()) {
      save_matrix(recon_path, recon);
    }
    return kExitOk;
  }

  CLI::App* app;
  Settings s;
};

// ---------------------------------------------------------------- train

struct TrainCmd {
  explicit TrainCmd(CLI::App& root)
      : app(root.add_subcommand("train", "Train an unrolled model on a synthetic dataset")), s(app) {
    const TrainConfig d;
    s.add<std::string>("data", "", "Dataset directory from gen-data");
    s.add<double>("sigma", 0.04, "Noise level to train on");
    s.add<std::string>("out", "", "Output directory (history.csv, model.json)");
    s.add<std::string>("model", "lgm", "lgm, lgm-true-cardinality, lgm-mmse, lmp or lista");
    s.add<long>("s", d.s, "Maximum layers");
    s.add<double>("eps", -1.0, "Residual threshold (negative: sigma*sqrt(n))");
    s.add<std::string>("loss", "sum-l2", "sum-l2 or log-sum-l2")
        ->check(CLI::IsMember({"sum-l2", "log-sum-l2"}));
    s.add<double>("xi", d.loss.xi, "Coherence penalty");
    s.add<double>("lr", d.adam.lr, "ADAM learning rate");
    s.add<double>("decay-factor", 1.0, "Learning-rate decay factor");
    s.add<long>("decay-every", 0, "Epochs between decays (0: none)");
    s.add<long>("batch", d.batch, "Mini-batch size");
    s.add<long>("epochs", d.epochs, "Epochs");
    s.add<std::uint64_t>("seed", 0, "Shuffling and sampling seed");
    s.add<std::string>("init", "random", "Initial dictionary: random or dct")
        ->check(CLI::IsMember({"random", "dct"}));
    s.add<std::uint64_t>("init-seed", 1, "Seed of the random initial dictionary");
    s.add<long>("mmse-draws", d.mmse_draws, "Random draws for lgm-mmse");
    s.add<double>("tau", d.tau_factor, "Random selection threshold factor");
    s.add<long>("lista-layers", d.lista_layers, "LISTA depth");
    s.add<double>("lista-lambda", d.lista_lambda, "LISTA initial lambda");
    s.add<bool>("lista-supervised", false, "Train LISTA against the true codes");
    s.add<long>("threads", 0, "Worker threads (0: all cores)");
  }

  int run() const {
    const json cfg = s.resolve();
    const fs::path data = require_path(cfg, "data");
    const fs::path out = require_path(cfg, "out");
    const double sigma = get<double>(cfg, "sigma");
    const SplitDataset split = load_split(data, sigma);
    const Matrix d_true = load_true_dictionary(data);
    const Index n = d_true.rows();

    TrainConfig tc;
    tc.model = parse_model_kind(get<std::string>(cfg, "model"));
    tc.s = get<long>(cfg, "s");
    const double eps = get<double>(cfg, "eps");
    tc.eps = eps < 0.0 ? sigma * std::sqrt(static_cast<double>(n)) : eps;
    tc.loss.kind = get<std::string>(cfg, "loss") == "log-sum-l2" ? LossKind::LogSumL2 : LossKind::SumL2;
    tc.loss.xi = get<double>(cfg, "xi");
    tc.adam.lr = get<double>(cfg, "lr");
    tc.adam.decay_factor = get<double>(cfg, "decay-factor");
    tc.adam.decay_every = get<long>(cfg, "decay-every");
    tc.batch = get<long>(cfg, "batch");
    tc.epochs = get<long>(cfg, "epochs");
    tc.seed = get<std::uint64_t>(cfg, "seed");
    tc.threads = threads_of(cfg);
    tc.mmse_draws = get<long>(cfg, "mmse-draws");
    tc.tau_factor = get<double>(cfg, "tau");
    tc.lista_layers = get<long>(cfg, "lista-layers");
    tc.lista_lambda = get<double>(cfg, "lista-lambda");
    tc.lista_supervised = get<bool>(cfg, "lista-supervised");
    tc.validate();

    const Matrix init = get<std::string>(cfg, "init") == "dct"
                            ? make_dct_dictionary(n, d_true.cols())
                            : random_dictionary(n, d_true.cols(), get<std::uint64_t>(cfg, "init-seed"));
    Model model = Model::initial(tc.model, init, tc);
    const TrainRun run = train(model, split.train, split.test, tc, &d_true);

    fs::create_directories(out);
    write_text(out / "history.csv", run.to_csv());
    save_checkpoint(out / "model.json", to_checkpoint(model));
    write_snapshot(out / "resolved_config.json", "train", cfg);
    const EpochRecord& last = run.history.empty() ? run.initial : run.history.back();
    std::cout << "epoch " << last.epoch << ": test mse " << fmt_double(last.test_mse, "%.6g")
              << ", cardinality " << fmt_double(last.card_mean, "%.4g") << ", dict distance "
              << fmt_double(last.dict_distance, "%.4g") << '\n';
    return kExitOk;
  }

  CLI::App* app;
  Settings s;
};

// ---------------------------------------------------------------- eval

struct EvalCmd {
  explicit EvalCmd(CLI::App& root)
      : app(root.add_subcommand("eval", "Evaluate methods on a synthetic dataset")), s(app) {
    s.add<std::string>("data", "", "Dataset directory from gen-data");
    s.add<std::vector<double>>("sigmas", {}, "Noise levels (default: every stored level)");
    s.add<std::vector<std::string>>("methods", {"omp-true-dict"}, "Methods, comma separated");
    s.add<std::string>("lgm", "", "Checkpoint for lgm and lgm-post-mmse");
    s.add<std::string>("lgm-true-cardinality", "", "Checkpoint for lgm-true-cardinality");
    s.add<std::string>("lgm-mmse", "", "Checkpoint for lgm-mmse");
    s.add<std::string>("lista", "", "Checkpoint for lista");
    s.add<long>("s", 15, "Maximum cardinality");
    s.add<double>("eps", -1.0, "Residual threshold (negative: sigma*sqrt(n))");
    s.add<long>("mmse-draws", 5, "Random draws for MMSE methods");
    s.add<double>("tau", 0.8, "Random selection threshold factor");
    s.add<std::uint64_t>("seed", 0, "Seed of randomized methods");
    s.add<std::string>("out", "", "Result CSV (default: stdout)");
    s.add<long>("threads", 0, "Worker threads (0: all cores)");
  }

  int run() const {
    const json cfg = s.resolve();
    const fs::path data = require_path(cfg, "data");
    const Matrix d_true = load_true_dictionary(data);
    auto sigmas = get<std::vector<double>>(cfg, "sigmas");
    if (sigmas.empty()) {
      sigmas = load_manifest(data).spec.sigmas;
    }

    EvalContext ctx;
    ctx.true_dict = &d_true;
    ctx.s = get<long>(cfg, "s");
    ctx.eps = get<double>(cfg, "eps");
    ctx.mmse_draws = get<long>(cfg, "mmse-draws");
    ctx.tau_factor = get<double>(cfg, "tau");
    ctx.seed = get<std::uint64_t>(cfg, "seed");
    ctx.threads = threads_of(cfg);

    Model lgm, lgm_tc, lgm_mmse, lista;
    const auto load = [&](const char* key, Model& slot) {
      const auto path = get<std::string>(cfg, key);
      if (path.empty()) return false;
      slot = model_from_checkpoint(load_checkpoint(path));
      return true;
    };
    if (load("lgm", lgm)) ctx.lgm = &lgm.lgm;
    if (load("lgm-true-cardinality", lgm_tc)) ctx.lgm_true_cardinality = &lgm_tc.lgm;
    if (load("lgm-mmse", lgm_mmse)) ctx.lgm_mmse = &lgm_mmse.lgm;
    if (load("lista", lista)) {
      if (lista.kind != ModelKind::Lista) {
        throw ValidationError("--lista checkpoint holds a " + to_string(lista.kind) + " model");
      }
      ctx.lista = &lista.lista;
    }

    std::vector<SplitDataset> splits;
    splits.reserve(sigmas.size());
    for (double sg : sigmas) splits.push_back(load_split(data, sg));
    std::vector<const LabeledDataset*> tests;
    for (const auto& sp : splits) tests.push_back(&sp.test);

    const auto rows = evaluate_methods(tests, get<std::vector<std::string>>(cfg, "methods"), ctx);
    const std::string csv = results_csv(rows);
    if (const auto out = get<std::string>(cfg, "out"); !out.empty()) {
      write_text(out, csv);
      write_snapshot(snapshot_for(out), "eval", cfg);
    } else {
      std::cout << csv;
    }
    return kExitOk;
  }

  CLI::App* app;
  Settings s;
};

// ---------------------------------------------------------------- denoise

struct DenoiseCmd {
  explicit DenoiseCmd(CLI::App& root)
      : app(root.add_subcommand("denoise", "Denoise a PGM image, optionally training first")), s(app) {
    const DenoiserTrainConfig d;
    s.add<std::string>("input", "", "Input PGM");
    s.add<std::string>("out", "", "Output PGM");
    s.add<std::string>("model", "", "Denoiser checkpoint (default: DCT-initialized model)");
    s.add<long>("patch", 8, "Patch size of a fresh model");
    s.add<long>("layers", 10, "Unrolled layers of a fresh model");
    s.add<std::uint64_t>("init-seed", 0, "Attention seed of a fresh model");
    s.add<double>("sigma", 0.0, "Add Gaussian noise of this level first (0: input is already noisy)");
    s.add<std::uint64_t>("noise-seed", 0, "Seed of the added noise");
    s.add<std::string>("clean", "", "Reference PGM for PSNR (default: the input when noise is added)");
    s.add<std::vector<std::string>>("train-images", {}, "Train on crops of these PGMs first");
    s.add<long>("train-crops", 200, "Training crops");
    s.add<long>("crop-size", 16, "Crop side length");
    s.add<long>("epochs", d.epochs, "Training epochs");
    s.add<long>("batch", d.batch, "Crops per mini-batch");
    s.add<double>("lr", d.adam.lr, "ADAM learning rate");
    s.add<double>("train-sigma", d.sigma, "Training noise level");
    s.add<double>("xi", d.xi, "Coherence penalty");
    s.add<std::uint64_t>("seed", 0, "Training seed");
    s.add<std::string>("save-model", "", "Write the (trained) model checkpoint here");
    s.add<long>("threads", 0, "Worker threads (0: all cores)");
  }

  int run() const {
    const json cfg = s.resolve();
    const fs::path out = require_path(cfg, "out");
    const Image input = load_pgm(require_path(cfg, "input"));
    const unsigned threads = threads_of(cfg);

    DenoiserModel model;
    if (const auto path = get<std::string>(cfg, "model"); !path.empty()) {
      model = denoiser_from_checkpoint(load_checkpoint(path));
    } else {
      model = DenoiserModel::dct_initialized(get<long>(cfg, "patch"), get<long>(cfg, "layers"),
                                             get<std::uint64_t>(cfg, "init-seed"));
    }

    const auto train_paths = get<std::vector<std::string>>(cfg, "train-images");
    if (!train_paths.empty()) {
      std::vector<Image> images;
      for (const auto& p : train_paths) images.push_back(load_pgm(p));
      DenoiserTrainConfig tc;
      tc.sigma = get<double>(cfg, "train-sigma");
      tc.epochs = get<long>(cfg, "epochs");
      tc.batch = get<long>(cfg, "batch");
      tc.adam.lr = get<double>(cfg, "lr");
      tc.xi = get<double>(cfg, "xi");
      tc.seed = get<std::uint64_t>(cfg, "seed");
      tc.threads = threads;
      const Index size = get<long>(cfg, "crop-size");
      const auto crops = random_crops(images, get<long>(cfg, "train-crops"), size, derive_seed(tc.seed, 1));
      const auto test = random_crops(images, 8, size, derive_seed(tc.seed, 2));
      for (const DenoiserEpoch& e : train_denoiser(model, crops, test, tc)) {
        std::cout << "epoch " << e.epoch << ": loss " << fmt_double(e.train_loss, "%.6g")
                  << ", test psnr " << fmt_double(e.test_psnr, "%.2f") << " dB\n";
      }
    }

    const double sigma = get<double>(cfg, "sigma");
    if (sigma < 0.0) {
      throw ValidationError("--sigma must be non-negative");
    }
    const Image noisy = sigma > 0.0 ? add_noise(input, sigma, get<std::uint64_t>(cfg, "noise-seed")) : input;
    const Image restored = denoise(model, noisy, threads);
    save_pgm(out, restored);
    write_snapshot(snapshot_for(out), "denoise", cfg);
    if (const auto path = get<std::string>(cfg, "save-model"); !path.empty()) {
      save_checkpoint(path, to_checkpoint(model));
    }

    const auto clean_path = get<std::string>(cfg, "clean");
    if (!clean_path.empty() || sigma > 0.0) {
      const Image clean = clean_path.empty() ? input : load_pgm(clean_path);
      std::cout << "psnr noisy " << fmt_double(psnr(clean, noisy), "%.2f") << " dB, denoised "
                << fmt_double(psnr(clean, restored), "%.2f") << " dB\n";
    }
    return kExitOk;
  }

  CLI::App* app;
  Settings s;
};

// ---------------------------------------------------------------- dict-dist

struct DictDistCmd {
  explicit DictDistCmd(CLI::App& root)
      : app(root.add_subcommand("dict-dist", "Distance of an approximate dictionary to a reference")) {
    app->add_option("reference", reference, "Reference dictionary header")->required();
    app->add_option("approx", approx, "Approximate dictionary header")->required();
  }

  int run() const {
    std::cout << fmt_double(dictionary_distance(load_matrix(reference), load_matrix(approx)), "%.17g")
              << '\n';
    return kExitOk;
  }

  CLI::App* app;
  std::string reference;
  std::string approx;
};

int run_cli(int argc, char** argv) {
  CLI::App root{"Unrolled greedy pursuit toolkit"};
  root.require_subcommand(1);
  GenData gen(root);
  PursuitCmd pursuit(root);
  TrainCmd train_cmd(root);
  EvalCmd eval(root);
  DenoiseCmd den(root);
  DictDistCmd dist(root);

  try {
    root.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = root.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen.app) return gen.run();
    if (*pursuit.app) return pursuit.run();
    if (*train_cmd.app) return train_cmd.run();
    if (*eval.app) return eval.run();
    if (*den.app) return den.run();
    if (*dist.app) return dist.run();
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitValidation;
}

} // namespace
} // namespace greedynet::cli

int main(int argc, char** argv) { return greedynet::cli::run_cli(argc, argv); }
