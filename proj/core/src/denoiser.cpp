#include "greedynet/denoiser.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/losses.hpp"
#include "greedynet/parallel.hpp"
#include "greedynet/random.hpp"
#include "greedynet/synthetic.hpp"

#include <cmath>
#include <utility>
#include <numeric>

namespace greedynet {

DenoiserModel DenoiserModel::dct_initialized(Index patch, Index layers, std::uint64_t seed) {
  if (patch < 1 || layers < 1) {
    throw ValidationError("denoiser: patch size and layer count must be positive");
  }
  DenoiserModel m;
  m.patch = patch;
  m.layers = layers;
  const Index n = patch * patch;
  m.lgm = LgmParams::with_dc(make_dct_dictionary(n, 4 * n), 2.5);
  m.attention = AttentionParams::initial(n, layers, seed);
  return m;
}

PursuitConfig DenoiserModel::pursuit_config() const {
  PursuitConfig pc;
  pc.max_cardinality = layers;
  pc.stop_mode = StopMode::ExactCardinality;
  return pc;
}

void DenoiserModel::validate() const {
  const Index n = patch * patch;
  if (lgm.signal_dim() != n) {
    throw ShapeMismatch("denoiser dictionaries do not match the patch size");
  }
  if (attention.signal_dim() != n || attention.layers() != layers) {
    throw ShapeMismatch("denoiser attention net does not match the patch size or layer count");
  }
  if (layers > lgm.size()) {
    throw ValidationError("denoiser: more layers than atoms");
  }
}

namespace {

// Denoised patches of an image already scaled to pixels/255 with its mean
// removed.
Matrix denoise_patches(const DenoiserModel& model, const Matrix& patches, unsigned threads) {
  Matrix out(patches.rows(), patches.cols());
  const PursuitConfig pc = model.pursuit_config();
  const LgmOptions opts{&model.attention, {}};
  parallel_for(static_cast<std::size_t>(patches.cols()), threads, [&](std::size_t k) {
    const auto col = static_cast<Index>(k);
    out.col(col) = lgm_forward(model.lgm, patches.col(col), pc, opts).output;
  });
  return out;
}

struct Prepared {
  Image centered;  // pixels/255 − mean
  double mean = 0.0;
};

Prepared prepare(const Image& img) {
  Prepared p;
  p.centered.pixels = img.pixels / 255.0;
  p.mean = p.centered.pixels.mean();
  p.centered.pixels.array() -= p.mean;
  return p;
}

} // namespace

Image denoise(const DenoiserModel& model, const Image& noisy, unsigned threads) {
  model.validate();
  const Prepared prep = prepare(noisy);
  const Matrix patches = extract_patches(prep.centered, model.patch);
  const Matrix cleaned = denoise_patches(model, patches, threads);
  Image out = reconstruct_average(cleaned, noisy.height(), noisy.width(), model.patch);
  out.pixels = (out.pixels.array() + prep.mean) * 255.0;
  return out;
}

std::vector<Image> random_crops(const std::vector<Image>& images, Index count, Index size,
                                std::uint64_t seed) {
  if (images.empty()) {
    throw ValidationError("random_crops: no images");
  }
  for (const Image& img : images) {
    if (img.height() < size || img.width() < size) {
      throw ImageTooSmall("random_crops: image smaller than the crop size");
    }
  }
  Rng rng(seed);
  std::vector<Image> crops;
  crops.reserve(static_cast<std::size_t>(count));
  for (Index k = 0; k < count; ++k) {
    const Image& img = images[static_cast<std::size_t>(rng() % images.size())];
    const auto top = static_cast<Index>(rng() % static_cast<std::uint64_t>(img.height() - size + 1));
    const auto left = static_cast<Index>(rng() % static_cast<std::uint64_t>(img.width() - size + 1));
    crops.push_back(crop(img, top, left, size, size));
  }
  return crops;
}

double mean_psnr(const DenoiserModel& model, const std::vector<Image>& clean, double sigma,
                 std::uint64_t seed, unsigned threads) {
  if (clean.empty()) {
    throw EmptyBatch("mean_psnr: no images");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Image noisy = add_noise(clean[i], sigma, derive_seed(seed, i));
    total += psnr(denoise(model, noisy, threads), clean[i]);
  }
  return total / static_cast<double>(clean.size());
}

namespace {

// Trainable tensors: analysis, synthesis, DC scales, then the attention net.
std::vector<Matrix*> tensor_list(Matrix& a, Matrix& b, Matrix& dc, AttentionParams& att) {
  std::vector<Matrix*> out{&a, &b, &dc};
  for (Matrix* t : att.tensors()) {
    out.push_back(t);
  }
  return out;
}

} // namespace

std::vector<DenoiserEpoch> train_denoiser(DenoiserModel& model, const std::vector<Image>& train_crops,
                                          const std::vector<Image>& test_crops,
                                          const DenoiserTrainConfig& cfg) {
  model.validate();
  if (train_crops.empty()) {
    throw EmptyBatch("train_denoiser: no training crops");
  }
  if (cfg.batch < 1 || cfg.epochs < 0 || !(cfg.sigma >= 0.0) || !(cfg.xi >= 0.0)) {
    throw ValidationError("train_denoiser: invalid configuration");
  }
  const std::uint64_t test_seed = derive_seed(cfg.seed, 0x74657374ull);
  const PursuitConfig pc = model.pursuit_config();
  const Index p = model.patch;

  // Untrained loss over the same batching, with epoch-0 noise.
  double initial_loss = 0.0;
  Index initial_batches = 0;
  for (std::size_t start = 0; start < train_crops.size(); start += static_cast<std::size_t>(cfg.batch)) {
    const std::size_t stop = std::min(train_crops.size(), start + static_cast<std::size_t>(cfg.batch));
    double squared_error = 0.0;
    for (std::size_t idx = start; idx < stop; ++idx) {
      const Image& clean = train_crops[idx];
      const Image noisy = add_noise(clean, cfg.sigma, derive_seed(derive_seed(cfg.seed, 0), idx));
      squared_error += (denoise(model, noisy, cfg.threads).pixels - clean.pixels).squaredNorm() /
                       (255.0 * 255.0);
    }
    initial_loss += std::log(squared_error);
    ++initial_batches;
  }
  if (cfg.xi > 0.0) {
    initial_loss += static_cast<double>(initial_batches) * cfg.xi *
                    (mutual_coherence(model.lgm.analysis.atoms()) +
                     mutual_coherence(model.lgm.synthesis.atoms()));
  }

  std::vector<DenoiserEpoch> history;
  history.push_back({0, initial_loss / static_cast<double>(initial_batches),
                     test_crops.empty() ? 0.0
                                        : mean_psnr(model, test_crops, cfg.sigma, test_seed,
                                                    cfg.threads)});

  Matrix a = model.lgm.analysis.atoms();
  Matrix b = model.lgm.synthesis.atoms();
  Matrix dc(2, 1);
  dc << model.lgm.dc_scale_analysis, model.lgm.dc_scale_synthesis;
  AttentionParams att = model.attention;
  std::vector<Matrix*> params = tensor_list(a, b, dc, att);
  std::vector<const Matrix*> shapes(params.begin(), params.end());
  Adam adam(cfg.adam, shapes);

  Rng shuffle_rng(derive_seed(cfg.seed, 0x73687566ull));
  std::vector<std::size_t> order(train_crops.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const unsigned workers = cfg.threads == 0 ? default_threads() : cfg.threads;

  for (Index epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng() % i)]);
    }
    double loss_sum = 0.0;
    Index batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<LgmGradients> accs(workers, LgmGradients::zeros_like(model.lgm, &model.attention));
      double squared_error = 0.0;

      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t idx = order[k];
        const Image& clean = train_crops[idx];
        const std::uint64_t noise_seed =
            derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)), idx);
        const Image noisy = add_noise(clean, cfg.sigma, noise_seed);
        const Prepared prep = prepare(noisy);
        Image target{clean.pixels / 255.0};
        target.pixels.array() -= prep.mean;

        // First pass: the averaged output and the image-level gradient.
        const Matrix patches = extract_patches(prep.centered, p);
        const Matrix cleaned = denoise_patches(model, patches, cfg.threads);
        const Image out = reconstruct_average(cleaned, clean.height(), clean.width(), p);
        const Matrix err = target.pixels - out.pixels;
        squared_error += err.squaredNorm();
        const Matrix image_grad =
            (-2.0 * err).cwiseQuotient(overlap_counts(clean.height(), clean.width(), p));
        const Matrix patch_grads = extract_patches(Image{image_grad}, p);

        // Second pass: recorded forward and backward per patch.
        const LgmOptions opts{&model.attention, {}};
        parallel_chunks(static_cast<std::size_t>(patches.cols()), workers,
                        [&](unsigned w, std::size_t b0, std::size_t e0) {
                          GradientTape tape;
                          for (std::size_t j = b0; j < e0; ++j) {
                            const auto col = static_cast<Index>(j);
                            lgm_forward(model.lgm, patches.col(col), pc, opts, &tape);
                            lgm_backward_accumulate(tape, patch_grads.col(col), accs[w]);
                          }
                        });
      }

      LgmGradients total = std::move(accs[0]);
      for (std::size_t w = 1; w < accs.size(); ++w) {
        total += accs[w];
      }
      // log Σ‖·‖²: the data gradient is the summed one divided by the sum.
      if (squared_error > 0.0) {
        total *= 1.0 / squared_error;
      }
      double coherence = 0.0;
      if (cfg.xi > 0.0) {
        const auto dc_index = *model.lgm.dc_index();
        auto fold = [&](const Matrix& dict, Matrix& grad, double& dc_grad) {
          coherence += mutual_coherence(dict);
          Matrix g = cfg.xi * mutual_coherence_gradient(dict);
          dc_grad += g.col(dc_index).sum();
          g.col(dc_index).setZero();
          grad += g;
        };
        fold(model.lgm.analysis.atoms(), total.analysis, total.dc_scale_analysis);
        fold(model.lgm.synthesis.atoms(), total.synthesis, total.dc_scale_synthesis);
      }
      loss_sum += std::log(squared_error) + cfg.xi * coherence;
      ++batches;

      Matrix dc_grad(2, 1);
      dc_grad << total.dc_scale_analysis, total.dc_scale_synthesis;
      std::vector<const Matrix*> grads{&total.analysis, &total.synthesis, &dc_grad};
      for (const Matrix* t : std::as_const(*total.attention).tensors()) {
        grads.push_back(t);
      }
      adam.step(params, grads);
      model.lgm.dc_scale_analysis = dc(0, 0);
      model.lgm.dc_scale_synthesis = dc(1, 0);
      model.lgm.assign(a, b);
      model.attention = att;
    }
    adam.end_epoch();
    history.push_back({epoch, loss_sum / static_cast<double>(std::max<Index>(batches, 1)),
                       test_crops.empty() ? 0.0
                                          : mean_psnr(model, test_crops, cfg.sigma, test_seed,
                                                      cfg.threads)});
  }
  return history;
}

} // namespace greedynet
