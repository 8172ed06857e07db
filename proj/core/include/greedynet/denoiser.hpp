#pragma once

#include "greedynet/adam.hpp"
#include "greedynet/image.hpp"
#include "greedynet/lgm.hpp"

#include <vector>

namespace greedynet {

/// Patch denoiser: LGM with dual p²×(4p²+1) dictionaries (last atom is the
/// DC atom) unrolled for exactly `layers` steps, blended by an attention net.
/// Works on pixels/255 internally.
struct DenoiserModel {
  Index patch = 8;
  Index layers = 10;
  LgmParams lgm;
  AttentionParams attention;

  /// Both dictionaries from make_dct_dictionary(p², 4p²) plus a DC atom of
  /// scale 2.5; attention from AttentionParams::initial.
  static DenoiserModel dct_initialized(Index patch, Index layers, std::uint64_t seed);

  PursuitConfig pursuit_config() const;
  void validate() const;
};

/// Subtracts the image mean, denoises every overlapping patch, averages the
/// overlaps and restores the mean.
Image denoise(const DenoiserModel& model, const Image& noisy, unsigned threads = 1);

struct DenoiserTrainConfig {
  /// Noise level on the 0..255 scale.
  double sigma = 25.0;
  Index epochs = 1;
  Index batch = 8;
  AdamConfig adam{0.002, 0.9, 0.999, 1e-8, 0.5, 20};
  double xi = 1e-5;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct DenoiserEpoch {
  Index epoch = 0;
  /// Mean over batches of log Σ‖x* − x̂‖² (pixels/255) + ξΣμ.
  double train_loss = 0.0;
  /// Mean PSNR over the test crops (fixed noise).
  double test_psnr = 0.0;
};

/// `count` random size×size crops drawn uniformly from `images`.
std::vector<Image> random_crops(const std::vector<Image>& images, Index count, Index size,
                                std::uint64_t seed);

/// Mean PSNR of the model on noisy versions of `clean` (noise seeded per crop).
double mean_psnr(const DenoiserModel& model, const std::vector<Image>& clean, double sigma,
                 std::uint64_t seed, unsigned threads = 1);

/// Trains on fresh noise each epoch with the log-sum-l2 loss over each batch of
/// crops. Entry 0 of the result describes the untrained model.
std::vector<DenoiserEpoch> train_denoiser(DenoiserModel& model, const std::vector<Image>& train_crops,
                                          const std::vector<Image>& test_crops,
                                          const DenoiserTrainConfig& cfg);

} // namespace greedynet
