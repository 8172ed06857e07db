#pragma once

#include "greedynet/linalg.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>

namespace greedynet {

/// Single-channel image; pixels(r, c) on the 0..255 scale.
struct Image {
  Matrix pixels;

  Index height() const { return pixels.rows(); }
  Index width() const { return pixels.cols(); }
};

/// Binary 8-bit PGM (P5, maxval 255). Throws UnsupportedFormat for anything
/// else, CorruptHeader for malformed or truncated files, IoError when the file
/// cannot be opened.
Image load_pgm(const std::filesystem::path& path);
/// Rounds and clamps to 0..255.
void save_pgm(const std::filesystem::path& path, const Image& img);

/// All (h−p+1)(w−p+1) fully overlapping p×p patches, one per column,
/// vectorized column-major; patches in raster order of their top-left corner.
Matrix extract_patches(const Image& img, Index p);

/// Per-pixel (λ·noisy + Σ covering patch values) / (λ + cover count).
/// `noisy` is required when λ > 0.
Image reconstruct_average(const Matrix& patches, Index height, Index width, Index p,
                          double lambda = 0.0, const Image* noisy = nullptr);

/// Number of patches covering each pixel.
Matrix overlap_counts(Index height, Index width, Index p);

/// 10·log10(peak²/MSE); +infinity for identical images.
double psnr(const Image& a, const Image& b, double peak = 255.0);
inline constexpr double kIdenticalPsnr = std::numeric_limits<double>::infinity();

/// Adds N(0, σ²) noise (no clipping).
Image add_noise(const Image& img, double sigma, std::uint64_t seed);

Image crop(const Image& img, Index top, Index left, Index height, Index width);

} // namespace greedynet
