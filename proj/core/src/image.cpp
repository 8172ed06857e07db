#include "greedynet/image.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace greedynet {

namespace {

// Next whitespace-delimited PGM header token, skipping # comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int ch = 0;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) {
        break;
      }
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

long parse_positive(const std::string& tok, const char* what) {
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(c); })) {
    throw CorruptHeader(std::string("pgm: bad ") + what + " '" + tok + "'");
  }
  const long v = std::stol(tok);
  if (v <= 0) {
    throw CorruptHeader(std::string("pgm: non-positive ") + what);
  }
  return v;
}

} // namespace

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  const std::string magic = header_token(in);
  if (magic != "P5") {
    throw UnsupportedFormat(path.string() + ": only binary PGM (P5) is supported");
  }
  const long width = parse_positive(header_token(in), "width");
  const long height = parse_positive(header_token(in), "height");
  const long maxval = parse_positive(header_token(in), "maxval");
  if (maxval != 255) {
    throw UnsupportedFormat(path.string() + ": only maxval 255 is supported");
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(width * height));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw CorruptHeader(path.string() + ": truncated pixel data");
  }
  Image img;
  img.pixels.resize(height, width);
  for (long r = 0; r < height; ++r) {
    for (long c = 0; c < width; ++c) {
      img.pixels(r, c) = raw[static_cast<std::size_t>(r * width + c)];
    }
  }
  return img;
}

void save_pgm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(img.width() * img.height()));
  for (Index r = 0; r < img.height(); ++r) {
    for (Index c = 0; c < img.width(); ++c) {
      const double v = std::clamp(std::round(img.pixels(r, c)), 0.0, 255.0);
      raw[static_cast<std::size_t>(r * img.width() + c)] = static_cast<unsigned char>(v);
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

Matrix extract_patches(const Image& img, Index p) {
  if (p < 1 || img.height() < p || img.width() < p) {
    throw ImageTooSmall("image " + std::to_string(img.height()) + "x" +
                        std::to_string(img.width()) + " is smaller than patch size " +
                        std::to_string(p));
  }
  const Index rows = img.height() - p + 1;
  const Index cols = img.width() - p + 1;
  Matrix out(p * p, rows * cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index k = r * cols + c;
      for (Index pc = 0; pc < p; ++pc) {
        out.col(k).segment(pc * p, p) = img.pixels.col(c + pc).segment(r, p);
      }
    }
  }
  return out;
}

Matrix overlap_counts(Index height, Index width, Index p) {
  Matrix counts = Matrix::Zero(height, width);
  for (Index r = 0; r + p <= height; ++r) {
    for (Index c = 0; c + p <= width; ++c) {
      counts.block(r, c, p, p).array() += 1.0;
    }
  }
  return counts;
}

Image reconstruct_average(const Matrix& patches, Index height, Index width, Index p,
                          double lambda, const Image* noisy) {
  if (p < 1 || height < p || width < p) {
    throw ImageTooSmall("reconstruct_average: image smaller than patch size");
  }
  const Index rows = height - p + 1;
  const Index cols = width - p + 1;
  if (patches.rows() != p * p || patches.cols() != rows * cols) {
    throw ShapeMismatch("reconstruct_average: expected " + std::to_string(p * p) + "x" +
                        std::to_string(rows * cols) + " patches, got " +
                        std::to_string(patches.rows()) + "x" + std::to_string(patches.cols()));
  }
  if (lambda < 0.0) {
    throw ValidationError("reconstruct_average: lambda must be non-negative");
  }
  if (lambda > 0.0 && (!noisy || noisy->height() != height || noisy->width() != width)) {
    throw ShapeMismatch("reconstruct_average: lambda > 0 needs a noisy image of the same size");
  }
  Matrix sum = Matrix::Zero(height, width);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const Index k = r * cols + c;
      for (Index pc = 0; pc < p; ++pc) {
        sum.col(c + pc).segment(r, p) += patches.col(k).segment(pc * p, p);
      }
    }
  }
  Matrix weight = overlap_counts(height, width, p);
  if (lambda > 0.0) {
    sum += lambda * noisy->pixels;
    weight.array() += lambda;
  }
  return Image{sum.cwiseQuotient(weight)};
}

double psnr(const Image& a, const Image& b, double peak) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ShapeMismatch("psnr: image sizes differ");
  }
  const double mse = (a.pixels - b.pixels).squaredNorm() / static_cast<double>(a.pixels.size());
  if (mse == 0.0) {
    return kIdenticalPsnr;
  }
  return 10.0 * std::log10(peak * peak / mse);
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Image out = img;
  for (Index c = 0; c < out.width(); ++c) {
    for (Index r = 0; r < out.height(); ++r) {
      out.pixels(r, c) += sigma * standard_normal(rng);
    }
  }
  return out;
}

Image crop(const Image& img, Index top, Index left, Index height, Index width) {
  if (top < 0 || left < 0 || height < 1 || width < 1 || top + height > img.height() ||
      left + width > img.width()) {
    throw ValidationError("crop window outside the image");
  }
  return Image{img.pixels.block(top, left, height, width)};
}

} // namespace greedynet
