#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hyfi/synth.hpp"

namespace hyfi::synth {

namespace {

std::size_t clamp_index(long i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(n) - 1));
}

void check_kernel(double sigma, std::size_t radius) {
  if (radius == 0 || radius % 2 == 0) {
    throw std::invalid_argument("Gaussian kernel radius must be a positive odd count, got " +
                                std::to_string(radius));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("Gaussian sigma must be positive and finite");
  }
}

// Normalized 1-D factor; the 2-D kernel is its outer product.
std::vector<double> kernel_1d(double sigma, std::size_t radius) {
  const long k = static_cast<long>(radius / 2);
  std::vector<double> g(radius);
  double s = 0.0;
  for (long m = -k; m <= k; ++m) {
    g[m + k] = std::exp(-static_cast<double>(m * m) / (2.0 * sigma * sigma));
    s += g[m + k];
  }
  for (auto& x : g) x /= s;
  return g;
}

}  // namespace

double default_sigma(std::size_t radius) {
  return std::max(static_cast<double>(radius - 1) / 6.0, 0.5);
}

ImageGrid::ImageGrid(std::size_t h, std::size_t w, double fill)
    : height(h), width(w), pixels(h * w, fill) {
  if (h == 0 || w == 0) throw std::invalid_argument("image must be at least 1x1");
}

std::vector<double> gaussian_kernel(double sigma, std::size_t radius) {
  check_kernel(sigma, radius);
  const long k = static_cast<long>(radius / 2);
  // G(m, n) = exp(-(m^2 + n^2) / 2 sigma^2) / (2 pi sigma^2), renormalized after sampling.
  std::vector<double> kernel(radius * radius);
  double s = 0.0;
  for (long m = -k; m <= k; ++m) {
    for (long n = -k; n <= k; ++n) {
      const double v = std::exp(-static_cast<double>(m * m + n * n) / (2.0 * sigma * sigma)) /
                       (2.0 * M_PI * sigma * sigma);
      kernel[(m + k) * radius + (n + k)] = v;
      s += v;
    }
  }
  for (auto& v : kernel) v /= s;
  return kernel;
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma, std::size_t radius) {
  check_kernel(sigma, radius);
  if (img.pixels.size() != img.height * img.width || img.pixels.empty()) {
    throw std::invalid_argument("malformed image grid");
  }
  const auto g = kernel_1d(sigma, radius);
  const long k = static_cast<long>(radius / 2);
  ImageGrid rows(img.height, img.width);
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      double s = 0.0;
      for (long n = -k; n <= k; ++n) {
        s += g[n + k] * img.at(i, clamp_index(static_cast<long>(j) - n, img.width));
      }
      rows.at(i, j) = s;
    }
  }
  ImageGrid out(img.height, img.width);
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      double s = 0.0;
      for (long m = -k; m <= k; ++m) {
        s += g[m + k] * rows.at(clamp_index(static_cast<long>(i) - m, img.height), j);
      }
      out.at(i, j) = s;
    }
  }
  return out;
}

ImageGrid fovea_blur(const ImageGrid& img, double lambda, double sigma, std::size_t radius,
                     Pixel center) {
  if (center.row >= img.height || center.col >= img.width) {
    throw std::invalid_argument("fovea center (" + std::to_string(center.row) + ", " +
                                std::to_string(center.col) + ") lies outside the " +
                                std::to_string(img.height) + "x" + std::to_string(img.width) +
                                " image");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("fovea decay lambda must be positive");
  const auto blurred = gaussian_blur(img, sigma, radius);
  const double h = static_cast<double>(img.height - 1);
  const double w = static_cast<double>(img.width - 1);
  const double diag = std::max(std::sqrt(h * h + w * w), 1.0);
  ImageGrid out(img.height, img.width);
  for (std::size_t i = 0; i < img.height; ++i) {
    for (std::size_t j = 0; j < img.width; ++j) {
      const double di = static_cast<double>(i) - static_cast<double>(center.row);
      const double dj = static_cast<double>(j) - static_cast<double>(center.col);
      const double delta = std::exp(-lambda * std::sqrt(di * di + dj * dj) / diag);
      out.at(i, j) = delta * img.at(i, j) + (1.0 - delta) * blurred.at(i, j);
    }
  }
  return out;
}

}  // namespace hyfi::synth
