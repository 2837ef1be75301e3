#pragma once

// Classical stand-ins for external saliency and co-saliency detectors, so
// the pipeline can run on raw images alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "coloc/error.hpp"
#include "coloc/imagery.hpp"

namespace coloc {

inline constexpr int kSignatureBins = 16;

/// Normalized 16-bin intensity histogram.
struct HistogramSignature {
  std::array<double, kSignatureBins> bins{};

  friend bool operator==(const HistogramSignature&, const HistogramSignature&) = default;
};

inline HistogramSignature histogram_signature(const GrayMap& image) {
  HistogramSignature sig;
  for (double v : image.values()) {
    const int bin = std::min(static_cast<int>(v * kSignatureBins), kSignatureBins - 1);
    sig.bins[static_cast<std::size_t>(bin)] += 1.0;
  }
  for (double& b : sig.bins) b /= static_cast<double>(image.size());
  return sig;
}

inline double histogram_intersection(const HistogramSignature& a, const HistogramSignature& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) sum += std::min(a.bins[i], b.bins[i]);
  return sum;
}

namespace detail {

inline GrayMap min_max_normalize(const cv::Mat& src) {
  double lo = 0.0;
  double hi = 0.0;
  cv::minMaxLoc(src, &lo, &hi);
  std::vector<double> values(static_cast<std::size_t>(src.rows) * src.cols, 0.0);
  const double range = hi - lo;
  if (range > 0.0) {
    for (int r = 0; r < src.rows; ++r) {
      for (int c = 0; c < src.cols; ++c) {
        const double v = (src.at<double>(r, c) - lo) / range;
        values[static_cast<std::size_t>(r) * src.cols + c] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return GrayMap(src.cols, src.rows, std::move(values));
}

}  // namespace detail

/// Spectral-residual saliency at a 64x64 working scale: the log-amplitude
/// spectrum minus its 3x3 local mean, recombined with the original phase,
/// inverted, squared, Gaussian-smoothed (sigma 2.5), resized back and
/// min-max normalized. Constant images give an all-zero map.
inline GrayMap spectral_residual_saliency(const GrayMap& image) {
  constexpr int kScale = 64;
  const auto [lo_it, hi_it] = std::minmax_element(image.values().begin(), image.values().end());
  if (*lo_it == *hi_it) return GrayMap::filled(image.width(), image.height(), 0.0);

  cv::Mat full(image.height(), image.width(), CV_64FC1);
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) full.at<double>(r, c) = image.at(r, c);
  }
  cv::Mat small;
  const bool shrinking = image.width() >= kScale && image.height() >= kScale;
  cv::resize(full, small, cv::Size(kScale, kScale), 0, 0,
             shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);

  cv::Mat spectrum;
  cv::dft(small, spectrum, cv::DFT_COMPLEX_OUTPUT);
  std::vector<cv::Mat> parts(2);
  cv::split(spectrum, parts);
  cv::Mat amplitude;
  cv::Mat phase;
  cv::cartToPolar(parts[0], parts[1], amplitude, phase);

  cv::Mat log_amplitude;
  cv::max(amplitude, 1e-12, amplitude);
  cv::log(amplitude, log_amplitude);
  cv::Mat local_mean;
  cv::blur(log_amplitude, local_mean, cv::Size(3, 3), cv::Point(-1, -1), cv::BORDER_REPLICATE);
  cv::Mat residual_amplitude;
  cv::exp(log_amplitude - local_mean, residual_amplitude);

  cv::polarToCart(residual_amplitude, phase, parts[0], parts[1]);
  cv::merge(parts, spectrum);
  cv::Mat back;
  cv::idft(spectrum, back, cv::DFT_COMPLEX_OUTPUT | cv::DFT_SCALE);
  cv::split(back, parts);
  cv::Mat energy;
  cv::magnitude(parts[0], parts[1], energy);
  energy = energy.mul(energy);
  cv::GaussianBlur(energy, energy, cv::Size(0, 0), 2.5, 2.5, cv::BORDER_REPLICATE);

  cv::Mat restored;
  cv::resize(energy, restored, cv::Size(image.width(), image.height()), 0, 0, cv::INTER_LINEAR);
  return detail::min_max_normalize(restored);
}

/// Mean histogram intersection of each signature with every other one.
inline std::vector<double> commonness_weights(std::span<const HistogramSignature> signatures) {
  const std::size_t n = signatures.size();
  if (n < 2) throw Error(ErrorCode::TooFewImages, "co-saliency needs at least two images");
  std::vector<double> weights(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum += histogram_intersection(signatures[i], signatures[j]);
    }
    weights[i] = sum / static_cast<double>(n - 1);
  }
  return weights;
}

/// C_i = w_i * normalize(S_i), w_i being the commonness weight of image i.
inline std::vector<GrayMap> fuse_cosaliency(std::span<const GrayMap> saliency,
                                            std::span<const HistogramSignature> signatures) {
  if (saliency.size() != signatures.size()) {
    throw Error(ErrorCode::InvalidArgument, "one signature per saliency map required");
  }
  const std::vector<double> weights = commonness_weights(signatures);
  std::vector<GrayMap> out;
  out.reserve(saliency.size());
  for (std::size_t i = 0; i < saliency.size(); ++i) {
    const GrayMap& s = saliency[i];
    cv::Mat m(s.height(), s.width(), CV_64FC1);
    for (int r = 0; r < s.height(); ++r) {
      for (int c = 0; c < s.width(); ++c) m.at<double>(r, c) = s.at(r, c);
    }
    const GrayMap normalized = detail::min_max_normalize(m);
    std::vector<double> values(normalized.values().begin(), normalized.values().end());
    const double w = std::clamp(weights[i], 0.0, 1.0);
    for (double& v : values) v *= w;
    out.emplace_back(s.width(), s.height(), std::move(values));
  }
  return out;
}

}  // namespace coloc
