#pragma once

// PGM (P5) and PNG reading/writing for GrayMap, backed by OpenCV codecs.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "coloc/error.hpp"
#include "coloc/imagery.hpp"

namespace coloc {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

inline bool supported_extension(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".png" || ext == ".pgm";
}

}  // namespace detail

/// 8-bit gray or RGB raster -> GrayMap. RGB is reduced to luma
/// 0.299R + 0.587G + 0.114B; every value is divided by 255.
inline GrayMap load_gray_map(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  if (!detail::supported_extension(path)) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + " (expected .png or .pgm)");
  }
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw Error(ErrorCode::UnsupportedFormat, path.string() + " is unreadable");
  if (raw.depth() != CV_8U || (raw.channels() != 1 && raw.channels() != 3)) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + " is not 8-bit gray or RGB");
  }
  if (raw.cols == 0 || raw.rows == 0) throw Error(ErrorCode::MinimumSizeViolated, path.string());

  std::vector<double> values(static_cast<std::size_t>(raw.rows) * raw.cols);
  for (int r = 0; r < raw.rows; ++r) {
    for (int c = 0; c < raw.cols; ++c) {
      double v = 0.0;
      if (raw.channels() == 1) {
        v = raw.at<std::uint8_t>(r, c);
      } else {
        const cv::Vec3b bgr = raw.at<cv::Vec3b>(r, c);
        v = 0.299 * bgr[2] + 0.587 * bgr[1] + 0.114 * bgr[0];
      }
      values[static_cast<std::size_t>(r) * raw.cols + c] = std::min(v / 255.0, 1.0);
    }
  }
  try {
    return GrayMap(raw.cols, raw.rows, std::move(values));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

inline cv::Mat to_mat8(const GrayMap& map) {
  cv::Mat out(map.height(), map.width(), CV_8UC1);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      out.at<std::uint8_t>(r, c) = static_cast<std::uint8_t>(quantize(map.at(r, c)));
    }
  }
  return out;
}

/// Writes round(v * 255) as 8-bit gray; format follows the extension.
inline void save_gray_map(const GrayMap& map, const std::filesystem::path& path) {
  if (!detail::supported_extension(path)) {
    throw Error(ErrorCode::UnsupportedFormat, path.string() + " (expected .png or .pgm)");
  }
  std::vector<int> params;
  if (detail::lower_extension(path) == ".pgm") params = {cv::IMWRITE_PXM_BINARY, 1};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), to_mat8(map), params);
  } catch (const cv::Exception&) {
    ok = false;
  }
  if (!ok) throw Error(ErrorCode::WriteFailure, path.string());
}

}  // namespace coloc
