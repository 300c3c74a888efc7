#include "dccycle/png_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <stdexcept>

namespace dccycle {

Grid<double> read_png(const std::string& path) {
  const cv::Mat raw = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (raw.empty()) throw std::runtime_error("cannot read image file '" + path + "'");
  if (raw.channels() != 1) {
    throw std::runtime_error("'" + path + "' has " + std::to_string(raw.channels()) +
                             " channels; expected grayscale");
  }
  double scale = 0.0;
  if (raw.depth() == CV_8U) {
    scale = 255.0;
  } else if (raw.depth() == CV_16U) {
    scale = 65535.0;
  } else {
    throw std::runtime_error("'" + path + "' is neither 8- nor 16-bit");
  }
  Grid<double> grid(raw.rows, raw.cols);
  for (int r = 0; r < raw.rows; ++r) {
    for (int c = 0; c < raw.cols; ++c) {
      const double level = raw.depth() == CV_8U ? raw.at<std::uint8_t>(r, c) : raw.at<std::uint16_t>(r, c);
      grid(r, c) = level / scale;
    }
  }
  return grid;
}

Grid<double> quantize8(const Grid<double>& metric) {
  return (metric.array() * 255.0 + 0.5).floor().max(0.0).min(255.0);
}

void write_png8(const std::string& path, const Grid<double>& metric) {
  const Grid<double> levels = quantize8(metric);
  cv::Mat out(static_cast<int>(levels.rows()), static_cast<int>(levels.cols()), CV_8UC1);
  for (int r = 0; r < out.rows; ++r) {
    auto* row = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < out.cols; ++c) row[c] = static_cast<std::uint8_t>(levels(r, c));
  }
  if (!cv::imwrite(path, out)) throw std::runtime_error("cannot write image file '" + path + "'");
}

Grid<double> resize_bilinear(const Grid<double>& input, Index height, Index width) {
  if (input.rows() == height && input.cols() == width) return input;
  cv::Mat src(static_cast<int>(input.rows()), static_cast<int>(input.cols()), CV_64F,
              const_cast<double*>(input.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(static_cast<int>(width), static_cast<int>(height)), 0, 0, cv::INTER_LINEAR);
  Grid<double> out(height, width);
  for (int r = 0; r < dst.rows; ++r) {
    const double* row = dst.ptr<double>(r);
    for (int c = 0; c < dst.cols; ++c) out(r, c) = row[c];
  }
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace dccycle
