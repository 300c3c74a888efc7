#include "dccycle/plot.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace dccycle {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kLeft = 90;
constexpr int kRight = 30;
constexpr int kTop = 50;
constexpr int kBottom = 70;

const cv::Scalar kColors[] = {{200, 90, 30}, {40, 40, 210}, {40, 160, 40}, {150, 50, 150}};

std::string tick_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", v);
  return buffer;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<PlotSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series '" + s.label + "' has mismatched lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (!std::isfinite(x_min)) {
    x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  }
  if (x_max - x_min < 1e-12) x_min -= 0.5, x_max += 0.5;
  const double pad = std::max((y_max - y_min) * 0.1, 1e-6);
  y_min -= pad;
  y_max += pad;

  cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  const int plot_w = kWidth - kLeft - kRight;
  const int plot_h = kHeight - kTop - kBottom;
  auto to_px = [&](double x, double y) {
    return cv::Point(kLeft + static_cast<int>(std::lround((x - x_min) / (x_max - x_min) * plot_w)),
                     kTop + plot_h - static_cast<int>(std::lround((y - y_min) / (y_max - y_min) * plot_h)));
  };

  const cv::Scalar black(0, 0, 0), grey(210, 210, 210);
  const int font = cv::FONT_HERSHEY_SIMPLEX;
  for (int t = 0; t <= 5; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 5.0;
    const double yv = y_min + (y_max - y_min) * t / 5.0;
    const cv::Point px = to_px(xv, y_min), py = to_px(x_min, yv);
    cv::line(canvas, {px.x, kTop}, {px.x, kTop + plot_h}, grey, 1);
    cv::line(canvas, {kLeft, py.y}, {kLeft + plot_w, py.y}, grey, 1);
    cv::putText(canvas, tick_label(xv), {px.x - 14, kTop + plot_h + 20}, font, 0.45, black, 1, cv::LINE_AA);
    cv::putText(canvas, tick_label(yv), {8, py.y + 5}, font, 0.45, black, 1, cv::LINE_AA);
  }
  cv::rectangle(canvas, {kLeft, kTop}, {kLeft + plot_w, kTop + plot_h}, black, 1);
  cv::putText(canvas, title, {kLeft, 30}, font, 0.7, black, 2, cv::LINE_AA);
  cv::putText(canvas, x_label, {kLeft + plot_w / 2 - 20, kHeight - 20}, font, 0.6, black, 1, cv::LINE_AA);
  cv::putText(canvas, y_label, {8, kTop - 12}, font, 0.6, black, 1, cv::LINE_AA);

  for (std::size_t s = 0; s < series.size(); ++s) {
    const cv::Scalar color = kColors[s % std::size(kColors)];
    std::vector<cv::Point> points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (std::isfinite(series[s].x[i]) && std::isfinite(series[s].y[i])) {
        points.push_back(to_px(series[s].x[i], series[s].y[i]));
      }
    }
    if (points.size() > 1) cv::polylines(canvas, points, false, color, 2, cv::LINE_AA);
    for (const cv::Point& p : points) cv::circle(canvas, p, 4, color, cv::FILLED, cv::LINE_AA);
    const int ly = kTop + 20 + static_cast<int>(s) * 22;
    cv::line(canvas, {kLeft + plot_w - 90, ly - 5}, {kLeft + plot_w - 60, ly - 5}, color, 2);
    cv::putText(canvas, series[s].label, {kLeft + plot_w - 52, ly}, font, 0.55, black, 1, cv::LINE_AA);
  }

  if (!cv::imwrite(path, canvas)) throw std::runtime_error("cannot write plot '" + path + "'");
}

}  // namespace dccycle
