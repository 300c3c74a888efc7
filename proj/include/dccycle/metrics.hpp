#pragma once

// Image-quality metrics: MAE, MSE, PSNR and Gaussian-windowed SSIM, the
// latter with an analytic gradient so the same code path serves the SSIM
// cycle-consistency loss.

#include "dccycle/image.hpp"

#include <cmath>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace dccycle {

struct SSIMParams {
  int window_size = 11;
  double window_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  double c3() const { return c2() / 2.0; }

  void validate() const;
  /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
  Eigen::VectorXd window_taps() const;
};

/// Per-window SSIM factors over the valid window positions.
template <typename Scalar>
struct SSIMMaps {
  Grid<Scalar> luminance;
  Grid<Scalar> contrast;
  Grid<Scalar> structure;
  Grid<Scalar> ssim;  // evaluated directly from the combined form
};

template <typename Scalar>
Scalar mae(const Grid<Scalar>& a, const Grid<Scalar>& b);
template <typename Scalar>
Scalar mse(const Grid<Scalar>& a, const Grid<Scalar>& b);

/// 10 * log10(L / MSE). Identical inputs give +infinity.
template <typename Scalar>
double psnr(const Grid<Scalar>& a, const Grid<Scalar>& b, double dynamic_range = 1.0);

inline bool is_infinite_psnr(double value) { return std::isinf(value) && value > 0; }

/// Mean of the local SSIM map over valid window positions. When `grad_a` is
/// non-null it receives d SSIM / d a.
template <typename Scalar>
Scalar ssim(const Grid<Scalar>& a, const Grid<Scalar>& b, const SSIMParams& params = {},
            Grid<Scalar>* grad_a = nullptr);

template <typename Scalar>
SSIMMaps<Scalar> ssim_maps(const Grid<Scalar>& a, const Grid<Scalar>& b, const SSIMParams& params = {});

/// Valid-region separable Gaussian filtering with the SSIM window.
template <typename Scalar>
Grid<Scalar> gaussian_filter_valid(const Grid<Scalar>& input, const Eigen::VectorXd& taps);

// Image overloads: both images must share shape and be in metric space.
template <typename Scalar>
Scalar mae(const Image<Scalar>& a, const Image<Scalar>& b);
template <typename Scalar>
double psnr(const Image<Scalar>& a, const Image<Scalar>& b, double dynamic_range = 1.0);
template <typename Scalar>
Scalar ssim(const Image<Scalar>& a, const Image<Scalar>& b, const SSIMParams& params = {});

/// Per-pixel |real - synth| in metric space.
template <typename Scalar>
Image<Scalar> error_map(const Image<Scalar>& real, const Image<Scalar>& synth);

struct MetricRow {
  std::string id;
  double mae = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, zero for fewer than two values
};

/// Mean and sample standard deviation. Any +inf input makes the mean +inf and
/// the std NaN.
MetricSummary summarize(const std::vector<double>& values);

/// Formats a value as "mean (std)" with five decimals.
std::string format_mean_std(const MetricSummary& summary);

struct MetricReport {
  std::vector<MetricRow> rows;
  MetricSummary mae;
  MetricSummary psnr;
  MetricSummary ssim;

  static MetricReport from_rows(std::vector<MetricRow> rows);

  /// `id,mae,psnr,ssim` rows then `mean,...` and `std,...` footers.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  /// Reads the per-image rows back and recomputes the aggregates.
  static MetricReport read_csv(const std::string& path);
};

}  // namespace dccycle
