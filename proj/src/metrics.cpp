#include "dccycle/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace dccycle {

void SSIMParams::validate() const {
  if (window_size < 1 || window_size % 2 == 0) throw std::invalid_argument("ssim window_size must be odd and positive");
  if (!(window_sigma > 0)) throw std::invalid_argument("ssim window_sigma must be positive");
  if (!(dynamic_range > 0)) throw std::invalid_argument("ssim dynamic_range must be positive");
  if (k1 < 0 || k2 < 0) throw std::invalid_argument("ssim k1/k2 must be nonnegative");
}

Eigen::VectorXd SSIMParams::window_taps() const {
  validate();
  Eigen::VectorXd taps(window_size);
  const double center = (window_size - 1) / 2.0;
  for (int i = 0; i < window_size; ++i) {
    const double d = i - center;
    taps[i] = std::exp(-d * d / (2.0 * window_sigma * window_sigma));
  }
  return taps / taps.sum();
}

template <typename Scalar>
Grid<Scalar> gaussian_filter_valid(const Grid<Scalar>& input, const Eigen::VectorXd& taps) {
  const Index k = taps.size();
  const Index out_h = input.rows() - k + 1;
  const Index out_w = input.cols() - k + 1;
  Grid<Scalar> horizontal = Grid<Scalar>::Zero(input.rows(), out_w);
  for (Index b = 0; b < k; ++b) {
    horizontal += Scalar(taps[b]) * input.middleCols(b, out_w);
  }
  Grid<Scalar> out = Grid<Scalar>::Zero(out_h, out_w);
  for (Index a = 0; a < k; ++a) {
    out += Scalar(taps[a]) * horizontal.middleRows(a, out_h);
  }
  return out;
}

namespace {

// Adjoint of gaussian_filter_valid: spreads a valid-size map back over the
// full image.
template <typename Scalar>
Grid<Scalar> gaussian_filter_adjoint(const Grid<Scalar>& valid, const Eigen::VectorXd& taps, Index rows, Index cols) {
  const Index k = taps.size();
  Grid<Scalar> horizontal = Grid<Scalar>::Zero(rows, valid.cols());
  for (Index a = 0; a < k; ++a) {
    horizontal.middleRows(a, valid.rows()) += Scalar(taps[a]) * valid;
  }
  Grid<Scalar> out = Grid<Scalar>::Zero(rows, cols);
  for (Index b = 0; b < k; ++b) {
    out.middleCols(b, valid.cols()) += Scalar(taps[b]) * horizontal;
  }
  return out;
}

template <typename Scalar>
struct LocalMoments {
  Grid<Scalar> mu_a, mu_b, var_a, var_b, cov;
};

template <typename Scalar>
LocalMoments<Scalar> local_moments(const Grid<Scalar>& a, const Grid<Scalar>& b, const SSIMParams& params,
                                   const Eigen::VectorXd& taps) {
  require_same_shape(a, b, "ssim");
  if (a.rows() < params.window_size || a.cols() < params.window_size) {
    throw std::invalid_argument("ssim: image " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " is smaller than the " + std::to_string(params.window_size) + "-pixel window");
  }
  LocalMoments<Scalar> m;
  m.mu_a = gaussian_filter_valid(a, taps);
  m.mu_b = gaussian_filter_valid(b, taps);
  m.var_a = gaussian_filter_valid<Scalar>(a.array().square().matrix(), taps).array() - m.mu_a.array().square();
  m.var_b = gaussian_filter_valid<Scalar>(b.array().square().matrix(), taps).array() - m.mu_b.array().square();
  m.cov = gaussian_filter_valid<Scalar>(a.cwiseProduct(b), taps).array() - m.mu_a.array() * m.mu_b.array();
  return m;
}

}  // namespace

template <typename Scalar>
Scalar mae(const Grid<Scalar>& a, const Grid<Scalar>& b) {
  require_same_shape(a, b, "mae");
  return (a - b).cwiseAbs().mean();
}

template <typename Scalar>
Scalar mse(const Grid<Scalar>& a, const Grid<Scalar>& b) {
  require_same_shape(a, b, "mse");
  return (a - b).array().square().mean();
}

template <typename Scalar>
double psnr(const Grid<Scalar>& a, const Grid<Scalar>& b, double dynamic_range) {
  if (!(dynamic_range > 0)) throw std::invalid_argument("psnr: dynamic range must be positive");
  const double error = static_cast<double>(mse(a, b));
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(dynamic_range / error);
}

template <typename Scalar>
Scalar ssim(const Grid<Scalar>& a, const Grid<Scalar>& b, const SSIMParams& params, Grid<Scalar>* grad_a) {
  const Eigen::VectorXd taps = params.window_taps();
  const LocalMoments<Scalar> m = local_moments(a, b, params, taps);
  const Scalar c1 = Scalar(params.c1());
  const Scalar c2 = Scalar(params.c2());

  const auto n1 = Scalar(2) * m.mu_a.array() * m.mu_b.array() + c1;
  const auto n2 = Scalar(2) * m.cov.array() + c2;
  const auto d1 = m.mu_a.array().square() + m.mu_b.array().square() + c1;
  const auto d2 = m.var_a.array() + m.var_b.array() + c2;
  const Grid<Scalar> denom = d1 * d2;
  const Grid<Scalar> map = (n1 * n2) / denom.array();
  const Scalar count = Scalar(map.size());
  const Scalar value = map.mean();

  if (grad_a != nullptr) {
    // Partials with respect to the local moments, then through the filter.
    const Grid<Scalar> d_var = -map.array() / d2;
    const Grid<Scalar> d_cov = Scalar(2) * n1 / denom.array();
    const Grid<Scalar> d_mu_partial =
        Scalar(2) * m.mu_b.array() * n2 / denom.array() - Scalar(2) * m.mu_a.array() * map.array() / d1;
    const Grid<Scalar> d_mu = d_mu_partial.array() - Scalar(2) * m.mu_a.array() * d_var.array() -
                              m.mu_b.array() * d_cov.array();
    const Index rows = a.rows();
    const Index cols = a.cols();
    *grad_a = (gaussian_filter_adjoint<Scalar>(d_mu, taps, rows, cols).array() +
               Scalar(2) * a.array() * gaussian_filter_adjoint<Scalar>(d_var, taps, rows, cols).array() +
               b.array() * gaussian_filter_adjoint<Scalar>(d_cov, taps, rows, cols).array()) /
              count;
  }
  return value;
}

template <typename Scalar>
SSIMMaps<Scalar> ssim_maps(const Grid<Scalar>& a, const Grid<Scalar>& b, const SSIMParams& params) {
  const Eigen::VectorXd taps = params.window_taps();
  const LocalMoments<Scalar> m = local_moments(a, b, params, taps);
  const Scalar c1 = Scalar(params.c1());
  const Scalar c2 = Scalar(params.c2());
  const Scalar c3 = Scalar(params.c3());
  // Rounding can leave tiny negative variances; the standard deviation clamps them.
  const Grid<Scalar> sd_a = m.var_a.cwiseMax(Scalar(0)).cwiseSqrt();
  const Grid<Scalar> sd_b = m.var_b.cwiseMax(Scalar(0)).cwiseSqrt();

  SSIMMaps<Scalar> maps;
  maps.luminance = (Scalar(2) * m.mu_a.array() * m.mu_b.array() + c1) /
                   (m.mu_a.array().square() + m.mu_b.array().square() + c1);
  maps.contrast = (Scalar(2) * sd_a.array() * sd_b.array() + c2) / (m.var_a.array() + m.var_b.array() + c2);
  maps.structure = (m.cov.array() + c3) / (sd_a.array() * sd_b.array() + c3);
  maps.ssim = ((Scalar(2) * m.mu_a.array() * m.mu_b.array() + c1) * (Scalar(2) * m.cov.array() + c2)) /
              ((m.mu_a.array().square() + m.mu_b.array().square() + c1) * (m.var_a.array() + m.var_b.array() + c2));
  return maps;
}

namespace {

template <typename Scalar>
void require_metric_pair(const Image<Scalar>& a, const Image<Scalar>& b, const char* what) {
  if (a.range() != ValueRange::metric || b.range() != ValueRange::metric) {
    throw std::invalid_argument(std::string(what) + ": images must be in metric space [0,1]");
  }
  require_same_shape(a.pixels(), b.pixels(), what);
}

}  // namespace

template <typename Scalar>
Scalar mae(const Image<Scalar>& a, const Image<Scalar>& b) {
  require_metric_pair(a, b, "mae");
  return mae(a.pixels(), b.pixels());
}

template <typename Scalar>
double psnr(const Image<Scalar>& a, const Image<Scalar>& b, double dynamic_range) {
  require_metric_pair(a, b, "psnr");
  return psnr(a.pixels(), b.pixels(), dynamic_range);
}

template <typename Scalar>
Scalar ssim(const Image<Scalar>& a, const Image<Scalar>& b, const SSIMParams& params) {
  require_metric_pair(a, b, "ssim");
  return ssim(a.pixels(), b.pixels(), params);
}

template <typename Scalar>
Image<Scalar> error_map(const Image<Scalar>& real, const Image<Scalar>& synth) {
  require_metric_pair(real, synth, "error_map");
  return Image<Scalar>((real.pixels() - synth.pixels()).cwiseAbs(), ValueRange::metric, real.domain(), real.id());
}

MetricSummary summarize(const std::vector<double>& values) {
  MetricSummary s;
  if (values.empty()) return s;
  if (std::any_of(values.begin(), values.end(), [](double v) { return std::isinf(v); })) {
    return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::quiet_NaN()};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string format_mean_std(const MetricSummary& summary) {
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), "%.5f (%.5f)", summary.mean, summary.std);
  return buffer;
}

MetricReport MetricReport::from_rows(std::vector<MetricRow> rows) {
  MetricReport report;
  report.rows = std::move(rows);
  std::vector<double> maes, psnrs, ssims;
  for (const MetricRow& row : report.rows) {
    maes.push_back(row.mae);
    psnrs.push_back(row.psnr);
    ssims.push_back(row.ssim);
  }
  report.mae = summarize(maes);
  report.psnr = summarize(psnrs);
  report.ssim = summarize(ssims);
  return report;
}

void MetricReport::write_csv(std::ostream& out) const {
  out << std::setprecision(17);
  out << "id,mae,psnr,ssim\n";
  for (const MetricRow& row : rows) {
    out << row.id << ',' << row.mae << ',' << row.psnr << ',' << row.ssim << '\n';
  }
  out << "mean," << mae.mean << ',' << psnr.mean << ',' << ssim.mean << '\n';
  out << "std," << mae.std << ',' << psnr.std << ',' << ssim.std << '\n';
}

void MetricReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out);
}

MetricReport MetricReport::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != "id,mae,psnr,ssim") {
    throw std::runtime_error(path + ": missing metrics header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, mae_s, psnr_s, ssim_s;
    std::getline(ss, id, ',');
    std::getline(ss, mae_s, ',');
    std::getline(ss, psnr_s, ',');
    std::getline(ss, ssim_s, ',');
    if (id == "mean" || id == "std") continue;
    rows.push_back({id, std::stod(mae_s), std::stod(psnr_s), std::stod(ssim_s)});
  }
  return from_rows(std::move(rows));
}

#define DCCYCLE_INSTANTIATE_METRICS(S)                                                      \
  template Grid<S> gaussian_filter_valid(const Grid<S>&, const Eigen::VectorXd&);           \
  template S mae(const Grid<S>&, const Grid<S>&);                                           \
  template S mse(const Grid<S>&, const Grid<S>&);                                           \
  template double psnr(const Grid<S>&, const Grid<S>&, double);                             \
  template S ssim(const Grid<S>&, const Grid<S>&, const SSIMParams&, Grid<S>*);             \
  template SSIMMaps<S> ssim_maps(const Grid<S>&, const Grid<S>&, const SSIMParams&);        \
  template S mae(const Image<S>&, const Image<S>&);                                         \
  template double psnr(const Image<S>&, const Image<S>&, double);                           \
  template S ssim(const Image<S>&, const Image<S>&, const SSIMParams&);                     \
  template Image<S> error_map(const Image<S>&, const Image<S>&);

DCCYCLE_INSTANTIATE_METRICS(float)
DCCYCLE_INSTANTIATE_METRICS(double)

#undef DCCYCLE_INSTANTIATE_METRICS

}  // namespace dccycle
