#include "dccycle/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

using namespace dccycle;

TEST_CASE("mae: identical, extremes and scalar-loop oracle") {
  std::mt19937_64 rng(1);
  const Grid<double> a = oracle::uniform_grid(32, 32, rng);
  CHECK(mae(a, a) == 0.0);
  CHECK(mae<double>(Grid<double>::Ones(8, 8), Grid<double>::Zero(8, 8)) == 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Grid<double> x = oracle::uniform_grid(16, 24, rng);
    const Grid<double> y = oracle::uniform_grid(16, 24, rng);
    CHECK(mae(x, y) == doctest::Approx(oracle::mae(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("psnr fixed points") {
  const Grid<double> a = Grid<double>::Constant(16, 16, 0.3);
  const Grid<double> b = Grid<double>::Constant(16, 16, 0.4);
  CHECK(mse(a, b) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(is_infinite_psnr(psnr(a, a)));
}

TEST_CASE("ssim fixed points") {
  std::mt19937_64 rng(2);
  const Grid<double> a = oracle::uniform_grid(32, 32, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  const SSIMParams params;
  for (auto [va, vb] : {std::pair{0.5, 0.5}, std::pair{0.2, 0.7}, std::pair{0.9, 0.1}}) {
    const Grid<double> ca = Grid<double>::Constant(16, 16, va);
    const Grid<double> cb = Grid<double>::Constant(16, 16, vb);
    const double expected = (2 * va * vb + params.c1()) / (va * va + vb * vb + params.c1());
    CHECK(ssim(ca, cb) == doctest::Approx(expected).epsilon(1e-12));
    const SSIMMaps<double> maps = ssim_maps(ca, cb);
    CHECK(maps.contrast.minCoeff() == doctest::Approx(1.0));
    CHECK(maps.structure.minCoeff() == doctest::Approx(1.0));
  }
}

TEST_CASE("ssim matches the windowed scalar oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Grid<double> a = oracle::uniform_grid(24, 20, rng);
    const Grid<double> b = oracle::structured_grid(24, rng, 0.2).leftCols(20);
    CHECK(ssim(a, b) == doctest::Approx(oracle::ssim(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("ssim maps compose to the combined form") {
  std::mt19937_64 rng(4);
  const Grid<double> a = oracle::uniform_grid(20, 20, rng);
  const Grid<double> b = oracle::structured_grid(20, rng, 0.1);
  const SSIMMaps<double> maps = ssim_maps(a, b);
  const Grid<double> product = maps.luminance.cwiseProduct(maps.contrast).cwiseProduct(maps.structure);
  CHECK((product - maps.ssim).cwiseAbs().maxCoeff() < 1e-10);

  const SSIMMaps<double> same = ssim_maps(a, a);
  CHECK((same.luminance.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((same.contrast.array() - 1.0).abs().maxCoeff() < 1e-12);
  CHECK((same.structure.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("ssim gradient agrees with finite differences") {
  std::mt19937_64 rng(5);
  const Grid<double> a = oracle::structured_grid(16, rng, 0.1);
  const Grid<double> b = oracle::structured_grid(16, rng, 0.1);
  Grid<double> grad;
  ssim(a, b, {}, &grad);
  const double h = 1e-4;
  for (Eigen::Index r = 0; r < 16; r += 3) {
    for (Eigen::Index c = 0; c < 16; c += 3) {
      Grid<double> plus = a, minus = a;
      plus(r, c) += h;
      minus(r, c) -= h;
      const double numeric = (ssim(plus, b) - ssim(minus, b)) / (2 * h);
      CHECK(oracle::relative_error(grad(r, c), numeric) < 1e-5);
    }
  }
}

TEST_CASE("error map") {
  std::mt19937_64 rng(6);
  const Image<double> real(oracle::uniform_grid(16, 16, rng), ValueRange::metric);
  CHECK(error_map(real, real).pixels().maxCoeff() == 0.0);
  const Image<double> flipped(Grid<double>(1.0 - real.pixels().array()), ValueRange::metric);
  const Grid<double> expected = (2.0 * real.pixels().array() - 1.0).abs();
  CHECK((error_map(real, flipped).pixels() - expected).cwiseAbs().maxCoeff() < 1e-15);

  const Image<double> other(oracle::uniform_grid(16, 16, rng), ValueRange::metric);
  double worst = 0.0;
  for (Index r = 0; r < 16; ++r) {
    for (Index c = 0; c < 16; ++c) worst = std::max(worst, std::fabs(real.pixels()(r, c) - other.pixels()(r, c)));
  }
  CHECK(error_map(real, other).pixels().maxCoeff() == worst);
}

TEST_CASE("image metrics refuse model-space inputs") {
  const Image<double> model(Grid<double>::Constant(8, 8, -0.5), ValueRange::model);
  const Image<double> metric(Grid<double>::Constant(8, 8, 0.5), ValueRange::metric);
  CHECK_THROWS_AS(mae(model, metric), std::invalid_argument);
  CHECK_THROWS_AS(mae(metric, Image<double>(Grid<double>::Constant(12, 12, 0.5), ValueRange::metric)),
                  std::invalid_argument);
}

TEST_CASE("summaries use the sample standard deviation") {
  const MetricSummary s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(summarize({7.0}).std == 0.0);
  CHECK(format_mean_std({0.04559, 0.0123}) == "0.04559 (0.01230)");
  const MetricSummary inf = summarize({1.0, std::numeric_limits<double>::infinity()});
  CHECK(std::isinf(inf.mean));
  CHECK(std::isnan(inf.std));
}

TEST_CASE("metric report aggregates and csv round trip") {
  std::vector<MetricRow> rows{{"b", 0.1, 20.0, 0.8}, {"a", 0.2, 25.0, 0.9}, {"c", 0.3, 30.0, 0.7}};
  const MetricReport report = MetricReport::from_rows(rows);
  CHECK(report.rows.size() == 3);
  CHECK(report.mae.mean == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(report.psnr.std == doctest::Approx(5.0).epsilon(1e-15));

  const auto path = std::filesystem::temp_directory_path() / "dccycle_report.csv";
  report.write_csv(path.string());
  const MetricReport back = MetricReport::read_csv(path.string());
  REQUIRE(back.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.rows[i].id == report.rows[i].id);
    CHECK(back.rows[i].mae == report.rows[i].mae);
    CHECK(back.rows[i].psnr == report.rows[i].psnr);
    CHECK(back.rows[i].ssim == report.rows[i].ssim);
  }
  CHECK(back.ssim.mean == report.ssim.mean);
  std::filesystem::remove(path);
}
