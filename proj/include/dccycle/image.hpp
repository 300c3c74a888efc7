#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dccycle {

using Index = Eigen::Index;

/// Row-major dense grid. Pixels, patch scores and SSIM maps all use this.
template <typename Scalar>
using Grid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-patch realness scores produced by a discriminator.
template <typename Scalar>
using PatchGrid = Grid<Scalar>;

/// Model space is [-1, 1]; metric space is [0, 1].
enum class ValueRange { model, metric };

/// Which pool an image was drawn from. Carried so that negative samples can be
/// audited after batching.
enum class Domain { none, x, y };

const char* to_string(ValueRange range);
const char* to_string(Domain domain);

/// Single-channel intensity image with a declared value range.
///
/// Construction validates that both sides are positive multiples of 4 and that
/// every pixel lies inside the declared range.
template <typename Scalar>
class Image {
 public:
  Image(Grid<Scalar> pixels, ValueRange range, Domain domain = Domain::none, std::string id = {});

  Index height() const { return pixels_.rows(); }
  Index width() const { return pixels_.cols(); }
  static constexpr Index channels() { return 1; }

  const Grid<Scalar>& pixels() const { return pixels_; }
  ValueRange range() const { return range_; }
  Domain domain() const { return domain_; }
  const std::string& id() const { return id_; }

  bool same_shape(const Image& other) const {
    return height() == other.height() && width() == other.width();
  }

  /// Linear map [-1,1] -> [0,1]. A metric-space image is returned unchanged.
  Image to_metric() const;
  /// Linear map [0,1] -> [-1,1]. A model-space image is returned unchanged.
  Image to_model() const;

  template <typename Other>
  Image<Other> cast() const {
    return Image<Other>(pixels_.template cast<Other>(), range_, domain_, id_);
  }

 private:
  Grid<Scalar> pixels_;
  ValueRange range_;
  Domain domain_;
  std::string id_;
};

/// Throws std::invalid_argument unless both grids have identical shape.
template <typename A, typename B>
void require_same_shape(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ")");
  }
}

template <typename Scalar>
Grid<Scalar> model_to_metric(const Grid<Scalar>& model) {
  return (model.array() + Scalar(1)) * Scalar(0.5);
}

template <typename Scalar>
Grid<Scalar> metric_to_model(const Grid<Scalar>& metric) {
  return metric.array() * Scalar(2) - Scalar(1);
}

extern template class Image<float>;
extern template class Image<double>;

}  // namespace dccycle
