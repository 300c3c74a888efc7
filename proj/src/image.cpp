#include "dccycle/image.hpp"

#include <stdexcept>

namespace dccycle {

const char* to_string(ValueRange range) {
  return range == ValueRange::model ? "model[-1,1]" : "metric[0,1]";
}

const char* to_string(Domain domain) {
  switch (domain) {
    case Domain::x:
      return "x";
    case Domain::y:
      return "y";
    case Domain::none:
      break;
  }
  return "none";
}

template <typename Scalar>
Image<Scalar>::Image(Grid<Scalar> pixels, ValueRange range, Domain domain, std::string id)
    : pixels_(std::move(pixels)), range_(range), domain_(domain), id_(std::move(id)) {
  if (pixels_.rows() <= 0 || pixels_.rows() % 4 != 0) {
    throw std::invalid_argument("image height " + std::to_string(pixels_.rows()) +
                                " must be a positive multiple of 4");
  }
  if (pixels_.cols() <= 0 || pixels_.cols() % 4 != 0) {
    throw std::invalid_argument("image width " + std::to_string(pixels_.cols()) +
                                " must be a positive multiple of 4");
  }
  const Scalar lo = range_ == ValueRange::model ? Scalar(-1) : Scalar(0);
  const Scalar hi = Scalar(1);
  // NaN fails both comparisons, so test the negation.
  if (!((pixels_.array() >= lo).all() && (pixels_.array() <= hi).all())) {
    throw std::domain_error(std::string("image '") + id_ + "' has values outside " + to_string(range_));
  }
}

template <typename Scalar>
Image<Scalar> Image<Scalar>::to_metric() const {
  if (range_ == ValueRange::metric) return *this;
  return Image(model_to_metric(pixels_), ValueRange::metric, domain_, id_);
}

template <typename Scalar>
Image<Scalar> Image<Scalar>::to_model() const {
  if (range_ == ValueRange::model) return *this;
  return Image(metric_to_model(pixels_), ValueRange::model, domain_, id_);
}

template class Image<float>;
template class Image<double>;

}  // namespace dccycle
