#pragma once

#include "dccycle/image.hpp"

namespace dccycle {

/// One unpaired training sample plus the real source-domain negatives.
/// x_neg is a real X image shown to D_Y as class 0; y_neg is a real Y image
/// shown to D_X as class 0.
template <typename Scalar>
struct TrainingBatch {
  Image<Scalar> x;
  Image<Scalar> y;
  Image<Scalar> x_neg;
  Image<Scalar> y_neg;
};

}  // namespace dccycle
