#include "dccycle/layers.hpp"

#include <cmath>

namespace dccycle {

template <typename Scalar>
Grid<Scalar> im2col(const FeatureMap<Scalar>& input, const ConvGeometry& geom) {
  const Index k = geom.kernel;
  const Index s = geom.stride;
  const Index p = geom.padding;
  const Index out_h = geom.output_extent(input.height);
  const Index out_w = geom.output_extent(input.width);
  Grid<Scalar> cols(input.channels * k * k, out_h * out_w);

  for (Index c = 0; c < input.channels; ++c) {
    const Scalar* plane = input.data.row(c).data();
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        Scalar* dst = cols.row((c * k + ky) * k + kx).data();
        for (Index oy = 0; oy < out_h; ++oy) {
          Scalar* row = dst + oy * out_w;
          const Index iy = oy * s - p + ky;
          if (iy < 0 || iy >= input.height) {
            std::fill(row, row + out_w, Scalar(0));
            continue;
          }
          const Scalar* src = plane + iy * input.width;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * s - p + kx;
            row[ox] = (ix >= 0 && ix < input.width) ? src[ix] : Scalar(0);
          }
        }
      }
    }
  }
  return cols;
}

template <typename Scalar>
FeatureMap<Scalar> col2im(const Grid<Scalar>& cols, Index channels, Index height, Index width,
                          const ConvGeometry& geom) {
  const Index k = geom.kernel;
  const Index s = geom.stride;
  const Index p = geom.padding;
  const Index out_h = geom.output_extent(height);
  const Index out_w = geom.output_extent(width);
  FeatureMap<Scalar> result(channels, height, width);

  for (Index c = 0; c < channels; ++c) {
    Scalar* plane = result.data.row(c).data();
    for (Index ky = 0; ky < k; ++ky) {
      for (Index kx = 0; kx < k; ++kx) {
        const Scalar* src = cols.row((c * k + ky) * k + kx).data();
        for (Index oy = 0; oy < out_h; ++oy) {
          const Index iy = oy * s - p + ky;
          if (iy < 0 || iy >= height) continue;
          const Scalar* row = src + oy * out_w;
          Scalar* dst = plane + iy * width;
          for (Index ox = 0; ox < out_w; ++ox) {
            const Index ix = ox * s - p + kx;
            if (ix >= 0 && ix < width) dst[ix] += row[ox];
          }
        }
      }
    }
  }
  return result;
}

template <typename Scalar>
FeatureMap<Scalar> conv2d_forward(const FeatureMap<Scalar>& input, const ConstMatrixMap<Scalar>& weight,
                                  const ConstVectorMap<Scalar>& bias, const ConvGeometry& geom) {
  FeatureMap<Scalar> out;
  out.channels = weight.rows();
  out.height = geom.output_extent(input.height);
  out.width = geom.output_extent(input.width);
  out.data.noalias() = weight * im2col(input, geom);
  out.data.colwise() += bias;
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> conv2d_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                   const ConstMatrixMap<Scalar>& weight, const ConvGeometry& geom,
                                   MatrixMap<Scalar>* grad_weight, VectorMap<Scalar>* grad_bias) {
  if (grad_weight != nullptr) {
    grad_weight->noalias() += grad_output.data * im2col(input, geom).transpose();
  }
  if (grad_bias != nullptr) {
    *grad_bias += grad_output.data.rowwise().sum();
  }
  const Grid<Scalar> grad_cols = weight.transpose() * grad_output.data;
  return col2im(grad_cols, input.channels, input.height, input.width, geom);
}

template <typename Scalar>
FeatureMap<Scalar> conv_transpose2d_forward(const FeatureMap<Scalar>& input, const ConstMatrixMap<Scalar>& weight,
                                            const ConstVectorMap<Scalar>& bias, const ConvGeometry& geom,
                                            Index output_height, Index output_width) {
  const Index out_channels = weight.cols() / (geom.kernel * geom.kernel);
  const Grid<Scalar> cols = weight.transpose() * input.data;
  FeatureMap<Scalar> out = col2im(cols, out_channels, output_height, output_width, geom);
  out.data.colwise() += bias;
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> conv_transpose2d_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                             const ConstMatrixMap<Scalar>& weight, const ConvGeometry& geom,
                                             MatrixMap<Scalar>* grad_weight, VectorMap<Scalar>* grad_bias) {
  const Grid<Scalar> grad_cols = im2col(grad_output, geom);
  if (grad_weight != nullptr) {
    grad_weight->noalias() += input.data * grad_cols.transpose();
  }
  if (grad_bias != nullptr) {
    *grad_bias += grad_output.data.rowwise().sum();
  }
  FeatureMap<Scalar> grad_input(input.channels, input.height, input.width);
  grad_input.data.noalias() = weight * grad_cols;
  return grad_input;
}

namespace {

template <typename Scalar>
void channel_moments(const FeatureMap<Scalar>& input, Scalar epsilon, Vector<Scalar>& mean, Vector<Scalar>& inv_std) {
  const Scalar n = Scalar(input.data.cols());
  mean = input.data.rowwise().sum() / n;
  const Grid<Scalar> centered = input.data.colwise() - mean;
  const Vector<Scalar> variance = centered.array().square().rowwise().sum() / n;
  inv_std = (variance.array() + epsilon).rsqrt();
}

}  // namespace

template <typename Scalar>
FeatureMap<Scalar> instance_normalize(const FeatureMap<Scalar>& input, Scalar epsilon) {
  Vector<Scalar> mean, inv_std;
  channel_moments(input, epsilon, mean, inv_std);
  FeatureMap<Scalar> out = input;
  out.data = (input.data.colwise() - mean).array().colwise() * inv_std.array();
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> instance_norm_forward(const FeatureMap<Scalar>& input, const ConstVectorMap<Scalar>& gamma,
                                         const ConstVectorMap<Scalar>& beta) {
  FeatureMap<Scalar> out = instance_normalize(input, Scalar(kInstanceNormEpsilon));
  out.data = (out.data.array().colwise() * gamma.array()).colwise() + beta.array();
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> instance_norm_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                          const ConstVectorMap<Scalar>& gamma, VectorMap<Scalar>* grad_gamma,
                                          VectorMap<Scalar>* grad_beta) {
  Vector<Scalar> mean, inv_std;
  channel_moments(input, Scalar(kInstanceNormEpsilon), mean, inv_std);
  const Scalar n = Scalar(input.data.cols());
  const Grid<Scalar> xhat = (input.data.colwise() - mean).array().colwise() * inv_std.array();

  if (grad_gamma != nullptr) {
    *grad_gamma += (grad_output.data.array() * xhat.array()).rowwise().sum().matrix();
  }
  if (grad_beta != nullptr) {
    *grad_beta += grad_output.data.rowwise().sum();
  }

  const Grid<Scalar> grad_xhat = grad_output.data.array().colwise() * gamma.array();
  const Vector<Scalar> sum_g = grad_xhat.rowwise().sum();
  const Vector<Scalar> sum_gx = (grad_xhat.array() * xhat.array()).rowwise().sum();

  FeatureMap<Scalar> grad_input(input.channels, input.height, input.width);
  grad_input.data = ((grad_xhat * n).colwise() - sum_g - (xhat.array().colwise() * sum_gx.array()).matrix())
                        .array()
                        .colwise() *
                    (inv_std.array() / n);
  return grad_input;
}

template <typename Scalar>
FeatureMap<Scalar> activation_forward(const FeatureMap<Scalar>& input, Activation kind) {
  FeatureMap<Scalar> out = input;
  auto x = input.data.array();
  switch (kind) {
    case Activation::relu:
      out.data = x.max(Scalar(0));
      break;
    case Activation::leaky_relu:
      out.data = (x > Scalar(0)).select(x, x * Scalar(kLeakySlope));
      break;
    case Activation::tanh:
      out.data = x.tanh();
      break;
    case Activation::sigmoid:
      out.data = (Scalar(1) + (-x).exp()).inverse();
      break;
  }
  return out;
}

template <typename Scalar>
FeatureMap<Scalar> activation_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                       Activation kind) {
  FeatureMap<Scalar> grad = grad_output;
  auto x = input.data.array();
  auto g = grad_output.data.array();
  switch (kind) {
    case Activation::relu:
      grad.data = (x > Scalar(0)).select(g, Scalar(0));
      break;
    case Activation::leaky_relu:
      grad.data = (x > Scalar(0)).select(g, g * Scalar(kLeakySlope));
      break;
    case Activation::tanh: {
      const auto t = x.tanh();
      grad.data = g * (Scalar(1) - t.square());
      break;
    }
    case Activation::sigmoid: {
      const Grid<Scalar> sig = (Scalar(1) + (-x).exp()).inverse();
      grad.data = g * sig.array() * (Scalar(1) - sig.array());
      break;
    }
  }
  return grad;
}

#define DCCYCLE_INSTANTIATE_LAYERS(S)                                                                           \
  template Grid<S> im2col(const FeatureMap<S>&, const ConvGeometry&);                                           \
  template FeatureMap<S> col2im(const Grid<S>&, Index, Index, Index, const ConvGeometry&);                      \
  template FeatureMap<S> conv2d_forward(const FeatureMap<S>&, const ConstMatrixMap<S>&, const ConstVectorMap<S>&, \
                                        const ConvGeometry&);                                                   \
  template FeatureMap<S> conv2d_backward(const FeatureMap<S>&, const FeatureMap<S>&, const ConstMatrixMap<S>&,  \
                                         const ConvGeometry&, MatrixMap<S>*, VectorMap<S>*);                    \
  template FeatureMap<S> conv_transpose2d_forward(const FeatureMap<S>&, const ConstMatrixMap<S>&,               \
                                                  const ConstVectorMap<S>&, const ConvGeometry&, Index, Index); \
  template FeatureMap<S> conv_transpose2d_backward(const FeatureMap<S>&, const FeatureMap<S>&,                  \
                                                   const ConstMatrixMap<S>&, const ConvGeometry&, MatrixMap<S>*, \
                                                   VectorMap<S>*);                                              \
  template FeatureMap<S> instance_normalize(const FeatureMap<S>&, S);                                           \
  template FeatureMap<S> instance_norm_forward(const FeatureMap<S>&, const ConstVectorMap<S>&,                  \
                                               const ConstVectorMap<S>&);                                       \
  template FeatureMap<S> instance_norm_backward(const FeatureMap<S>&, const FeatureMap<S>&,                     \
                                                const ConstVectorMap<S>&, VectorMap<S>*, VectorMap<S>*);        \
  template FeatureMap<S> activation_forward(const FeatureMap<S>&, Activation);                                  \
  template FeatureMap<S> activation_backward(const FeatureMap<S>&, const FeatureMap<S>&, Activation);

DCCYCLE_INSTANTIATE_LAYERS(float)
DCCYCLE_INSTANTIATE_LAYERS(double)

#undef DCCYCLE_INSTANTIATE_LAYERS

}  // namespace dccycle
