#pragma once

// Differentiable building blocks for the convolutional networks.
//
// Activations are stored channel-major: a FeatureMap with C channels of
// H x W pixels is a C x (H*W) row-major matrix, so every convolution reduces
// to one GEMM against an im2col buffer.

#include "dccycle/image.hpp"

namespace dccycle {

template <typename Scalar>
struct FeatureMap {
  Index channels = 0;
  Index height = 0;
  Index width = 0;
  Grid<Scalar> data;  // channels x (height * width)

  FeatureMap() = default;
  FeatureMap(Index c, Index h, Index w) : channels(c), height(h), width(w), data(Grid<Scalar>::Zero(c, h * w)) {}

  static FeatureMap from_grid(const Grid<Scalar>& pixels) {
    FeatureMap map(1, pixels.rows(), pixels.cols());
    map.data = Eigen::Map<const Grid<Scalar>>(pixels.data(), 1, pixels.size());
    return map;
  }

  /// Channel `c` viewed as an H x W grid.
  Grid<Scalar> channel_grid(Index c) const {
    return Eigen::Map<const Grid<Scalar>>(data.row(c).data(), height, width);
  }
};

/// Geometry of a 2-D convolution with square kernel and symmetric zero padding.
struct ConvGeometry {
  Index kernel = 3;
  Index stride = 1;
  Index padding = 1;

  Index output_extent(Index input_extent) const { return (input_extent + 2 * padding - kernel) / stride + 1; }
};

/// Unfolds `input` into a (C*k*k) x (Ho*Wo) patch matrix.
template <typename Scalar>
Grid<Scalar> im2col(const FeatureMap<Scalar>& input, const ConvGeometry& geom);

/// Adjoint of im2col: scatters-and-adds patch columns back into a C x H x W map.
template <typename Scalar>
FeatureMap<Scalar> col2im(const Grid<Scalar>& cols, Index channels, Index height, Index width,
                          const ConvGeometry& geom);

// Parameter views. Weights live inside one flat parameter vector owned by the
// network; layers read and accumulate into mapped slices of it.
template <typename Scalar>
using ConstMatrixMap = Eigen::Map<const Grid<Scalar>>;
template <typename Scalar>
using MatrixMap = Eigen::Map<Grid<Scalar>>;
template <typename Scalar>
using ConstVectorMap = Eigen::Map<const Vector<Scalar>>;
template <typename Scalar>
using VectorMap = Eigen::Map<Vector<Scalar>>;

/// weight: out x (in*k*k); bias: out.
template <typename Scalar>
FeatureMap<Scalar> conv2d_forward(const FeatureMap<Scalar>& input, const ConstMatrixMap<Scalar>& weight,
                                  const ConstVectorMap<Scalar>& bias, const ConvGeometry& geom);

/// Returns the input gradient. Parameter gradients are accumulated when the
/// corresponding map pointer is non-null.
template <typename Scalar>
FeatureMap<Scalar> conv2d_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                   const ConstMatrixMap<Scalar>& weight, const ConvGeometry& geom,
                                   MatrixMap<Scalar>* grad_weight, VectorMap<Scalar>* grad_bias);

/// Fractionally strided convolution; the exact adjoint of conv2d with the
/// same geometry, producing an output of `output_height` x `output_width`.
/// weight: in x (out*k*k); bias: out.
template <typename Scalar>
FeatureMap<Scalar> conv_transpose2d_forward(const FeatureMap<Scalar>& input, const ConstMatrixMap<Scalar>& weight,
                                            const ConstVectorMap<Scalar>& bias, const ConvGeometry& geom,
                                            Index output_height, Index output_width);

template <typename Scalar>
FeatureMap<Scalar> conv_transpose2d_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                             const ConstMatrixMap<Scalar>& weight, const ConvGeometry& geom,
                                             MatrixMap<Scalar>* grad_weight, VectorMap<Scalar>* grad_bias);

inline constexpr double kInstanceNormEpsilon = 1e-5;

/// Per-channel normalization to zero mean and unit (biased) variance.
template <typename Scalar>
FeatureMap<Scalar> instance_normalize(const FeatureMap<Scalar>& input, Scalar epsilon = Scalar(kInstanceNormEpsilon));

/// Normalization followed by per-channel affine rescale gamma * xhat + beta.
template <typename Scalar>
FeatureMap<Scalar> instance_norm_forward(const FeatureMap<Scalar>& input, const ConstVectorMap<Scalar>& gamma,
                                         const ConstVectorMap<Scalar>& beta);

template <typename Scalar>
FeatureMap<Scalar> instance_norm_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                          const ConstVectorMap<Scalar>& gamma, VectorMap<Scalar>* grad_gamma,
                                          VectorMap<Scalar>* grad_beta);

enum class Activation { relu, leaky_relu, tanh, sigmoid };

inline constexpr double kLeakySlope = 0.2;

template <typename Scalar>
FeatureMap<Scalar> activation_forward(const FeatureMap<Scalar>& input, Activation kind);

template <typename Scalar>
FeatureMap<Scalar> activation_backward(const FeatureMap<Scalar>& input, const FeatureMap<Scalar>& grad_output,
                                       Activation kind);

}  // namespace dccycle
