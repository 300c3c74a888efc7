#pragma once

#include "dccycle/image.hpp"
#include "dccycle/layers.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dccycle {

enum class Normalization { instance };

/// Encoder / residual / decoder generator.
///
/// Layout: 7x7 conv, `downsample_stages` stride-2 3x3 convs (channels double
/// each stage), `n_residual_blocks` residual blocks, the same number of
/// stride-1/2 transposed convs back to full resolution, and a 7x7 conv to one
/// channel followed by tanh. Every hidden conv is followed by instance
/// normalization and ReLU.
struct GeneratorSpec {
  Index input_size = 256;
  Index base_channels = 64;
  int n_residual_blocks = 9;
  int downsample_stages = 2;
  Normalization normalization = Normalization::instance;

  void validate() const;
  /// 64x64, 16 channels, 3 residual blocks.
  static GeneratorSpec toy();

  bool operator==(const GeneratorSpec&) const = default;
};

enum class OutputActivation { sigmoid, linear };

/// PatchGAN discriminator.
///
/// `downsample_stages` stride-2 4x4 convs (first without normalization, all
/// with leaky ReLU), one stride-1 3x3 conv, then a stride-1 3x3 conv to a
/// single channel. A 256 input with 4 stages gives a 16x16 patch grid.
struct DiscriminatorSpec {
  Index input_size = 256;
  Index base_channels = 64;
  int downsample_stages = 4;
  OutputActivation output_activation = OutputActivation::sigmoid;

  void validate() const;
  Index grid_side() const { return input_size >> downsample_stages; }
  /// Side of the input region seen by one output patch.
  Index receptive_field() const;
  static DiscriminatorSpec toy();

  bool operator==(const DiscriminatorSpec&) const = default;
};

enum class LayerKind { conv, conv_transpose, instance_norm, activation, residual_begin, residual_end };

struct LayerDesc {
  LayerKind kind = LayerKind::conv;
  Index in_channels = 0;
  Index out_channels = 0;
  ConvGeometry geometry;
  Activation activation = Activation::relu;
  // Offsets into the flat parameter vector. For conv: weight then bias; for
  // instance_norm: gamma then beta.
  Index weight_offset = 0;
  Index weight_rows = 0;
  Index weight_cols = 0;
  Index bias_offset = 0;
};

/// Activations recorded by a forward pass; inputs[i] is the input to layer i.
template <typename Scalar>
struct Tape {
  std::vector<FeatureMap<Scalar>> inputs;
};

using NetworkSpec = std::variant<GeneratorSpec, DiscriminatorSpec>;

/// A feed-forward network whose parameters live in a single flat vector in
/// declared layer order.
template <typename Scalar>
class Network {
 public:
  Network(NetworkSpec spec, std::vector<LayerDesc> layers, Index parameter_count);

  const NetworkSpec& spec() const { return spec_; }
  bool is_generator() const { return std::holds_alternative<GeneratorSpec>(spec_); }
  Index input_size() const;
  const std::vector<LayerDesc>& layers() const { return layers_; }

  Index parameter_count() const { return parameters_.size(); }
  Vector<Scalar>& parameters() { return parameters_; }
  const Vector<Scalar>& parameters() const { return parameters_; }

  /// Runs the network. When `tape` is given it receives what backward() needs.
  FeatureMap<Scalar> forward(const FeatureMap<Scalar>& input, Tape<Scalar>* tape = nullptr) const;

  /// Backpropagates `grad_output` through the recorded pass and returns the
  /// input gradient. Parameter gradients are accumulated into
  /// `grad_parameters` (sized like parameters()) unless it is null.
  FeatureMap<Scalar> backward(const Tape<Scalar>& tape, const FeatureMap<Scalar>& grad_output,
                              Vector<Scalar>* grad_parameters) const;

  /// Generator application to a model-space image.
  Image<Scalar> translate(const Image<Scalar>& image) const;
  /// Discriminator application; returns the patch grid.
  PatchGrid<Scalar> score(const Image<Scalar>& image) const;

 private:
  void check_input(const FeatureMap<Scalar>& input) const;

  NetworkSpec spec_;
  std::vector<LayerDesc> layers_;
  Vector<Scalar> parameters_;
};

/// Builds a generator; weights ~ N(0, 0.02) from `seed`, biases zero,
/// normalization gain one.
template <typename Scalar>
Network<Scalar> build_generator(const GeneratorSpec& spec, std::uint64_t seed);

template <typename Scalar>
Network<Scalar> build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

/// Builds whichever network `spec` describes.
template <typename Scalar>
Network<Scalar> build_network(const NetworkSpec& spec, std::uint64_t seed);

/// (G(x), F(G(x))).
template <typename Scalar>
std::pair<Image<Scalar>, Image<Scalar>> forward_cycle(const Network<Scalar>& g, const Network<Scalar>& f,
                                                      const Image<Scalar>& x);

/// Generator output wrapped as a model-space image. tanh keeps the values in
/// range; rounding at saturation is clipped.
template <typename Scalar>
Image<Scalar> to_image(const FeatureMap<Scalar>& map, Domain domain = Domain::none, std::string id = {});

extern template class Network<float>;
extern template class Network<double>;

}  // namespace dccycle
