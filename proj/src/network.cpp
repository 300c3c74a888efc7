#include "dccycle/network.hpp"

#include <random>
#include <stdexcept>

namespace dccycle {

namespace {

constexpr double kInitStddev = 0.02;

class LayerPlan {
 public:
  void conv(Index in, Index out, Index kernel, Index stride, Index padding) {
    add_weighted(LayerKind::conv, in, out, {kernel, stride, padding}, out, in * kernel * kernel);
  }
  void conv_transpose(Index in, Index out, Index kernel, Index stride, Index padding) {
    add_weighted(LayerKind::conv_transpose, in, out, {kernel, stride, padding}, in, out * kernel * kernel);
  }
  void instance_norm(Index channels) {
    LayerDesc layer;
    layer.kind = LayerKind::instance_norm;
    layer.in_channels = layer.out_channels = channels;
    layer.weight_offset = count_;
    layer.weight_rows = channels;
    layer.weight_cols = 1;
    layer.bias_offset = count_ + channels;
    count_ += 2 * channels;
    layers_.push_back(layer);
  }
  void activation(Activation kind) {
    LayerDesc layer;
    layer.kind = LayerKind::activation;
    layer.activation = kind;
    layers_.push_back(layer);
  }
  void marker(LayerKind kind) {
    LayerDesc layer;
    layer.kind = kind;
    layers_.push_back(layer);
  }

  std::vector<LayerDesc> layers() const { return layers_; }
  Index parameter_count() const { return count_; }

 private:
  void add_weighted(LayerKind kind, Index in, Index out, ConvGeometry geom, Index rows, Index cols) {
    LayerDesc layer;
    layer.kind = kind;
    layer.in_channels = in;
    layer.out_channels = out;
    layer.geometry = geom;
    layer.weight_offset = count_;
    layer.weight_rows = rows;
    layer.weight_cols = cols;
    layer.bias_offset = count_ + rows * cols;
    count_ += rows * cols + out;
    layers_.push_back(layer);
  }

  std::vector<LayerDesc> layers_;
  Index count_ = 0;
};

template <typename Scalar>
void initialize(Network<Scalar>& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, kInitStddev);
  Vector<Scalar>& params = net.parameters();
  params.setZero();
  for (const LayerDesc& layer : net.layers()) {
    if (layer.kind == LayerKind::conv || layer.kind == LayerKind::conv_transpose) {
      for (Index i = 0; i < layer.weight_rows * layer.weight_cols; ++i) {
        params[layer.weight_offset + i] = static_cast<Scalar>(normal(rng));
      }
    } else if (layer.kind == LayerKind::instance_norm) {
      params.segment(layer.weight_offset, layer.weight_rows).setOnes();
    }
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (input_size <= 0) throw std::invalid_argument("generator input_size must be positive");
  if (base_channels <= 0) throw std::invalid_argument("generator base_channels must be positive");
  if (n_residual_blocks < 1) throw std::invalid_argument("generator n_residual_blocks must be >= 1");
  if (downsample_stages < 1) throw std::invalid_argument("generator downsample_stages must be >= 1");
  const Index factor = Index(1) << downsample_stages;
  if (input_size % factor != 0) {
    throw std::invalid_argument("generator input_size " + std::to_string(input_size) + " is not divisible by 2^" +
                                std::to_string(downsample_stages) + " = " + std::to_string(factor));
  }
}

GeneratorSpec GeneratorSpec::toy() { return {64, 16, 3, 2, Normalization::instance}; }

void DiscriminatorSpec::validate() const {
  if (input_size <= 0) throw std::invalid_argument("discriminator input_size must be positive");
  if (base_channels <= 0) throw std::invalid_argument("discriminator base_channels must be positive");
  if (downsample_stages < 1) throw std::invalid_argument("discriminator downsample_stages must be >= 1");
  const Index factor = Index(1) << downsample_stages;
  if (input_size % factor != 0) {
    throw std::invalid_argument("discriminator input_size " + std::to_string(input_size) +
                                " is not divisible by 2^" + std::to_string(downsample_stages) + " = " +
                                std::to_string(factor));
  }
}

Index DiscriminatorSpec::receptive_field() const {
  // Each layer adds (kernel - 1) * jump, where jump is the product of earlier strides.
  Index field = 1;
  Index jump = 1;
  for (int i = 0; i < downsample_stages; ++i) {
    field += 3 * jump;
    jump *= 2;
  }
  field += 2 * jump;  // stride-1 3x3 conv
  field += 2 * jump;  // output 3x3 conv
  return field;
}

DiscriminatorSpec DiscriminatorSpec::toy() { return {64, 16, 4, OutputActivation::sigmoid}; }

template <typename Scalar>
Network<Scalar>::Network(NetworkSpec spec, std::vector<LayerDesc> layers, Index parameter_count)
    : spec_(std::move(spec)), layers_(std::move(layers)), parameters_(Vector<Scalar>::Zero(parameter_count)) {}

template <typename Scalar>
Index Network<Scalar>::input_size() const {
  return std::visit([](const auto& s) { return s.input_size; }, spec_);
}

template <typename Scalar>
void Network<Scalar>::check_input(const FeatureMap<Scalar>& input) const {
  const char* role = is_generator() ? "generator" : "discriminator";
  if (input.channels != 1) {
    throw std::invalid_argument(std::string(role) + " expects 1 input channel, got " +
                                std::to_string(input.channels));
  }
  if (input.height != input_size()) {
    throw std::invalid_argument(std::string(role) + " input height " + std::to_string(input.height) +
                                " does not match input_size " + std::to_string(input_size()));
  }
  if (input.width != input_size()) {
    throw std::invalid_argument(std::string(role) + " input width " + std::to_string(input.width) +
                                " does not match input_size " + std::to_string(input_size()));
  }
}

template <typename Scalar>
FeatureMap<Scalar> Network<Scalar>::forward(const FeatureMap<Scalar>& input, Tape<Scalar>* tape) const {
  check_input(input);
  if (tape != nullptr) {
    tape->inputs.clear();
    tape->inputs.resize(layers_.size());
  }
  const Scalar* p = parameters_.data();
  FeatureMap<Scalar> x = input;
  FeatureMap<Scalar> skip;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerDesc& layer = layers_[i];
    const bool keep_input = layer.kind != LayerKind::residual_begin && layer.kind != LayerKind::residual_end;
    if (tape != nullptr && keep_input) tape->inputs[i] = x;
    switch (layer.kind) {
      case LayerKind::conv:
        x = conv2d_forward<Scalar>(x, ConstMatrixMap<Scalar>(p + layer.weight_offset, layer.weight_rows, layer.weight_cols),
                                   ConstVectorMap<Scalar>(p + layer.bias_offset, layer.out_channels), layer.geometry);
        break;
      case LayerKind::conv_transpose:
        x = conv_transpose2d_forward<Scalar>(
            x, ConstMatrixMap<Scalar>(p + layer.weight_offset, layer.weight_rows, layer.weight_cols),
            ConstVectorMap<Scalar>(p + layer.bias_offset, layer.out_channels), layer.geometry,
            x.height * layer.geometry.stride, x.width * layer.geometry.stride);
        break;
      case LayerKind::instance_norm:
        x = instance_norm_forward<Scalar>(x, ConstVectorMap<Scalar>(p + layer.weight_offset, layer.weight_rows),
                                          ConstVectorMap<Scalar>(p + layer.bias_offset, layer.weight_rows));
        break;
      case LayerKind::activation:
        x = activation_forward(x, layer.activation);
        break;
      case LayerKind::residual_begin:
        skip = x;
        break;
      case LayerKind::residual_end:
        x.data += skip.data;
        break;
    }
  }
  return x;
}

template <typename Scalar>
FeatureMap<Scalar> Network<Scalar>::backward(const Tape<Scalar>& tape, const FeatureMap<Scalar>& grad_output,
                                             Vector<Scalar>* grad_parameters) const {
  if (tape.inputs.size() != layers_.size()) throw std::logic_error("backward called without a matching tape");
  if (grad_parameters != nullptr && grad_parameters->size() != parameters_.size()) {
    throw std::invalid_argument("gradient buffer size does not match parameter count");
  }
  const Scalar* p = parameters_.data();
  Scalar* gp = grad_parameters != nullptr ? grad_parameters->data() : nullptr;
  FeatureMap<Scalar> grad = grad_output;
  FeatureMap<Scalar> skip_grad;

  for (std::size_t r = layers_.size(); r-- > 0;) {
    const LayerDesc& layer = layers_[r];
    const FeatureMap<Scalar>& input = tape.inputs[r];
    switch (layer.kind) {
      case LayerKind::conv:
      case LayerKind::conv_transpose: {
        const ConstMatrixMap<Scalar> weight(p + layer.weight_offset, layer.weight_rows, layer.weight_cols);
        MatrixMap<Scalar> gw(gp != nullptr ? gp + layer.weight_offset : nullptr, layer.weight_rows, layer.weight_cols);
        VectorMap<Scalar> gb(gp != nullptr ? gp + layer.bias_offset : nullptr, layer.out_channels);
        MatrixMap<Scalar>* gw_ptr = gp != nullptr ? &gw : nullptr;
        VectorMap<Scalar>* gb_ptr = gp != nullptr ? &gb : nullptr;
        grad = layer.kind == LayerKind::conv
                   ? conv2d_backward<Scalar>(input, grad, weight, layer.geometry, gw_ptr, gb_ptr)
                   : conv_transpose2d_backward<Scalar>(input, grad, weight, layer.geometry, gw_ptr, gb_ptr);
        break;
      }
      case LayerKind::instance_norm: {
        const ConstVectorMap<Scalar> gamma(p + layer.weight_offset, layer.weight_rows);
        VectorMap<Scalar> gg(gp != nullptr ? gp + layer.weight_offset : nullptr, layer.weight_rows);
        VectorMap<Scalar> gb(gp != nullptr ? gp + layer.bias_offset : nullptr, layer.weight_rows);
        grad = instance_norm_backward<Scalar>(input, grad, gamma, gp != nullptr ? &gg : nullptr,
                                              gp != nullptr ? &gb : nullptr);
        break;
      }
      case LayerKind::activation:
        grad = activation_backward(input, grad, layer.activation);
        break;
      case LayerKind::residual_end:
        skip_grad = grad;
        break;
      case LayerKind::residual_begin:
        grad.data += skip_grad.data;
        break;
    }
  }
  return grad;
}

template <typename Scalar>
Image<Scalar> to_image(const FeatureMap<Scalar>& map, Domain domain, std::string id) {
  if (map.channels != 1) throw std::invalid_argument("to_image expects a single-channel map");
  Grid<Scalar> pixels = map.channel_grid(0).cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
  return Image<Scalar>(std::move(pixels), ValueRange::model, domain, std::move(id));
}

template <typename Scalar>
Image<Scalar> Network<Scalar>::translate(const Image<Scalar>& image) const {
  if (!is_generator()) throw std::logic_error("translate() called on a discriminator");
  const Image<Scalar> model = image.to_model();
  return to_image(forward(FeatureMap<Scalar>::from_grid(model.pixels())), Domain::none, image.id());
}

template <typename Scalar>
PatchGrid<Scalar> Network<Scalar>::score(const Image<Scalar>& image) const {
  if (is_generator()) throw std::logic_error("score() called on a generator");
  const Image<Scalar> model = image.to_model();
  return forward(FeatureMap<Scalar>::from_grid(model.pixels())).channel_grid(0);
}

template <typename Scalar>
Network<Scalar> build_generator(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  LayerPlan plan;
  const Index base = spec.base_channels;
  plan.conv(1, base, 7, 1, 3);
  plan.instance_norm(base);
  plan.activation(Activation::relu);

  Index channels = base;
  for (int i = 0; i < spec.downsample_stages; ++i) {
    plan.conv(channels, channels * 2, 3, 2, 1);
    channels *= 2;
    plan.instance_norm(channels);
    plan.activation(Activation::relu);
  }
  for (int i = 0; i < spec.n_residual_blocks; ++i) {
    plan.marker(LayerKind::residual_begin);
    plan.conv(channels, channels, 3, 1, 1);
    plan.instance_norm(channels);
    plan.activation(Activation::relu);
    plan.conv(channels, channels, 3, 1, 1);
    plan.instance_norm(channels);
    plan.marker(LayerKind::residual_end);
  }
  for (int i = 0; i < spec.downsample_stages; ++i) {
    plan.conv_transpose(channels, channels / 2, 3, 2, 1);
    channels /= 2;
    plan.instance_norm(channels);
    plan.activation(Activation::relu);
  }
  plan.conv(channels, 1, 7, 1, 3);
  plan.activation(Activation::tanh);

  Network<Scalar> net(spec, plan.layers(), plan.parameter_count());
  initialize(net, seed);
  return net;
}

template <typename Scalar>
Network<Scalar> build_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
  spec.validate();
  LayerPlan plan;
  const Index cap = spec.base_channels * 8;
  Index channels = spec.base_channels;
  plan.conv(1, channels, 4, 2, 1);
  plan.activation(Activation::leaky_relu);
  for (int i = 1; i < spec.downsample_stages; ++i) {
    const Index next = std::min(channels * 2, cap);
    plan.conv(channels, next, 4, 2, 1);
    channels = next;
    plan.instance_norm(channels);
    plan.activation(Activation::leaky_relu);
  }
  plan.conv(channels, channels, 3, 1, 1);
  plan.instance_norm(channels);
  plan.activation(Activation::leaky_relu);
  plan.conv(channels, 1, 3, 1, 1);
  if (spec.output_activation == OutputActivation::sigmoid) plan.activation(Activation::sigmoid);

  Network<Scalar> net(spec, plan.layers(), plan.parameter_count());
  initialize(net, seed);
  return net;
}

template <typename Scalar>
Network<Scalar> build_network(const NetworkSpec& spec, std::uint64_t seed) {
  if (const auto* g = std::get_if<GeneratorSpec>(&spec)) return build_generator<Scalar>(*g, seed);
  return build_discriminator<Scalar>(std::get<DiscriminatorSpec>(spec), seed);
}

template <typename Scalar>
std::pair<Image<Scalar>, Image<Scalar>> forward_cycle(const Network<Scalar>& g, const Network<Scalar>& f,
                                                      const Image<Scalar>& x) {
  Image<Scalar> translated = g.translate(x);
  Image<Scalar> reconstructed = f.translate(translated);
  return {std::move(translated), std::move(reconstructed)};
}

template class Network<float>;
template class Network<double>;

#define DCCYCLE_INSTANTIATE_NETWORK(S)                                                                        \
  template Network<S> build_generator<S>(const GeneratorSpec&, std::uint64_t);                                \
  template Network<S> build_discriminator<S>(const DiscriminatorSpec&, std::uint64_t);                        \
  template Network<S> build_network<S>(const NetworkSpec&, std::uint64_t);                                    \
  template std::pair<Image<S>, Image<S>> forward_cycle(const Network<S>&, const Network<S>&, const Image<S>&); \
  template Image<S> to_image(const FeatureMap<S>&, Domain, std::string);

DCCYCLE_INSTANTIATE_NETWORK(float)
DCCYCLE_INSTANTIATE_NETWORK(double)

#undef DCCYCLE_INSTANTIATE_NETWORK

}  // namespace dccycle
