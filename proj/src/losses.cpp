#include "dccycle/losses.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dccycle {

const char* to_string(LossFamily family) { return family == LossFamily::mae_mse ? "mae_mse" : "ssim_ce"; }

LossFamily parse_loss_family(std::string_view text) {
  if (text == "mae_mse") return LossFamily::mae_mse;
  if (text == "ssim_ce") return LossFamily::ssim_ce;
  throw std::invalid_argument("unknown loss family '" + std::string(text) + "' (expected mae_mse or ssim_ce)");
}

void LossConfig::validate() const {
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be a finite value >= 0");
  if (!(beta >= 0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be a finite value >= 0");
}

std::string LossConfig::cell_label() const {
  std::string label = family == LossFamily::mae_mse ? "MAE&MSE" : "SSIM&CE";
  return label + (dual_contrast ? "(w)" : "(wo)");
}

OutputActivation output_activation_for(LossFamily family) {
  return family == LossFamily::ssim_ce ? OutputActivation::sigmoid : OutputActivation::linear;
}

template <typename Scalar>
Scalar ce_patch_loss(const PatchGrid<Scalar>& predicted, int target_label, PatchGrid<Scalar>* grad) {
  if (predicted.size() == 0) throw std::invalid_argument("ce_patch_loss: empty patch grid");
  if (target_label != 0 && target_label != 1) throw std::invalid_argument("ce_patch_loss: label must be 0 or 1");
  const Scalar eps = Scalar(kProbabilityEpsilon);
  const Scalar n = Scalar(predicted.size());
  const auto clamped = predicted.array().max(eps).min(Scalar(1) - eps);
  Scalar loss;
  if (target_label == 1) {
    loss = -clamped.log().sum() / n;
  } else {
    loss = -(Scalar(1) - clamped).log().sum() / n;
  }
  if (grad != nullptr) {
    const auto inside = (predicted.array() >= eps) && (predicted.array() <= Scalar(1) - eps);
    if (target_label == 1) {
      *grad = inside.select(Scalar(-1) / (n * clamped), Scalar(0));
    } else {
      *grad = inside.select(Scalar(1) / (n * (Scalar(1) - clamped)), Scalar(0));
    }
  }
  return loss;
}

template <typename Scalar>
Scalar squared_patch_loss(const PatchGrid<Scalar>& predicted, int target_label, PatchGrid<Scalar>* grad) {
  if (predicted.size() == 0) throw std::invalid_argument("squared_patch_loss: empty patch grid");
  const Scalar target = Scalar(target_label);
  const Scalar n = Scalar(predicted.size());
  if (grad != nullptr) *grad = (predicted.array() - target) * (Scalar(2) / n);
  return (predicted.array() - target).square().sum() / n;
}

template <typename Scalar>
Scalar patch_loss(LossFamily family, const PatchGrid<Scalar>& predicted, int target_label, PatchGrid<Scalar>* grad) {
  return family == LossFamily::ssim_ce ? ce_patch_loss(predicted, target_label, grad)
                                       : squared_patch_loss(predicted, target_label, grad);
}

template <typename Scalar>
Scalar dc_loss(const Network<Scalar>& disc, std::span<const Image<Scalar>> negatives, LossFamily family) {
  if (negatives.empty()) throw std::invalid_argument("dc_loss: empty negative batch");
  Scalar total = 0;
  for (const Image<Scalar>& negative : negatives) total += patch_loss(family, disc.score(negative), 0);
  return total / Scalar(negatives.size());
}

template <typename Scalar>
Scalar adversarial_generator_loss(const Network<Scalar>& disc, const Image<Scalar>& fake, LossFamily family) {
  return patch_loss(family, disc.score(fake), 1);
}

template <typename Scalar>
Scalar discriminator_loss(const Network<Scalar>& disc, const Image<Scalar>& real, const Image<Scalar>& fake,
                          std::span<const Image<Scalar>> negatives, const LossConfig& config) {
  config.validate();
  if (config.dual_contrast && negatives.empty()) {
    throw std::invalid_argument("discriminator_loss: dual contrast is on but no negatives were supplied");
  }
  Scalar loss = patch_loss(config.family, disc.score(real), 1) + patch_loss(config.family, disc.score(fake), 0);
  if (config.dual_contrast) loss += Scalar(config.beta) * dc_loss(disc, negatives, config.family);
  return loss;
}

template <typename Scalar>
Scalar cycle_term_mae(const Grid<Scalar>& original, const Grid<Scalar>& reconstructed, Grid<Scalar>* grad) {
  require_same_shape(original, reconstructed, "cycle_loss_mae");
  const Grid<Scalar> diff = reconstructed - original;
  if (grad != nullptr) *grad = diff.array().sign() / Scalar(diff.size());
  return diff.cwiseAbs().mean();
}

template <typename Scalar>
Scalar cycle_term_ssim(const Grid<Scalar>& original, const Grid<Scalar>& reconstructed, const SSIMParams& params,
                       Grid<Scalar>* grad) {
  require_same_shape(original, reconstructed, "cycle_loss_ssim");
  Grid<Scalar> grad_metric;
  const Scalar similarity = ssim<Scalar>(model_to_metric(reconstructed), model_to_metric(original), params,
                                         grad != nullptr ? &grad_metric : nullptr);
  // d(metric)/d(model) = 1/2 and the loss is 1 - SSIM.
  if (grad != nullptr) *grad = grad_metric * Scalar(-0.5);
  return Scalar(1) - similarity;
}

template <typename Scalar>
Scalar cycle_loss_mae(const Image<Scalar>& x, const Image<Scalar>& x_rec, const Image<Scalar>& y,
                      const Image<Scalar>& y_rec) {
  return cycle_term_mae(x.to_model().pixels(), x_rec.to_model().pixels()) +
         cycle_term_mae(y.to_model().pixels(), y_rec.to_model().pixels());
}

template <typename Scalar>
Scalar cycle_loss_ssim(const Image<Scalar>& x, const Image<Scalar>& x_rec, const Image<Scalar>& y,
                       const Image<Scalar>& y_rec, const SSIMParams& params) {
  return cycle_term_ssim(x.to_model().pixels(), x_rec.to_model().pixels(), params) +
         cycle_term_ssim(y.to_model().pixels(), y_rec.to_model().pixels(), params);
}

std::string LossBreakdown::csv_header() {
  return "adv_G,adv_F,disc_X,disc_Y,dc_X,dc_Y,cycle,total_G,total_DX,total_DY";
}

std::vector<double> LossBreakdown::values() const {
  return {adv_G, adv_F, disc_X, disc_Y, dc_X, dc_Y, cycle, total_generator, total_discriminator_X,
          total_discriminator_Y};
}

bool LossBreakdown::all_finite() const {
  for (double v : values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string LossBreakdown::describe() const {
  std::ostringstream out;
  out << "adv_G=" << adv_G << " adv_F=" << adv_F << " disc_X=" << disc_X << " disc_Y=" << disc_Y
      << " dc_X=" << dc_X << " dc_Y=" << dc_Y << " cycle=" << cycle << " total_G=" << total_generator
      << " total_DX=" << total_discriminator_X << " total_DY=" << total_discriminator_Y;
  return out.str();
}

namespace {

template <typename Scalar>
FeatureMap<Scalar> as_map(const Image<Scalar>& image) {
  return FeatureMap<Scalar>::from_grid(image.to_model().pixels());
}

template <typename Scalar>
FeatureMap<Scalar> as_map(const PatchGrid<Scalar>& grid) {
  return FeatureMap<Scalar>::from_grid(grid);
}

// Scores `image` with `disc` against `label`; when `grad` is non-null the
// parameter gradient of weight * loss is accumulated into it.
template <typename Scalar>
Scalar scored_term(const Network<Scalar>& disc, const Image<Scalar>& image, int label, LossFamily family,
                   Scalar weight, Vector<Scalar>* grad) {
  Tape<Scalar> tape;
  const FeatureMap<Scalar> out = disc.forward(as_map(image), grad != nullptr ? &tape : nullptr);
  PatchGrid<Scalar> grid_grad;
  const Scalar loss = patch_loss(family, out.channel_grid(0), label, grad != nullptr ? &grid_grad : nullptr);
  if (grad != nullptr && weight != Scalar(0)) {
    disc.backward(tape, as_map<Scalar>(grid_grad * weight), grad);
  }
  return loss;
}

}  // namespace

template <typename Scalar>
GeneratorOutputs<Scalar> generator_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                                             const LossConfig& config, const SSIMParams& ssim_params,
                                             LossBreakdown& breakdown, GeneratorGradients<Scalar>* grads) {
  config.validate();
  const bool backprop = grads != nullptr;
  Tape<Scalar> t_gx, t_f_fake, t_fy, t_g_fake, t_dy, t_dx;
  Tape<Scalar>* none = nullptr;

  const FeatureMap<Scalar> x = as_map(batch.x);
  const FeatureMap<Scalar> y = as_map(batch.y);
  const FeatureMap<Scalar> fake_y = models.g.forward(x, backprop ? &t_gx : none);
  const FeatureMap<Scalar> rec_x = models.f.forward(fake_y, backprop ? &t_f_fake : none);
  const FeatureMap<Scalar> fake_x = models.f.forward(y, backprop ? &t_fy : none);
  const FeatureMap<Scalar> rec_y = models.g.forward(fake_x, backprop ? &t_g_fake : none);

  PatchGrid<Scalar> grad_score_y, grad_score_x;
  const FeatureMap<Scalar> score_y = models.dy.forward(fake_y, backprop ? &t_dy : none);
  const FeatureMap<Scalar> score_x = models.dx.forward(fake_x, backprop ? &t_dx : none);
  const Scalar adv_g = patch_loss(config.family, score_y.channel_grid(0), 1, backprop ? &grad_score_y : nullptr);
  const Scalar adv_f = patch_loss(config.family, score_x.channel_grid(0), 1, backprop ? &grad_score_x : nullptr);

  Grid<Scalar> grad_rec_x, grad_rec_y;
  Scalar cycle;
  if (config.family == LossFamily::mae_mse) {
    cycle = cycle_term_mae(x.channel_grid(0), rec_x.channel_grid(0), backprop ? &grad_rec_x : nullptr) +
            cycle_term_mae(y.channel_grid(0), rec_y.channel_grid(0), backprop ? &grad_rec_y : nullptr);
  } else {
    cycle = cycle_term_ssim(x.channel_grid(0), rec_x.channel_grid(0), ssim_params, backprop ? &grad_rec_x : nullptr) +
            cycle_term_ssim(y.channel_grid(0), rec_y.channel_grid(0), ssim_params, backprop ? &grad_rec_y : nullptr);
  }

  breakdown.adv_G = static_cast<double>(adv_g);
  breakdown.adv_F = static_cast<double>(adv_f);
  breakdown.cycle = static_cast<double>(cycle);
  breakdown.total_generator =
      static_cast<double>(adv_g) + static_cast<double>(adv_f) + config.lambda * static_cast<double>(cycle);

  if (backprop) {
    const Scalar lambda = Scalar(config.lambda);
    // Discriminators only pass gradients through; their parameters are untouched.
    FeatureMap<Scalar> grad_fake_y = models.dy.backward(t_dy, as_map(grad_score_y), nullptr);
    FeatureMap<Scalar> grad_fake_x = models.dx.backward(t_dx, as_map(grad_score_x), nullptr);
    grad_fake_y.data += models.f.backward(t_f_fake, as_map<Scalar>(grad_rec_x * lambda), &grads->f).data;
    grad_fake_x.data += models.g.backward(t_g_fake, as_map<Scalar>(grad_rec_y * lambda), &grads->g).data;
    models.g.backward(t_gx, grad_fake_y, &grads->g);
    models.f.backward(t_fy, grad_fake_x, &grads->f);
  }

  return {to_image(fake_y, Domain::y, batch.x.id()), to_image(fake_x, Domain::x, batch.y.id())};
}

template <typename Scalar>
void discriminator_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                             const Image<Scalar>& fake_y, const Image<Scalar>& fake_x, const LossConfig& config,
                             LossBreakdown& breakdown, DiscriminatorGradients<Scalar>* grads) {
  config.validate();
  Vector<Scalar>* gy = grads != nullptr ? &grads->dy : nullptr;
  Vector<Scalar>* gx = grads != nullptr ? &grads->dx : nullptr;
  const Scalar beta = Scalar(config.beta);

  const Scalar disc_y = scored_term(models.dy, batch.y, 1, config.family, Scalar(1), gy) +
                        scored_term(models.dy, fake_y, 0, config.family, Scalar(1), gy);
  const Scalar disc_x = scored_term(models.dx, batch.x, 1, config.family, Scalar(1), gx) +
                        scored_term(models.dx, fake_x, 0, config.family, Scalar(1), gx);
  Scalar dc_y = 0;
  Scalar dc_x = 0;
  if (config.dual_contrast) {
    dc_y = scored_term(models.dy, batch.x_neg, 0, config.family, beta, gy);
    dc_x = scored_term(models.dx, batch.y_neg, 0, config.family, beta, gx);
  }
  breakdown.disc_X = static_cast<double>(disc_x);
  breakdown.disc_Y = static_cast<double>(disc_y);
  breakdown.dc_X = static_cast<double>(dc_x);
  breakdown.dc_Y = static_cast<double>(dc_y);
  breakdown.total_discriminator_X = breakdown.disc_X;
  breakdown.total_discriminator_Y = breakdown.disc_Y;
  if (config.dual_contrast) {
    breakdown.total_discriminator_X += config.beta * breakdown.dc_X;
    breakdown.total_discriminator_Y += config.beta * breakdown.dc_Y;
  }
}

template <typename Scalar>
LossBreakdown total_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                              const LossConfig& config, const SSIMParams& ssim_params) {
  LossBreakdown breakdown;
  const GeneratorOutputs<Scalar> fakes = generator_objective(models, batch, config, ssim_params, breakdown,
                                                             static_cast<GeneratorGradients<Scalar>*>(nullptr));
  discriminator_objective(models, batch, fakes.fake_y, fakes.fake_x, config, breakdown,
                          static_cast<DiscriminatorGradients<Scalar>*>(nullptr));
  return breakdown;
}

#define DCCYCLE_INSTANTIATE_LOSSES(S)                                                                            \
  template S ce_patch_loss(const PatchGrid<S>&, int, PatchGrid<S>*);                                             \
  template S squared_patch_loss(const PatchGrid<S>&, int, PatchGrid<S>*);                                        \
  template S patch_loss(LossFamily, const PatchGrid<S>&, int, PatchGrid<S>*);                                    \
  template S dc_loss(const Network<S>&, std::span<const Image<S>>, LossFamily);                                  \
  template S adversarial_generator_loss(const Network<S>&, const Image<S>&, LossFamily);                         \
  template S discriminator_loss(const Network<S>&, const Image<S>&, const Image<S>&, std::span<const Image<S>>,  \
                                const LossConfig&);                                                              \
  template S cycle_term_mae(const Grid<S>&, const Grid<S>&, Grid<S>*);                                           \
  template S cycle_term_ssim(const Grid<S>&, const Grid<S>&, const SSIMParams&, Grid<S>*);                       \
  template S cycle_loss_mae(const Image<S>&, const Image<S>&, const Image<S>&, const Image<S>&);                 \
  template S cycle_loss_ssim(const Image<S>&, const Image<S>&, const Image<S>&, const Image<S>&,                 \
                             const SSIMParams&);                                                                 \
  template GeneratorOutputs<S> generator_objective(const ModelSet<S>&, const TrainingBatch<S>&, const LossConfig&, \
                                                   const SSIMParams&, LossBreakdown&, GeneratorGradients<S>*);   \
  template void discriminator_objective(const ModelSet<S>&, const TrainingBatch<S>&, const Image<S>&,            \
                                        const Image<S>&, const LossConfig&, LossBreakdown&,                      \
                                        DiscriminatorGradients<S>*);                                             \
  template LossBreakdown total_objective(const ModelSet<S>&, const TrainingBatch<S>&, const LossConfig&,         \
                                         const SSIMParams&);

DCCYCLE_INSTANTIATE_LOSSES(float)
DCCYCLE_INSTANTIATE_LOSSES(double)

#undef DCCYCLE_INSTANTIATE_LOSSES

}  // namespace dccycle
