#pragma once

// Training losses: patch-wise cross-entropy and least-squares adversarial
// terms, the dual-contrast discriminator term, MAE and SSIM cycle
// consistency, and their composition into the full objective.

#include "dccycle/batch.hpp"
#include "dccycle/metrics.hpp"
#include "dccycle/network.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dccycle {

/// mae_mse: MAE cycle loss with least-squares adversarial terms.
/// ssim_ce: SSIM cycle loss with cross-entropy adversarial terms.
enum class LossFamily { mae_mse, ssim_ce };

const char* to_string(LossFamily family);
LossFamily parse_loss_family(std::string_view text);

struct LossConfig {
  LossFamily family = LossFamily::ssim_ce;
  bool dual_contrast = true;
  double lambda = 10.0;  // cycle weight
  double beta = 0.5;     // dual-contrast weight

  void validate() const;
  /// Ablation row label, e.g. "SSIM&CE(w)".
  std::string cell_label() const;

  bool operator==(const LossConfig&) const = default;
};

/// Discriminator output activation matching a loss family: sigmoid
/// probabilities for cross-entropy, raw scores for least squares.
OutputActivation output_activation_for(LossFamily family);

inline constexpr double kProbabilityEpsilon = 1e-7;

/// -(1/N) sum [t log y + (1-t) log(1-y)] with y clamped to [eps, 1-eps].
/// Clamped entries contribute no gradient.
template <typename Scalar>
Scalar ce_patch_loss(const PatchGrid<Scalar>& predicted, int target_label, PatchGrid<Scalar>* grad = nullptr);

/// (1/N) sum (y - t)^2.
template <typename Scalar>
Scalar squared_patch_loss(const PatchGrid<Scalar>& predicted, int target_label, PatchGrid<Scalar>* grad = nullptr);

/// The family's per-grid adversarial criterion.
template <typename Scalar>
Scalar patch_loss(LossFamily family, const PatchGrid<Scalar>& predicted, int target_label,
                  PatchGrid<Scalar>* grad = nullptr);

/// Real source-domain images scored as class 0, averaged over the batch.
template <typename Scalar>
Scalar dc_loss(const Network<Scalar>& disc, std::span<const Image<Scalar>> negatives, LossFamily family);

/// Non-saturating generator term: the fake scored against class 1.
template <typename Scalar>
Scalar adversarial_generator_loss(const Network<Scalar>& disc, const Image<Scalar>& fake, LossFamily family);

/// real as class 1 + fake as class 0 (+ beta * dc_loss when dual contrast is on).
/// An empty `negatives` span means "absent".
template <typename Scalar>
Scalar discriminator_loss(const Network<Scalar>& disc, const Image<Scalar>& real, const Image<Scalar>& fake,
                          std::span<const Image<Scalar>> negatives, const LossConfig& config);

// Single-direction cycle terms on model-space grids. `grad` receives the
// derivative with respect to `reconstructed`.
template <typename Scalar>
Scalar cycle_term_mae(const Grid<Scalar>& original, const Grid<Scalar>& reconstructed, Grid<Scalar>* grad = nullptr);

/// 1 - SSIM computed after mapping both grids to [0,1].
template <typename Scalar>
Scalar cycle_term_ssim(const Grid<Scalar>& original, const Grid<Scalar>& reconstructed, const SSIMParams& params,
                       Grid<Scalar>* grad = nullptr);

template <typename Scalar>
Scalar cycle_loss_mae(const Image<Scalar>& x, const Image<Scalar>& x_rec, const Image<Scalar>& y,
                      const Image<Scalar>& y_rec);

template <typename Scalar>
Scalar cycle_loss_ssim(const Image<Scalar>& x, const Image<Scalar>& x_rec, const Image<Scalar>& y,
                       const Image<Scalar>& y_rec, const SSIMParams& params = {});

/// Scalar decomposition of the objective. dc_X is the dual-contrast term of
/// D_X (negatives from Y), dc_Y that of D_Y (negatives from X); both are zero
/// when dual contrast is off.
///   total_generator       = adv_G + adv_F + lambda * cycle
///   total_discriminator_X = disc_X + beta * dc_X
///   total_discriminator_Y = disc_Y + beta * dc_Y
struct LossBreakdown {
  double adv_G = 0.0;
  double adv_F = 0.0;
  double disc_X = 0.0;
  double disc_Y = 0.0;
  double dc_X = 0.0;
  double dc_Y = 0.0;
  double cycle = 0.0;
  double total_generator = 0.0;
  double total_discriminator_X = 0.0;
  double total_discriminator_Y = 0.0;

  static constexpr std::size_t kFieldCount = 10;
  /// "adv_G,adv_F,disc_X,disc_Y,dc_X,dc_Y,cycle,total_G,total_DX,total_DY"
  static std::string csv_header();
  std::vector<double> values() const;
  bool all_finite() const;
  std::string describe() const;

  bool operator==(const LossBreakdown&) const = default;
};

/// The four networks trained jointly: G: X -> Y, F: Y -> X and their
/// discriminators.
template <typename Scalar>
struct ModelSet {
  Network<Scalar> g;
  Network<Scalar> f;
  Network<Scalar> dx;
  Network<Scalar> dy;
};

template <typename Scalar>
struct GeneratorGradients {
  Vector<Scalar> g;
  Vector<Scalar> f;
};

template <typename Scalar>
struct DiscriminatorGradients {
  Vector<Scalar> dx;
  Vector<Scalar> dy;
};

/// Synthesized images of one generator pass: fake_y = G(x), fake_x = F(y).
template <typename Scalar>
struct GeneratorOutputs {
  Image<Scalar> fake_y;
  Image<Scalar> fake_x;
};

/// Generator side of the objective. Fills adv_G, adv_F, cycle and
/// total_generator. Gradients, when requested, are accumulated into `grads`
/// (which must be zero-initialized to the parameter sizes).
template <typename Scalar>
GeneratorOutputs<Scalar> generator_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                                             const LossConfig& config, const SSIMParams& ssim_params,
                                             LossBreakdown& breakdown, GeneratorGradients<Scalar>* grads);

/// Discriminator side. `fake_y` is scored by D_Y and `fake_x` by D_X as
/// class 0; both are treated as constants.
template <typename Scalar>
void discriminator_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                             const Image<Scalar>& fake_y, const Image<Scalar>& fake_x, const LossConfig& config,
                             LossBreakdown& breakdown, DiscriminatorGradients<Scalar>* grads);

/// Evaluates every term of the objective on one batch without updating anything.
template <typename Scalar>
LossBreakdown total_objective(const ModelSet<Scalar>& models, const TrainingBatch<Scalar>& batch,
                              const LossConfig& config, const SSIMParams& ssim_params = {});

}  // namespace dccycle
