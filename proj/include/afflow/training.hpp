// Riemannian gradient descent over weight fields with trace recording and
// checkpointing.
#pragma once

#include <string>
#include <vector>

#include "afflow/data.hpp"
#include "afflow/gradient.hpp"

namespace afflow {

enum class GradientMode { kClosedForm, kFdOracle };

struct TrainConfig {
  double horizon = 5.0;  // integration time T
  int krylov_dim = 10;
  double tau = 0.0;
  double rho = 1.0;
  // The cosine-loss landscape in Omega is shallow; the exp-lifting update
  // is scale-safe and the halving backoff catches overshoots, so the
  // default step is deliberately large.
  double step_size = 1000.0;
  int max_iters = 100;
  unsigned long seed = 0;
  RankMode rank_mode = RankMode::kRankOne;
  int rank = 1;
  GradientMode gradient_mode = GradientMode::kClosedForm;
  bool include_second_summand = false;
  bool patch_distance = false;  // window-stacked data term instead of center
  double grad_norm_tol = 1e-6;
  double euler_step = 1e-3;  // fd-oracle mode only
  int checkpoint_every = 10;
  std::string checkpoint_path;  // empty disables checkpointing
};

struct TrainTrace {
  std::vector<int> iteration;
  std::vector<double> loss;
  std::vector<double> wrong_percent;
  std::vector<double> grad_norm;
  std::vector<double> sigma1;
  std::vector<double> sigma_ratio;
  std::vector<double> seconds;

  std::string to_csv() const;
};

struct TrainResult {
  WeightField omega;
  TrainTrace trace;
  bool aborted_nan = false;
};

/// One Riemannian descent step: patch-wise lifting along the negative
/// gradient. The result is a valid weight field for any step size.
WeightField descend_step(const WeightField& omega, const Mat& riemannian_grad,
                         double step_size);

/// Wrong-pixel percentage of the argmax labeling of a tangent field.
double evaluate(const Mat& v, const Eigen::VectorXi& truth);

/// Gradient descent from uniform weights (or a warm start) on one or more
/// training images; multi-image losses and Euclidean gradients are averaged
/// before the Riemannian step. The step size halves whenever a step would
/// increase the loss.
TrainResult train(const GridGraph& graph, const std::vector<LabeledImage>& images,
                  const TrainConfig& config,
                  const WeightField* warm_start = nullptr);

}  // namespace afflow
