#include "afflow/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace afflow {

namespace {

struct BatchEval {
  double loss = 0.0;
  double data_loss = 0.0;
  double wrong = 0.0;
  double sigma1 = 0.0;
  double sigma_ratio = 0.0;
  Mat euclidean;
  std::vector<Mat> tangents;
};

GradientOptions to_options(const TrainConfig& cfg) {
  GradientOptions opt;
  opt.horizon = cfg.horizon;
  opt.krylov_dim = cfg.krylov_dim;
  opt.tau = cfg.tau;
  opt.rank_mode = cfg.rank_mode;
  opt.rank = cfg.rank;
  opt.include_second_summand = cfg.include_second_summand;
  return opt;
}

// Mean loss, wrong-pixel percentage and Euclidean gradient over the batch.
BatchEval evaluate_batch(const GridGraph& graph,
                         const std::vector<LabeledImage>& images,
                         const WeightField& omega, const TrainConfig& cfg,
                         bool with_gradient) {
  BatchEval out;
  const auto opt = to_options(cfg);
  for (const auto& img : images) {
    const auto d =
        cfg.patch_distance
            ? distance_field_patch(graph, img.noisy.pixels, img.palette, cfg.rho)
            : distance_field(img.noisy.pixels, img.palette, cfg.rho);
    const auto flow = build_flow_operator(graph, omega, d);
    if (with_gradient && cfg.gradient_mode == GradientMode::kFdOracle) {
      const Mat g = fd_gradient_oracle(graph, img.noisy.pixels, img.palette,
                                       omega, img.tangent_truth, cfg.horizon,
                                       cfg.tau, cfg.rho, 1e-5, cfg.euler_step);
      const Mat v = solve_linearized(flow, cfg.horizon, cfg.krylov_dim);
      out.loss += loss_distance(v, img.tangent_truth) + regularizer(omega, cfg.tau);
      out.wrong += evaluate(v, img.truth);
      out.tangents.push_back(v);
      out.euclidean = out.euclidean.size() == 0 ? g : Mat(out.euclidean + g);
    } else if (with_gradient) {
      const auto pg = full_gradient(flow, img.tangent_truth, opt);
      out.loss += pg.loss;
      out.data_loss += pg.data_loss;
      out.wrong += evaluate(pg.tangent_solution, img.truth);
      out.sigma1 += pg.sigma1;
      out.sigma_ratio += pg.sigma_ratio;
      out.tangents.push_back(pg.tangent_solution);
      out.euclidean = out.euclidean.size() == 0 ? pg.euclidean
                                                : Mat(out.euclidean + pg.euclidean);
    } else {
      const Mat v = solve_linearized(flow, cfg.horizon, cfg.krylov_dim);
      out.loss += loss_distance(v, img.tangent_truth) + regularizer(omega, cfg.tau);
      out.wrong += evaluate(v, img.truth);
    }
  }
  const double count = static_cast<double>(images.size());
  out.loss /= count;
  out.data_loss /= count;
  out.wrong /= count;
  out.sigma1 /= count;
  out.sigma_ratio /= count;
  if (out.euclidean.size() != 0) out.euclidean /= count;
  return out;
}

}  // namespace

std::string TrainTrace::to_csv() const {
  std::ostringstream out;
  out << "iteration,loss,wrong_pct,grad_norm,sigma1,sigma_ratio,seconds\n";
  out.precision(17);
  for (std::size_t k = 0; k < iteration.size(); ++k) {
    out << iteration[k] << ',' << loss[k] << ',' << wrong_percent[k] << ','
        << grad_norm[k] << ',' << sigma1[k] << ',' << sigma_ratio[k] << ','
        << seconds[k] << '\n';
  }
  return out.str();
}

WeightField descend_step(const WeightField& omega, const Mat& riemannian_grad,
                         double step_size) {
  if (omega.rows() != riemannian_grad.rows() ||
      omega.cols() != riemannian_grad.cols()) {
    throw std::invalid_argument("descend_step: shape mismatch");
  }
  WeightField next(omega.rows(), omega.cols());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    next.row(i) = manifold::lift(omega.row(i).transpose(),
                                 -step_size * riemannian_grad.row(i).transpose())
                      .transpose();
  }
  return next;
}

double evaluate(const Mat& v, const Eigen::VectorXi& truth) {
  return wrong_pixel_percent(lift_to_labeling(v), truth);
}

TrainResult train(const GridGraph& graph, const std::vector<LabeledImage>& images,
                  const TrainConfig& config, const WeightField* warm_start) {
  if (images.empty()) {
    throw std::invalid_argument("train: no training images");
  }
  if (config.patch_distance && config.gradient_mode == GradientMode::kFdOracle) {
    throw std::invalid_argument(
        "train: the fd-oracle gradient supports the center-pixel data term only");
  }
  for (const auto& img : images) {
    if (img.truth.size() != graph.pixel_count()) {
      throw std::invalid_argument("train: image size does not match graph");
    }
  }

  TrainResult result;
  if (warm_start) {
    if (warm_start->rows() != graph.pixel_count() ||
        warm_start->cols() != graph.patch_size()) {
      throw std::invalid_argument("train: warm start does not match graph");
    }
    result.omega = *warm_start;
  } else {
    result.omega = uniform_weights(graph);
  }
  double step = config.step_size;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const auto start = std::chrono::steady_clock::now();
    const BatchEval eval =
        evaluate_batch(graph, images, result.omega, config, true);
    if (!std::isfinite(eval.loss)) {
      result.aborted_nan = true;
      break;
    }
    const Mat riem = riemannian_gradient(eval.euclidean, result.omega);
    const double grad_norm = riem.norm();

    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    result.trace.iteration.push_back(iter);
    result.trace.loss.push_back(eval.loss);
    result.trace.wrong_percent.push_back(eval.wrong);
    result.trace.grad_norm.push_back(grad_norm);
    result.trace.sigma1.push_back(eval.sigma1);
    result.trace.sigma_ratio.push_back(eval.sigma_ratio);
    result.trace.seconds.push_back(elapsed);

    if (grad_norm < config.grad_norm_tol) break;

    // halving backoff keeps the loss non-increasing; the step recovers
    // towards its configured value after successful iterations
    WeightField candidate;
    bool halved = false;
    while (true) {
      candidate = descend_step(result.omega, riem, step);
      const BatchEval probe =
          evaluate_batch(graph, images, candidate, config, false);
      if (probe.loss <= eval.loss || step < 1e-8) break;
      step *= 0.5;
      halved = true;
    }
    result.omega = candidate;
    if (!halved) step = std::min(1.5 * step, config.step_size);

    if (!config.checkpoint_path.empty() && config.checkpoint_every > 0 &&
        (iter + 1) % config.checkpoint_every == 0) {
      save_weights(config.checkpoint_path, graph, result.omega);
    }
  }
  return result;
}

}  // namespace afflow
