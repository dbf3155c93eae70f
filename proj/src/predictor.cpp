#include "afflow/predictor.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "afflow/training.hpp"

namespace afflow {

Mat extract_features(const GridGraph& graph, const Image& img) {
  const int channels = static_cast<int>(img.pixels.cols());
  const int patch = graph.patch_size();
  Mat features(graph.pixel_count(), channels * patch);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (int t = 0; t < patch; ++t) {
      features.block(i, t * channels, 1, channels) =
          img.pixels.row(graph.neighbors(i, t));
    }
  }
  return features;
}

Mat kmeans(const Mat& samples, int k, int iters, int restarts,
           unsigned long seed) {
  if (samples.rows() < k) {
    throw std::invalid_argument("kmeans: fewer samples than clusters");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, samples.rows() - 1);

  Mat best_centers;
  double best_inertia = std::numeric_limits<double>::max();
  for (int run = 0; run < restarts; ++run) {
    Mat centers(k, samples.cols());
    for (int c = 0; c < k; ++c) centers.row(c) = samples.row(pick(rng));

    std::vector<Eigen::Index> assign(samples.rows(), 0);
    for (int it = 0; it < iters; ++it) {
      for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        Eigen::Index nearest = 0;
        (centers.rowwise() - samples.row(i)).rowwise().squaredNorm().minCoeff(&nearest);
        assign[i] = nearest;
      }
      Mat sums = Mat::Zero(k, samples.cols());
      Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
      for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        sums.row(assign[i]) += samples.row(i);
        counts(assign[i]) += 1;
      }
      for (int c = 0; c < k; ++c) {
        if (counts(c) > 0) {
          centers.row(c) = sums.row(c) / counts(c);
        } else {
          centers.row(c) = samples.row(pick(rng));
        }
      }
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      inertia +=
          (centers.rowwise() - samples.row(i)).rowwise().squaredNorm().minCoeff();
    }
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_centers = centers;
    }
  }
  return best_centers;
}

PredictorParams init_predictor(const GridGraph& graph,
                               const std::vector<LabeledImage>& clean_images,
                               int prototype_count, unsigned long seed,
                               int kmeans_iters, int kmeans_restarts) {
  if (clean_images.empty()) {
    throw std::invalid_argument("init_predictor: empty corpus");
  }
  const int channels = static_cast<int>(clean_images.front().clean.pixels.cols());
  const int patch = graph.patch_size();
  Mat samples(static_cast<Eigen::Index>(clean_images.size()) * graph.pixel_count(),
              channels * patch);
  Eigen::Index row = 0;
  for (const auto& img : clean_images) {
    samples.middleRows(row, graph.pixel_count()) = extract_features(graph, img.clean);
    row += graph.pixel_count();
  }

  PredictorParams params;
  params.prototypes =
      kmeans(samples, prototype_count, kmeans_iters, kmeans_restarts, seed);
  params.sigma = 1.0;

  // nu points towards patch positions whose color matches the center pixel
  params.nu.resize(prototype_count, patch);
  const int center = graph.center_position();
  for (int j = 0; j < prototype_count; ++j) {
    Vec raw(patch);
    const Vec center_color =
        params.prototypes.block(j, center * channels, 1, channels).transpose();
    for (int t = 0; t < patch; ++t) {
      const Vec color =
          params.prototypes.block(j, t * channels, 1, channels).transpose();
      raw(t) = std::exp(-(color - center_color).norm());
    }
    params.nu.row(j) = manifold::project_tangent(raw).transpose();
  }
  return params;
}

Mat similarity_weights(const Mat& features, const PredictorParams& params) {
  if (features.cols() != params.prototypes.cols()) {
    throw std::invalid_argument("similarity_weights: feature dimension mismatch");
  }
  Mat weights(features.rows(), params.count());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    Vec logits(params.count());
    for (Eigen::Index j = 0; j < params.count(); ++j) {
      logits(j) = -params.sigma *
                  (features.row(i) - params.prototypes.row(j)).norm();
    }
    logits.array() -= logits.maxCoeff();
    Vec s = logits.array().exp();
    weights.row(i) = (s / s.sum()).transpose();
  }
  return weights;
}

WeightField predict_weights(const Mat& features, const PredictorParams& params) {
  const Mat sbar = similarity_weights(features, params);
  const Mat tangents = sbar * params.nu;  // |I| x |N| rows in T0
  const Eigen::Index patch = params.nu.cols();
  WeightField omega(features.rows(), patch);
  const Vec uniform = Vec::Constant(patch, 1.0 / static_cast<double>(patch));
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    omega.row(i) = manifold::lift(uniform, tangents.row(i).transpose()).transpose();
  }
  return omega;
}

PredictorGradient predictor_gradient(const GridGraph& graph,
                                     const LabeledImage& img,
                                     const PredictorParams& params,
                                     const GradientOptions& opt) {
  const Mat features = extract_features(graph, img.noisy);
  const Mat sbar = similarity_weights(features, params);
  const WeightField omega = predict_weights(features, params);

  const auto d = distance_field(img.noisy.pixels, img.palette, opt.rho);
  const auto flow = build_flow_operator(graph, omega, d);
  const auto pg = full_gradient(flow, img.tangent_truth, opt);

  PredictorGradient out;
  out.loss = pg.loss;
  out.wrong_percent = evaluate(pg.tangent_solution, img.truth);
  out.prototypes = Mat::Zero(params.prototypes.rows(), params.prototypes.cols());
  out.nu = Mat::Zero(params.nu.rows(), params.nu.cols());

  // chain through the lifting: dL/dt_i = R_{omega_i} dL/domega_i
  Mat q(omega.rows(), omega.cols());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    q.row(i) = manifold::replicator(omega.row(i).transpose(),
                                    pg.euclidean.row(i).transpose())
                   .transpose();
  }

  out.nu = sbar.transpose() * q;

  // softmax chain: kappa_ij = <q_i, nu_j>, mu_i its sbar-average
  const Mat kappa = q * params.nu.transpose();       // |I| x N
  const Vec mu = (kappa.array() * sbar.array()).rowwise().sum();
  const Mat gtheta = sbar.array() * (kappa.colwise() - mu).array();

  double grad_sigma = 0.0;
  for (Eigen::Index j = 0; j < params.count(); ++j) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const double g = gtheta(i, j);
      if (g == 0.0) continue;
      const Vec diff = (features.row(i) - params.prototypes.row(j)).transpose();
      const double dist = diff.norm();
      grad_sigma -= g * dist;
      if (dist > 1e-12) {
        out.prototypes.row(j) += g * params.sigma / dist * diff.transpose();
      }
    }
  }
  out.log_sigma = grad_sigma * params.sigma;
  return out;
}

std::string PredictorTrace::to_csv() const {
  std::ostringstream out;
  out << "step,loss,train_wrong_pct,val_wrong_pct\n";
  out.precision(17);
  for (std::size_t k = 0; k < step.size(); ++k) {
    out << step[k] << ',' << loss[k] << ',' << train_wrong[k] << ','
        << val_wrong[k] << '\n';
  }
  return out.str();
}

namespace {

double validation_error(const GridGraph& graph,
                        const std::vector<LabeledImage>& val_images,
                        const PredictorParams& params,
                        const GradientOptions& opt) {
  if (val_images.empty()) return 0.0;
  double total = 0.0;
  for (const auto& img : val_images) {
    const Mat features = extract_features(graph, img.noisy);
    const WeightField omega = predict_weights(features, params);
    const auto d = distance_field(img.noisy.pixels, img.palette, opt.rho);
    const auto flow = build_flow_operator(graph, omega, d);
    const Mat v = solve_linearized(flow, opt.horizon, opt.krylov_dim);
    total += evaluate(v, img.truth);
  }
  return total / static_cast<double>(val_images.size());
}

}  // namespace

PredictorResult train_predictor(const GridGraph& graph,
                                const std::vector<LabeledImage>& train_images,
                                const std::vector<LabeledImage>& val_images,
                                PredictorConfig config) {
  if (train_images.empty()) {
    throw std::invalid_argument("train_predictor: no training images");
  }
  PredictorResult result;
  result.params =
      init_predictor(graph, train_images, config.prototype_count, config.seed,
                     config.kmeans_iters, config.kmeans_restarts);
  double log_sigma = std::log(result.params.sigma);

  for (int step = 0; step < config.steps; ++step) {
    Mat grad_p = Mat::Zero(result.params.prototypes.rows(),
                           result.params.prototypes.cols());
    Mat grad_nu = Mat::Zero(result.params.nu.rows(), result.params.nu.cols());
    double grad_ls = 0.0;
    double loss = 0.0;
    double train_wrong = 0.0;
    for (const auto& img : train_images) {
      const auto g = predictor_gradient(graph, img, result.params, config.flow);
      grad_p += g.prototypes;
      grad_nu += g.nu;
      grad_ls += g.log_sigma;
      loss += g.loss;
      train_wrong += g.wrong_percent;
    }
    const double count = static_cast<double>(train_images.size());
    grad_p /= count;
    grad_nu /= count;
    grad_ls /= count;
    loss /= count;
    train_wrong /= count;

    if (!std::isfinite(loss)) {
      result.aborted_nan = true;
      break;
    }

    result.trace.step.push_back(step);
    result.trace.loss.push_back(loss);
    result.trace.train_wrong.push_back(train_wrong);
    result.trace.val_wrong.push_back(
        validation_error(graph, val_images, result.params, config.flow));

    result.params.prototypes -= config.step_size * grad_p;
    // nu stays in the tangent space; sigma stays positive via log updates
    for (Eigen::Index j = 0; j < result.params.nu.rows(); ++j) {
      const Vec g = manifold::project_tangent(grad_nu.row(j).transpose());
      result.params.nu.row(j) -= config.step_size * g.transpose();
    }
    log_sigma -= config.step_size * grad_ls;
    result.params.sigma = std::exp(log_sigma);
  }
  return result;
}

void save_predictor(const std::string& path, const PredictorParams& params) {
  nlohmann::json header = {{"count", params.prototypes.rows()},
                           {"feature_dim", params.prototypes.cols()},
                           {"patch", params.nu.cols()},
                           {"sigma", params.sigma},
                           {"dtype", "f64"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_predictor: cannot open " + path);
  out << header.dump() << '\n';
  auto write_matrix = [&out](const Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
    }
  };
  write_matrix(params.prototypes);
  write_matrix(params.nu);
  if (!out) throw std::runtime_error("save_predictor: write failed for " + path);
}

PredictorParams load_predictor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_predictor: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_predictor: missing header");
  }
  const auto header = nlohmann::json::parse(line);
  PredictorParams params;
  const auto count = header.at("count").get<Eigen::Index>();
  const auto fdim = header.at("feature_dim").get<Eigen::Index>();
  const auto patch = header.at("patch").get<Eigen::Index>();
  params.sigma = header.at("sigma").get<double>();
  params.prototypes.resize(count, fdim);
  params.nu.resize(count, patch);
  auto read_matrix = [&in](Mat& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double v = 0.0;
        in.read(reinterpret_cast<char*>(&v), sizeof(double));
        m(i, j) = v;
      }
    }
  };
  read_matrix(params.prototypes);
  read_matrix(params.nu);
  if (!in) throw std::runtime_error("load_predictor: truncated payload");
  return params;
}

}  // namespace afflow
