#include <doctest.h>

#include <cstdio>
#include <random>

#include "afflow/predictor.hpp"
#include "oracles.hpp"

using namespace afflow;

namespace {

std::vector<LabeledImage> lines_set(int size, double sigma, unsigned long seed,
                                    int count) {
  std::vector<LabeledImage> images;
  for (int k = 0; k < count; ++k) {
    Scenario s;
    s.kind = ScenarioKind::kLines;
    s.height = size;
    s.width = size;
    s.cells = 3;
    s.noise_sigma = sigma;
    s.seed = seed + 31 * k;
    images.push_back(gen_voronoi_lines(s));
  }
  return images;
}

}  // namespace

TEST_CASE("kmeans separates two well-spread clusters") {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> gauss(0.0, 0.05);
  Mat samples(40, 2);
  for (int i = 0; i < 40; ++i) {
    const double base = i < 20 ? 0.0 : 10.0;
    samples(i, 0) = base + gauss(rng);
    samples(i, 1) = base + gauss(rng);
  }
  const Mat centers = kmeans(samples, 2, 20, 3, 5);
  const double lo = centers.rowwise().mean().minCoeff();
  const double hi = centers.rowwise().mean().maxCoeff();
  CHECK(lo == doctest::Approx(0.0).epsilon(0.5));
  CHECK(hi == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("constant corpus collapses to a zero tangent prototype") {
  Scenario s;
  s.kind = ScenarioKind::kColors;
  s.height = 4;
  s.width = 4;
  s.cells = 1;
  s.seed = 3;
  const auto img = gen_voronoi_colors(s);
  const auto graph = build_grid(4, 4, 1);
  const auto params = init_predictor(graph, {img}, 1, 9);
  CHECK(params.nu.row(0).norm() < 1e-12);
  CHECK(params.sigma == 1.0);
}

TEST_CASE("tangent rows of initialized predictors sum to zero") {
  const auto images = lines_set(8, 0.2, 17, 2);
  const auto graph = build_grid(8, 8, 1);
  const auto params = init_predictor(graph, images, 5, 21);
  CHECK((params.nu.rowwise().sum().array().abs() <= 1e-12).all());
}

TEST_CASE("predicted weights are valid and softmax weights normalized") {
  const auto images = lines_set(8, 0.2, 19, 1);
  const auto graph = build_grid(8, 8, 1);
  auto params = init_predictor(graph, images, 4, 23);
  const Mat features = extract_features(graph, images[0].noisy);

  const Mat sbar = similarity_weights(features, params);
  CHECK((sbar.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);

  const WeightField omega = predict_weights(features, params);
  CHECK(validate_weights(graph, omega).ok);

  // all-zero tangents give uniform patches
  params.nu.setZero();
  const WeightField uniform = predict_weights(features, params);
  CHECK((uniform.array() - 1.0 / 9).abs().maxCoeff() < 1e-12);
}

TEST_CASE("saturated similarity snaps to the matching prototype") {
  std::mt19937_64 rng(71);
  PredictorParams params;
  params.prototypes = Mat::Random(3, 27);
  params.nu.resize(3, 9);
  for (int j = 0; j < 3; ++j) {
    params.nu.row(j) = oracle::random_tangent(9, rng).transpose();
  }
  params.sigma = 1e4;  // softmax saturates on the exact match
  Mat features(1, 27);
  features.row(0) = params.prototypes.row(1);
  const WeightField omega = predict_weights(features, params);
  const Vec expected = manifold::lift(Vec::Constant(9, 1.0 / 9),
                                      params.nu.row(1).transpose());
  CHECK((omega.row(0).transpose() - expected).norm() < 1e-9);
}

TEST_CASE("single prototype prediction collapses to its lifted tangent") {
  const auto images = lines_set(6, 0.2, 29, 1);
  const auto graph = build_grid(6, 6, 1);
  const auto params = init_predictor(graph, images, 1, 31);
  const Mat features = extract_features(graph, images[0].noisy);
  const WeightField omega = predict_weights(features, params);
  const Vec expected = manifold::lift(Vec::Constant(9, 1.0 / 9),
                                      params.nu.row(0).transpose());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    CHECK((omega.row(i).transpose() - expected).norm() < 1e-12);
  }
}

TEST_CASE("predictor gradient matches finite differences") {
  const auto images = lines_set(8, 0.25, 37, 1);
  const auto graph = build_grid(8, 8, 1);
  auto params = init_predictor(graph, images, 3, 41);

  GradientOptions opt;
  opt.horizon = 2.0;
  opt.krylov_dim = 12;
  opt.tau = 0.0;
  opt.rank_mode = RankMode::kFullM;

  const auto grad = predictor_gradient(graph, images[0], params, opt);

  auto loss_at = [&](const PredictorParams& p) {
    const Mat features = extract_features(graph, images[0].noisy);
    const WeightField omega = predict_weights(features, p);
    const auto d = distance_field(images[0].noisy.pixels, images[0].palette, opt.rho);
    const auto flow = build_flow_operator(graph, omega, d);
    const Mat v = solve_linearized(flow, opt.horizon, opt.krylov_dim);
    return loss_distance(v, images[0].tangent_truth);
  };

  const double h = 1e-6;
  std::mt19937_64 rng(43);
  std::normal_distribution<double> gauss;

  // prototype directions
  Vec fd_dirs(6), an_dirs(6);
  for (int trial = 0; trial < 6; ++trial) {
    Mat dir = Mat::Zero(params.prototypes.rows(), params.prototypes.cols());
    for (Eigen::Index j = 0; j < dir.cols(); ++j) dir(trial % 3, j) = gauss(rng);
    PredictorParams plus = params;
    PredictorParams minus = params;
    plus.prototypes += h * dir;
    minus.prototypes -= h * dir;
    fd_dirs(trial) = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    an_dirs(trial) = (grad.prototypes.array() * dir.array()).sum();
  }
  CHECK(oracle::cosine(fd_dirs, an_dirs) > 0.99);

  // nu directions (tangent)
  Vec fd_nu(6), an_nu(6);
  for (int trial = 0; trial < 6; ++trial) {
    Mat dir = Mat::Zero(params.nu.rows(), params.nu.cols());
    dir.row(trial % 3) = oracle::random_tangent(9, rng).transpose();
    PredictorParams plus = params;
    PredictorParams minus = params;
    plus.nu += h * dir;
    minus.nu -= h * dir;
    fd_nu(trial) = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
    an_nu(trial) = (grad.nu.array() * dir.array()).sum();
  }
  CHECK(oracle::cosine(fd_nu, an_nu) > 0.99);

  // log-sigma direction
  PredictorParams plus = params;
  PredictorParams minus = params;
  plus.sigma = std::exp(std::log(params.sigma) + h);
  minus.sigma = std::exp(std::log(params.sigma) - h);
  const double fd_sigma = (loss_at(plus) - loss_at(minus)) / (2.0 * h);
  CHECK(grad.log_sigma == doctest::Approx(fd_sigma).epsilon(1e-3));
}

TEST_CASE("zero flow gradient freezes the predictor parameters") {
  const auto images = lines_set(6, 0.0, 47, 1);
  const auto graph = build_grid(6, 6, 1);
  // noiseless image with tau = 0: fabricate a stationary case by training
  // towards the flow's own solution
  auto params = init_predictor(graph, images, 2, 49);
  GradientOptions opt;
  opt.tau = 0.0;
  opt.horizon = 1.0;

  LabeledImage img = images[0];
  const Mat features = extract_features(graph, img.noisy);
  const WeightField omega = predict_weights(features, params);
  const auto d = distance_field(img.noisy.pixels, img.palette, opt.rho);
  const auto flow = build_flow_operator(graph, omega, d);
  img.tangent_truth = solve_linearized(flow, opt.horizon, opt.krylov_dim);

  const auto grad = predictor_gradient(graph, img, params, opt);
  CHECK(grad.prototypes.norm() < 1e-9);
  CHECK(grad.nu.norm() < 1e-9);
  CHECK(std::abs(grad.log_sigma) < 1e-9);
}

TEST_CASE("short predictor training descends and keeps sigma positive") {
  const auto train_set = lines_set(12, 0.35, 53, 2);
  const auto val_set = lines_set(12, 0.35, 530, 1);
  const auto graph = build_grid(12, 12, 1);
  PredictorConfig cfg;
  cfg.prototype_count = 6;
  cfg.steps = 10;
  cfg.seed = 3;
  cfg.flow.horizon = 2.0;
  const auto result = train_predictor(graph, train_set, val_set, cfg);
  REQUIRE(!result.aborted_nan);
  REQUIRE(result.trace.step.size() == 10);
  CHECK(result.params.sigma > 0.0);
  CHECK(result.trace.loss.back() < result.trace.loss.front());
  CHECK((result.params.nu.rowwise().sum().array().abs() <= 1e-10).all());
  // the trace records a validation column per step
  CHECK(result.trace.val_wrong.size() == 10);
}

TEST_CASE("predictor serialization round trips") {
  PredictorParams params;
  params.prototypes = Mat::Random(5, 27);
  params.nu = Mat::Random(5, 9);
  params.sigma = 1.75;
  const std::string path = "test_predictor.pred";
  save_predictor(path, params);
  const auto back = load_predictor(path);
  CHECK((back.prototypes - params.prototypes).norm() == 0.0);
  CHECK((back.nu - params.nu).norm() == 0.0);
  CHECK(back.sigma == params.sigma);
  std::remove(path.c_str());
}
