// afflow: generate synthetic labeling scenarios, learn regularizer weight
// patches by Riemannian gradient descent, label images with the linearized
// assignment flow, and train/apply the weight-patch predictor.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "afflow/data.hpp"
#include "afflow/parallel.hpp"
#include "afflow/predictor.hpp"
#include "afflow/training.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

using namespace afflow;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TrainConfig parse_train_config_impl(const nlohmann::json& j);

TrainConfig parse_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  try {
    nlohmann::json j;
    in >> j;
    return parse_train_config_impl(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config error: ") + e.what());
  }
}

TrainConfig parse_train_config_impl(const nlohmann::json& j) {

  static const std::vector<std::string> known = {
      "T",         "m",          "tau",       "rho",
      "step_size", "max_iters",  "seed",      "rank_mode",
      "rank",      "gradient_mode", "include_second_summand",
      "euler_step", "grad_norm_tol", "patch_distance"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      throw ConfigError("unknown config key: " + it.key());
    }
  }

  TrainConfig cfg;
  cfg.horizon = j.value("T", cfg.horizon);
  cfg.krylov_dim = j.value("m", cfg.krylov_dim);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.rho = j.value("rho", cfg.rho);
  cfg.step_size = j.value("step_size", cfg.step_size);
  cfg.max_iters = j.value("max_iters", cfg.max_iters);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.include_second_summand =
      j.value("include_second_summand", cfg.include_second_summand);
  cfg.patch_distance = j.value("patch_distance", cfg.patch_distance);
  cfg.euler_step = j.value("euler_step", cfg.euler_step);
  cfg.grad_norm_tol = j.value("grad_norm_tol", cfg.grad_norm_tol);
  cfg.rank = j.value("rank", cfg.rank);

  const std::string rank_mode = j.value("rank_mode", std::string("rank-1"));
  if (rank_mode == "rank-1") {
    cfg.rank_mode = RankMode::kRankOne;
  } else if (rank_mode == "rank-r") {
    cfg.rank_mode = RankMode::kRankR;
  } else if (rank_mode == "full-m") {
    cfg.rank_mode = RankMode::kFullM;
  } else {
    throw ConfigError("rank_mode must be rank-1, rank-r or full-m");
  }

  const std::string grad_mode = j.value("gradient_mode", std::string("closed-form"));
  if (grad_mode == "closed-form") {
    cfg.gradient_mode = GradientMode::kClosedForm;
  } else if (grad_mode == "fd-oracle") {
    cfg.gradient_mode = GradientMode::kFdOracle;
  } else {
    throw ConfigError("gradient_mode must be closed-form or fd-oracle");
  }

  if (cfg.horizon <= 0 || cfg.krylov_dim < 1 || cfg.tau < 0 || cfg.rho <= 0 ||
      cfg.step_size <= 0 || cfg.max_iters < 1 || cfg.rank < 1 ||
      cfg.euler_step <= 0) {
    throw ConfigError("config values must be positive (max_iters >= 1)");
  }
  return cfg;
}

Mat palette_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open palette " + path);
  nlohmann::json j;
  in >> j;
  Mat palette(static_cast<Eigen::Index>(j.size()), 3);
  for (Eigen::Index row = 0; row < palette.rows(); ++row) {
    for (int c = 0; c < 3; ++c) palette(row, c) = j[row][c].get<double>();
  }
  return palette;
}

int cmd_generate(const std::string& scenario_name, int size, int cells,
                 int image_count, double noise, bool auto_noise,
                 unsigned long seed, const std::string& out_dir) {
  Scenario s;
  s.kind = scenario_name == "lines" ? ScenarioKind::kLines : ScenarioKind::kColors;
  s.height = size;
  s.width = size;
  s.cells = cells;
  s.seed = seed;
  if (auto_noise) {
    if (s.kind == ScenarioKind::kColors) {
      s.noise_sigma = calibrate_noise_sigma(s, 50.0);
    } else {
      // lines: large enough to destroy the thin structure under uniform
      // averaging, small enough to keep the task solvable with adaptive
      // weights (see the calibrate subcommand for a sweep)
      s.noise_sigma = 0.5;
    }
    std::cout << "calibrated noise sigma = " << s.noise_sigma << "\n";
  } else {
    s.noise_sigma = noise;
  }

  std::vector<LabeledImage> images;
  for (int k = 0; k < image_count; ++k) {
    Scenario sk = s;
    sk.seed = seed + 7919 * static_cast<unsigned long>(k);
    images.push_back(generate(sk));
  }
  save_dataset(out_dir, s, images);
  std::cout << "wrote " << image_count << " images to " << out_dir << "\n";
  return 0;
}

int cmd_calibrate(const std::string& scenario_name, int size, int cells,
                  unsigned long seed, double target) {
  Scenario s;
  s.height = size;
  s.width = size;
  s.cells = cells;
  s.seed = seed;
  if (scenario_name == "colors") {
    s.kind = ScenarioKind::kColors;
    const double sigma = calibrate_noise_sigma(s, target);
    s.noise_sigma = sigma;
    const auto img = gen_voronoi_colors(s);
    const double err =
        wrong_pixel_percent(nearest_label(img.noisy, img.palette), img.truth);
    std::cout << "sigma=" << sigma << " pixelwise_error=" << err << "%\n";
    return 0;
  }
  // lines: sweep sigma and report how much of the line structure survives
  // labeling with uniform weights
  s.kind = ScenarioKind::kLines;
  const auto graph = build_grid(s.height, s.width, 1);
  for (double sigma : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0}) {
    Scenario sk = s;
    sk.noise_sigma = sigma;
    const auto img = gen_voronoi_lines(sk);
    const auto d = distance_field(img.noisy.pixels, img.palette, 1.0);
    const auto flow = build_flow_operator(graph, uniform_weights(graph), d);
    const auto labels = lift_to_labeling(solve_linearized(flow, 5.0, 10));
    int line_total = 0;
    int line_missed = 0;
    for (Eigen::Index i = 0; i < img.truth.size(); ++i) {
      if (img.truth(i) == 0) {
        ++line_total;
        if (labels(i) != 0) ++line_missed;
      }
    }
    std::cout << "sigma=" << sigma << " uniform_wrong="
              << wrong_pixel_percent(labels, img.truth) << "% line_missed="
              << (line_total ? 100.0 * line_missed / line_total : 0.0) << "%\n";
  }
  return 0;
}

int cmd_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_path, const std::string& trace_path,
              const std::string& resume_path) {
  TrainConfig cfg =
      config_path.empty() ? TrainConfig{} : parse_train_config(config_path);
  const Dataset ds = load_dataset(data_dir);
  if (ds.images.empty()) throw ConfigError("dataset has no images");
  const auto graph =
      build_grid(ds.images[0].clean.height, ds.images[0].clean.width, 1);
  cfg.checkpoint_path = out_path + ".ckpt";

  WeightField warm;
  const WeightField* warm_ptr = nullptr;
  if (!resume_path.empty()) {
    const auto ckpt = load_weights(resume_path);
    if (ckpt.height != graph.height || ckpt.width != graph.width) {
      throw ConfigError("checkpoint size does not match dataset");
    }
    warm = ckpt.patches;
    warm_ptr = &warm;
  }

  const auto result = train(graph, ds.images, cfg, warm_ptr);
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    trace << result.trace.to_csv();
  }
  if (result.aborted_nan) {
    std::cerr << "training aborted on non-finite loss\n";
    if (!trace_path.empty()) std::cerr << "trace written to " << trace_path << "\n";
    return kExitNumeric;
  }
  save_weights(out_path, graph, result.omega);
  std::cout << "final loss=" << result.trace.loss.back()
            << " wrong=" << result.trace.wrong_percent.back() << "%\n";
  return 0;
}

int cmd_label(const std::string& image_path, const std::string& weights_path,
              bool uniform, const std::string& palette_path,
              const std::string& data_dir, int index, const std::string& out_path,
              const std::string& truth_path, double horizon, int krylov_dim,
              double rho, bool patch_distance, int nonlinear_steps) {
  Image img;
  Mat palette;
  if (!data_dir.empty()) {
    const Dataset ds = load_dataset(data_dir);
    if (index < 0 || index >= static_cast<int>(ds.images.size())) {
      throw ConfigError("image index out of range");
    }
    img = ds.images[index].noisy;
    palette = ds.palette;
  } else {
    if (image_path.empty() || palette_path.empty()) {
      throw ConfigError("need --image and --palette (or --data with --index)");
    }
    img = read_ppm16(image_path);
    palette = palette_from_json(palette_path);
  }

  const auto graph = build_grid(img.height, img.width, 1);
  WeightField omega;
  if (uniform) {
    omega = uniform_weights(graph);
  } else {
    const auto ckpt = load_weights(weights_path);
    if (ckpt.height != img.height || ckpt.width != img.width) {
      throw ConfigError("weight field size does not match image");
    }
    omega = ckpt.patches;
  }

  const auto d = patch_distance
                     ? distance_field_patch(graph, img.pixels, palette, rho)
                     : distance_field(img.pixels, palette, rho);
  Eigen::VectorXi labels;
  if (nonlinear_steps > 0) {
    const std::vector<double> steps(nonlinear_steps, horizon / nonlinear_steps);
    const auto result = integrate_nonlinear(
        graph, d, omega, steps, krylov_dim,
        1e-3 * std::log(static_cast<double>(palette.rows())));
    labels = result.labels;
  } else {
    const auto flow = build_flow_operator(graph, omega, d);
    const Mat v = solve_linearized(flow, horizon, krylov_dim);
    if (!v.allFinite()) return kExitNumeric;
    labels = lift_to_labeling(v);
  }
  write_pgm8(out_path, labels, img.height, img.width);
  if (!truth_path.empty()) {
    const auto truth = read_pgm8(truth_path);
    std::cout << "wrong=" << wrong_pixel_percent(labels, truth) << "%\n";
  }
  return 0;
}

int cmd_grad_check(int size, int labels, unsigned long seed,
                   const std::string& mode, double horizon, int krylov_dim,
                   double tau) {
  if (mode == "dense") {
    // duality spot check on a dense 2x2 instance
    Scenario s;
    s.kind = ScenarioKind::kLines;
    s.height = 2;
    s.width = 2;
    s.cells = 2;
    s.noise_sigma = 0.3;
    s.seed = seed;
    const auto img = gen_voronoi_lines(s);
    const auto graph = build_grid(2, 2, 1);
    const WeightField omega = uniform_weights(graph);
    const auto d = distance_field(img.noisy.pixels, img.palette, 1.0);
    const auto flow = build_flow_operator(graph, omega, d);
    const Mat v = solve_linearized(flow, horizon, 8);
    const Mat g = loss_distance_grad(v, img.tangent_truth);
    const Vec b1 = assemble_b1(flow, manifold::vec_row(v), manifold::vec_row(g),
                               horizon, 8);
    AugmentedOperator aug{&flow, horizon};
    const auto factors = benzi_factors(aug, b1, 8);
    std::cout << "sigma1=" << factors.sigma1
              << " sigma_ratio=" << factors.sigma_ratio() << "\n";
    return 0;
  }

  Scenario s;
  s.kind = ScenarioKind::kLines;
  s.height = size;
  s.width = size;
  s.cells = std::max(2, size / 3);
  s.noise_sigma = 0.3;
  s.seed = seed;
  const auto img = gen_voronoi_lines(s);
  const auto graph = build_grid(size, size, 1);
  Mat palette = img.palette;
  if (labels == 3) {
    palette.conservativeResize(3, 3);
    palette.row(2) << 0.5, 0.5, 0.5;
  }
  const Mat vstar = manifold::project_tangent_rows(
      smoothed_assignment(img.truth, palette.rows()));
  const WeightField omega = uniform_weights(graph);
  const auto d = distance_field(img.noisy.pixels, palette, 1.0);
  const auto flow = build_flow_operator(graph, omega, d);

  GradientOptions opt;
  opt.horizon = horizon;
  opt.krylov_dim = krylov_dim;
  opt.tau = tau;
  const auto pg = full_gradient(flow, vstar, opt);
  const Mat fd = fd_gradient_oracle(graph, img.noisy.pixels, palette, omega,
                                    vstar, horizon, tau, 1.0, 1e-5, 1e-3);
  int good = 0;
  for (Eigen::Index i = 0; i < fd.rows(); ++i) {
    const Vec closed = manifold::project_tangent(pg.euclidean.row(i).transpose());
    double cos = 1.0;
    const double na = closed.norm();
    const double nb = fd.row(i).norm();
    if (na >= 1e-14 || nb >= 1e-14) {
      cos = (na < 1e-14 || nb < 1e-14)
                ? 0.0
                : closed.dot(fd.row(i).transpose()) / (na * nb);
    }
    if (cos >= 0.9) ++good;
  }
  const double fraction = static_cast<double>(good) / fd.rows();
  std::cout << "pixels with cosine >= 0.9: " << 100.0 * fraction << "%\n";
  return fraction >= 0.99 ? 0 : 1;
}

int cmd_predict_train(const std::string& data_dir, const std::string& val_dir,
                      const std::string& out_path, const std::string& trace_path,
                      int prototypes, int steps, double step_size,
                      unsigned long seed, double horizon, int krylov_dim,
                      double rho) {
  const Dataset train_ds = load_dataset(data_dir);
  const Dataset val_ds = load_dataset(val_dir.empty() ? data_dir : val_dir);
  if (train_ds.images.empty()) throw ConfigError("dataset has no images");
  const auto graph = build_grid(train_ds.images[0].clean.height,
                                train_ds.images[0].clean.width, 1);
  PredictorConfig cfg;
  cfg.prototype_count = prototypes;
  cfg.steps = steps;
  cfg.step_size = step_size;
  cfg.seed = seed;
  cfg.flow.horizon = horizon;
  cfg.flow.krylov_dim = krylov_dim;
  cfg.flow.rho = rho;

  const auto result =
      train_predictor(graph, train_ds.images, val_ds.images, cfg);
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    trace << result.trace.to_csv();
  }
  if (result.aborted_nan) {
    std::cerr << "predictor training aborted on non-finite loss\n";
    return kExitNumeric;
  }
  save_predictor(out_path, result.params);
  std::cout << "final val wrong=" << result.trace.val_wrong.back() << "%\n";
  return 0;
}

int cmd_predict(const std::string& image_path, const std::string& pred_path,
                const std::string& palette_path, const std::string& data_dir,
                int index, const std::string& weights_out,
                const std::string& label_out, const std::string& truth_path,
                double horizon, int krylov_dim, double rho) {
  Image img;
  Mat palette;
  Eigen::VectorXi truth;
  bool have_truth = false;
  if (!data_dir.empty()) {
    const Dataset ds = load_dataset(data_dir);
    if (index < 0 || index >= static_cast<int>(ds.images.size())) {
      throw ConfigError("image index out of range");
    }
    img = ds.images[index].noisy;
    palette = ds.palette;
    truth = ds.images[index].truth;
    have_truth = true;
  } else {
    if (image_path.empty() || palette_path.empty()) {
      throw ConfigError("need --image and --palette (or --data with --index)");
    }
    img = read_ppm16(image_path);
    palette = palette_from_json(palette_path);
  }
  if (!truth_path.empty()) {
    truth = read_pgm8(truth_path);
    have_truth = true;
  }

  const auto graph = build_grid(img.height, img.width, 1);
  const auto params = load_predictor(pred_path);
  const Mat features = extract_features(graph, img);
  const WeightField omega = predict_weights(features, params);
  if (!weights_out.empty()) save_weights(weights_out, graph, omega);
  if (!label_out.empty()) {
    const auto d = distance_field(img.pixels, palette, rho);
    const auto flow = build_flow_operator(graph, omega, d);
    const Mat v = solve_linearized(flow, horizon, krylov_dim);
    if (!v.allFinite()) return kExitNumeric;
    const auto labels = lift_to_labeling(v);
    write_pgm8(label_out, labels, img.height, img.width);
    if (have_truth) {
      std::cout << "wrong=" << wrong_pixel_percent(labels, truth) << "%\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linearized assignment flow labeling and weight learning"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default AFFLOW_THREADS or 1)");

  // generate
  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic dataset");
  std::string scenario = "lines";
  int size = 128, cells = 30, image_count = 5;
  double noise = -1.0;
  unsigned long seed = 0;
  std::string out_dir;
  generate_cmd->add_option("--scenario", scenario)
      ->check(CLI::IsMember({"lines", "colors"}));
  generate_cmd->add_option("--size", size);
  generate_cmd->add_option("--cells", cells);
  generate_cmd->add_option("--images", image_count);
  generate_cmd->add_option("--noise", noise, "sigma; negative = calibrate");
  generate_cmd->add_option("--seed", seed);
  generate_cmd->add_option("--out", out_dir)->required();

  // calibrate
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "sweep or bisect the noise level");
  std::string cal_scenario = "colors";
  int cal_size = 128, cal_cells = 30;
  unsigned long cal_seed = 0;
  double cal_target = 50.0;
  calibrate_cmd->add_option("--scenario", cal_scenario)
      ->check(CLI::IsMember({"lines", "colors"}));
  calibrate_cmd->add_option("--size", cal_size);
  calibrate_cmd->add_option("--cells", cal_cells);
  calibrate_cmd->add_option("--seed", cal_seed);
  calibrate_cmd->add_option("--target", cal_target);

  // train
  auto* train_cmd = app.add_subcommand("train", "learn weight patches");
  std::string data_dir, config_path, model_out = "model.omega", trace_path,
                                     resume_path;
  train_cmd->add_option("--data", data_dir)->required();
  train_cmd->add_option("--config", config_path);
  train_cmd->add_option("--out", model_out);
  train_cmd->add_option("--trace", trace_path);
  train_cmd->add_option("--resume", resume_path);

  // label
  auto* label_cmd = app.add_subcommand("label", "label one image");
  std::string image_path, weights_path, palette_path, label_data_dir,
      label_out = "labels.pgm", truth_path;
  bool uniform = false;
  int label_index = 0;
  double horizon = 5.0, rho = 1.0;
  int krylov_dim = 10;
  label_cmd->add_option("--image", image_path);
  label_cmd->add_option("--weights", weights_path);
  label_cmd->add_flag("--uniform", uniform);
  label_cmd->add_option("--palette", palette_path);
  label_cmd->add_option("--data", label_data_dir);
  label_cmd->add_option("--index", label_index);
  label_cmd->add_option("--out", label_out);
  label_cmd->add_option("--truth", truth_path);
  label_cmd->add_option("--T", horizon);
  label_cmd->add_option("--m", krylov_dim);
  label_cmd->add_option("--rho", rho);
  bool label_patch_distance = false;
  int label_nonlinear = 0;
  label_cmd->add_flag("--patch-distance", label_patch_distance);
  label_cmd->add_option("--nonlinear", label_nonlinear,
                        "iterated re-linearization steps (0 = single solve)");

  // grad-check
  auto* grad_cmd = app.add_subcommand("grad-check",
                                      "closed-form vs finite-difference gradient");
  int gc_size = 8, gc_labels = 2;
  unsigned long gc_seed = 0;
  std::string gc_mode = "fd";
  double gc_horizon = 2.0, gc_tau = 0.1;
  int gc_m = 10;
  grad_cmd->add_option("--size", gc_size);
  grad_cmd->add_option("--labels", gc_labels)->check(CLI::Range(2, 3));
  grad_cmd->add_option("--seed", gc_seed);
  grad_cmd->add_option("--mode", gc_mode)->check(CLI::IsMember({"fd", "dense"}));
  grad_cmd->add_option("--T", gc_horizon);
  grad_cmd->add_option("--m", gc_m);
  grad_cmd->add_option("--tau", gc_tau);

  // predict-train
  auto* ptrain_cmd = app.add_subcommand("predict-train", "train the predictor");
  std::string pt_data, pt_val, pt_out = "model.pred", pt_trace;
  int pt_protos = 50, pt_steps = 100;
  double pt_step = 0.05, pt_horizon = 5.0, pt_rho = 1.0;
  unsigned long pt_seed = 0;
  int pt_m = 10;
  ptrain_cmd->add_option("--data", pt_data)->required();
  ptrain_cmd->add_option("--val", pt_val);
  ptrain_cmd->add_option("--out", pt_out);
  ptrain_cmd->add_option("--trace", pt_trace);
  ptrain_cmd->add_option("--prototypes", pt_protos);
  ptrain_cmd->add_option("--steps", pt_steps);
  ptrain_cmd->add_option("--step-size", pt_step);
  ptrain_cmd->add_option("--seed", pt_seed);
  ptrain_cmd->add_option("--T", pt_horizon);
  ptrain_cmd->add_option("--m", pt_m);
  ptrain_cmd->add_option("--rho", pt_rho);

  // predict
  auto* predict_cmd =
      app.add_subcommand("predict", "predict weights for an image");
  std::string pr_image, pr_pred, pr_palette, pr_data, pr_weights_out, pr_label_out,
      pr_truth;
  int pr_index = 0;
  double pr_horizon = 5.0, pr_rho = 1.0;
  int pr_m = 10;
  predict_cmd->add_option("--image", pr_image);
  predict_cmd->add_option("--pred", pr_pred)->required();
  predict_cmd->add_option("--palette", pr_palette);
  predict_cmd->add_option("--data", pr_data);
  predict_cmd->add_option("--index", pr_index);
  predict_cmd->add_option("--weights-out", pr_weights_out);
  predict_cmd->add_option("--label-out", pr_label_out);
  predict_cmd->add_option("--truth", pr_truth);
  predict_cmd->add_option("--T", pr_horizon);
  predict_cmd->add_option("--m", pr_m);
  predict_cmd->add_option("--rho", pr_rho);

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) set_thread_count(threads);

  try {
    if (*generate_cmd) {
      return cmd_generate(scenario, size, cells, image_count, noise, noise < 0.0,
                          seed, out_dir);
    }
    if (*calibrate_cmd) {
      return cmd_calibrate(cal_scenario, cal_size, cal_cells, cal_seed, cal_target);
    }
    if (*train_cmd) {
      return cmd_train(data_dir, config_path, model_out, trace_path, resume_path);
    }
    if (*label_cmd) {
      return cmd_label(image_path, weights_path, uniform, palette_path,
                       label_data_dir, label_index, label_out, truth_path, horizon,
                       krylov_dim, rho, label_patch_distance, label_nonlinear);
    }
    if (*grad_cmd) {
      return cmd_grad_check(gc_size, gc_labels, gc_seed, gc_mode, gc_horizon, gc_m,
                            gc_tau);
    }
    if (*ptrain_cmd) {
      return cmd_predict_train(pt_data, pt_val, pt_out, pt_trace, pt_protos,
                               pt_steps, pt_step, pt_seed, pt_horizon, pt_m,
                               pt_rho);
    }
    if (*predict_cmd) {
      return cmd_predict(pr_image, pr_pred, pr_palette, pr_data, pr_index,
                         pr_weights_out, pr_label_out, pr_truth, pr_horizon, pr_m,
                         pr_rho);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
