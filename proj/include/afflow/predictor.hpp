// Prototype-based predictor mapping local image features to weight patches,
// trained end-to-end through the flow gradient.
#pragma once

#include <string>
#include <vector>

#include "afflow/data.hpp"
#include "afflow/gradient.hpp"

namespace afflow {

struct PredictorParams {
  Mat prototypes;  // N x (channels * |N|) feature prototypes
  Mat nu;          // N x |N| tangent rows representing prototypical patches
  double sigma = 1.0;

  Eigen::Index count() const { return prototypes.rows(); }
};

/// Raw pixel values in the patch window around each pixel, flattened in
/// patch order with channels contiguous per position: |I| x (C * |N|).
Mat extract_features(const GridGraph& graph, const Image& img);

/// Lloyd k-means with seeded restarts; returns the centers of the best run.
Mat kmeans(const Mat& samples, int k, int iters, int restarts,
           unsigned long seed);

/// Prototypes from clustering noise-free patches; each tangent vector is
/// directed towards the center pixel of its prototype patch.
PredictorParams init_predictor(const GridGraph& graph,
                               const std::vector<LabeledImage>& clean_images,
                               int prototype_count, unsigned long seed,
                               int kmeans_iters = 20, int kmeans_restarts = 3);

/// Softmax similarity weights s_ij / sum_k s_ik with s_ij = e^{-sigma d_ij}.
Mat similarity_weights(const Mat& features, const PredictorParams& params);

/// Per-pixel weight patches lifted from the similarity-weighted tangent
/// average; always a valid weight field.
WeightField predict_weights(const Mat& features, const PredictorParams& params);

struct PredictorGradient {
  Mat prototypes;
  Mat nu;
  double log_sigma = 0.0;
  double loss = 0.0;
  double wrong_percent = 0.0;
};

/// Loss and parameter gradient on one image: the flow gradient at the
/// predicted weights chained through the softmax-weighted lifting.
PredictorGradient predictor_gradient(const GridGraph& graph,
                                     const LabeledImage& img,
                                     const PredictorParams& params,
                                     const GradientOptions& opt);

struct PredictorConfig {
  PredictorConfig() { flow.tau = 0.0; }

  int prototype_count = 50;
  int steps = 100;
  double step_size = 100.0;  // the predictor loss landscape is shallow too
  unsigned long seed = 0;
  int kmeans_iters = 20;
  int kmeans_restarts = 3;
  GradientOptions flow;  // tau defaults to 0 for predictor training
};

struct PredictorTrace {
  std::vector<int> step;
  std::vector<double> loss;
  std::vector<double> train_wrong;
  std::vector<double> val_wrong;

  std::string to_csv() const;
};

struct PredictorResult {
  PredictorParams params;
  PredictorTrace trace;
  bool aborted_nan = false;
};

/// Descent on (p, nu, log sigma) over the training set, monitoring the
/// wrong-pixel percentage on held-out validation images each step.
PredictorResult train_predictor(const GridGraph& graph,
                                const std::vector<LabeledImage>& train_images,
                                const std::vector<LabeledImage>& val_images,
                                PredictorConfig config);

void save_predictor(const std::string& path, const PredictorParams& params);
PredictorParams load_predictor(const std::string& path);

}  // namespace afflow
