// Toroidal grid-graph neighborhoods and the per-pixel weight patches that
// regularize the flow.
#pragma once

#include <string>

#include <Eigen/Core>

#include "afflow/manifold.hpp"

namespace afflow {

struct GridGraph {
  int height = 0;
  int width = 0;
  int radius = 1;
  // neighbors(i, t) is the pixel index of patch position t of pixel i.
  // Positions enumerate the (2r+1) x (2r+1) window in row-major order,
  // wrapping around the image borders, so every pixel sees the same
  // patch size. The same pixel may occur at several positions on grids
  // smaller than the window.
  Eigen::MatrixXi neighbors;

  int pixel_count() const { return height * width; }
  int patch_size() const { return (2 * radius + 1) * (2 * radius + 1); }
  int center_position() const { return (patch_size() - 1) / 2; }
};

GridGraph build_grid(int height, int width, int radius = 1);

// One weight patch per pixel, |I| x |N|, each row a point in the open
// simplex aligned with GridGraph::neighbors.
using WeightField = Mat;

WeightField uniform_weights(const GridGraph& graph);

struct WeightReport {
  bool ok = true;
  Eigen::Index pixel = -1;
  std::string message;
};

WeightReport validate_weights(const GridGraph& graph, const WeightField& omega,
                              double tol = 1e-9);

// Checkpoint storage: a one-line JSON header followed by the patch
// entries as little-endian doubles, pixel-major.
struct WeightCheckpoint {
  int height = 0;
  int width = 0;
  int radius = 1;
  WeightField patches;
};

void save_weights(const std::string& path, const GridGraph& graph,
                  const WeightField& omega);
WeightCheckpoint load_weights(const std::string& path);

}  // namespace afflow
