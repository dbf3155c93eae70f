#include "afflow/grid.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace afflow {

GridGraph build_grid(int height, int width, int radius) {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("build_grid: image dimensions must be positive");
  }
  if (radius < 1) {
    throw std::invalid_argument("build_grid: radius must be >= 1");
  }
  GridGraph g;
  g.height = height;
  g.width = width;
  g.radius = radius;
  const int span = 2 * radius + 1;
  g.neighbors.resize(height * width, span * span);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = y * width + x;
      int t = 0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int ny = ((y + dy) % height + height) % height;
        for (int dx = -radius; dx <= radius; ++dx) {
          const int nx = ((x + dx) % width + width) % width;
          g.neighbors(i, t++) = ny * width + nx;
        }
      }
    }
  }
  return g;
}

WeightField uniform_weights(const GridGraph& graph) {
  const int n = graph.patch_size();
  return Mat::Constant(graph.pixel_count(), n, 1.0 / n);
}

WeightReport validate_weights(const GridGraph& graph, const WeightField& omega,
                              double tol) {
  WeightReport report;
  if (omega.rows() != graph.pixel_count() || omega.cols() != graph.patch_size()) {
    report.ok = false;
    report.message = "weight field shape does not match graph";
    return report;
  }
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    if ((omega.row(i).array() <= 0.0).any()) {
      report.ok = false;
      report.pixel = i;
      report.message = "non-positive weight";
      return report;
    }
    if (std::abs(omega.row(i).sum() - 1.0) > tol) {
      report.ok = false;
      report.pixel = i;
      report.message = "patch not normalized";
      return report;
    }
  }
  return report;
}

void save_weights(const std::string& path, const GridGraph& graph,
                  const WeightField& omega) {
  const auto report = validate_weights(graph, omega);
  if (!report.ok) {
    throw std::invalid_argument("save_weights: " + report.message);
  }
  nlohmann::json header = {{"height", graph.height},
                           {"width", graph.width},
                           {"radius", graph.radius},
                           {"dtype", "f64"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_weights: cannot open " + path);
  out << header.dump() << '\n';
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    for (Eigen::Index t = 0; t < omega.cols(); ++t) {
      const double v = omega(i, t);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
  if (!out) throw std::runtime_error("save_weights: write failed for " + path);
}

WeightCheckpoint load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_weights: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_weights: missing header in " + path);
  }
  const auto header = nlohmann::json::parse(line);
  if (header.value("dtype", "") != "f64") {
    throw std::runtime_error("load_weights: unsupported dtype in " + path);
  }
  WeightCheckpoint ckpt;
  ckpt.height = header.at("height").get<int>();
  ckpt.width = header.at("width").get<int>();
  ckpt.radius = header.at("radius").get<int>();
  const int span = 2 * ckpt.radius + 1;
  const Eigen::Index pixels = static_cast<Eigen::Index>(ckpt.height) * ckpt.width;
  const Eigen::Index patch = span * span;
  ckpt.patches.resize(pixels, patch);
  for (Eigen::Index i = 0; i < pixels; ++i) {
    for (Eigen::Index t = 0; t < patch; ++t) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      ckpt.patches(i, t) = v;
    }
  }
  if (!in) throw std::runtime_error("load_weights: truncated payload in " + path);
  return ckpt;
}

}  // namespace afflow
