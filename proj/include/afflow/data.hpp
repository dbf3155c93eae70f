// Synthetic Voronoi labeling scenarios, noise injection and image I/O.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "afflow/manifold.hpp"

namespace afflow {

struct Image {
  int height = 0;
  int width = 0;
  int channels = 3;
  Mat pixels;  // |I| x channels, row-major pixel order, values nominally in [0,1]

  Eigen::Index pixel_count() const { return static_cast<Eigen::Index>(height) * width; }
};

enum class ScenarioKind { kLines, kColors };

struct Scenario {
  ScenarioKind kind = ScenarioKind::kLines;
  int height = 128;
  int width = 128;
  int cells = 30;
  double noise_sigma = 0.0;
  unsigned long seed = 0;
  double edge_threshold = 1.0;  // line rasterization width, lines scenario only
};

struct LabeledImage {
  Image clean;
  Image noisy;
  Eigen::VectorXi truth;   // ground-truth label index per pixel
  Mat palette;             // |J| x 3 label colors
  Mat assignment_truth;    // eps-smoothed one-hot rows W*
  Mat tangent_truth;       // V* = project_tangent_rows(W*)
};

/// Two-label palette {line, background} = {black, white}.
Mat lines_palette();
/// Eight maximally separated RGB colors.
Mat colors_palette();

LabeledImage gen_voronoi_lines(const Scenario& s);
LabeledImage gen_voronoi_colors(const Scenario& s);
LabeledImage generate(const Scenario& s);

/// Adds i.i.d. Gaussian noise per channel. Values are not clipped.
Image add_noise(const Image& img, double sigma, unsigned long seed);

/// Per-pixel nearest-palette labeling of (possibly noisy) image data.
Eigen::VectorXi nearest_label(const Image& img, const Mat& palette);

/// Fraction (in percent) of labels differing from the ground truth.
double wrong_pixel_percent(const Eigen::VectorXi& labels,
                           const Eigen::VectorXi& truth);

/// Bisects the noise level until the pixelwise nearest-label error on the
/// colors scenario hits target_percent (within tol).
double calibrate_noise_sigma(Scenario s, double target_percent,
                             double tol = 1.0);

// --- Netpbm I/O -----------------------------------------------------------

/// 16-bit binary PPM (P6). Values are clamped to [0,1] on write.
void write_ppm16(const std::string& path, const Image& img);
Image read_ppm16(const std::string& path);

/// 8-bit binary PGM (P5) label map.
void write_pgm8(const std::string& path, const Eigen::VectorXi& labels,
                int height, int width);
Eigen::VectorXi read_pgm8(const std::string& path, int* height = nullptr,
                          int* width = nullptr);

// --- Dataset on disk ------------------------------------------------------
//
// A dataset directory holds clean/noisy PPMs plus truth PGMs per image and
// a manifest.json tying them together. Noisy images are affinely rescaled
// into [0,1] before writing; the manifest records offset and scale so the
// reader can undo the transform.

struct DatasetEntry {
  std::string clean;
  std::string noisy;
  std::string truth;
  double noisy_offset = 0.0;
  double noisy_scale = 1.0;
};

struct Dataset {
  Scenario scenario;
  Mat palette;
  std::vector<DatasetEntry> entries;
  std::vector<LabeledImage> images;
};

void save_dataset(const std::string& dir, const Scenario& scenario,
                  const std::vector<LabeledImage>& images);
Dataset load_dataset(const std::string& dir);

/// Smoothed one-hot encoding of a labeling; every row stays strictly inside
/// the simplex so the tangent target keeps a nonzero norm.
Mat smoothed_assignment(const Eigen::VectorXi& truth, Eigen::Index label_count,
                        double eps = 1e-6);

}  // namespace afflow
