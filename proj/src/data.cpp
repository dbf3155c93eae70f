#include "afflow/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace afflow {

namespace {

struct Seeds {
  std::vector<double> x;
  std::vector<double> y;
};

Seeds sample_seeds(const Scenario& s, std::mt19937_64& rng) {
  if (s.cells < 1) {
    throw std::invalid_argument("scenario: need at least one cell");
  }
  std::uniform_real_distribution<double> ux(0.0, static_cast<double>(s.width));
  std::uniform_real_distribution<double> uy(0.0, static_cast<double>(s.height));
  Seeds seeds;
  seeds.x.resize(s.cells);
  seeds.y.resize(s.cells);
  for (int c = 0; c < s.cells; ++c) {
    seeds.x[c] = ux(rng);
    seeds.y[c] = uy(rng);
  }
  return seeds;
}

// Distances from pixel center to the nearest and second-nearest seed,
// plus the index of the nearest one.
void nearest_two(const Seeds& seeds, double px, double py, double* d1,
                 double* d2, int* cell) {
  double best = std::numeric_limits<double>::max();
  double second = std::numeric_limits<double>::max();
  int best_cell = 0;
  for (std::size_t c = 0; c < seeds.x.size(); ++c) {
    const double dx = px - seeds.x[c];
    const double dy = py - seeds.y[c];
    const double d = std::sqrt(dx * dx + dy * dy);
    if (d < best) {
      second = best;
      best = d;
      best_cell = static_cast<int>(c);
    } else if (d < second) {
      second = d;
    }
  }
  *d1 = best;
  *d2 = second;
  *cell = best_cell;
}

void finalize(LabeledImage& out, const Scenario& s) {
  out.assignment_truth = smoothed_assignment(out.truth, out.palette.rows());
  out.tangent_truth = manifold::project_tangent_rows(out.assignment_truth);
  out.noisy = s.noise_sigma > 0.0
                  ? add_noise(out.clean, s.noise_sigma, s.seed + 1)
                  : out.clean;
}

}  // namespace

Mat lines_palette() {
  Mat p(2, 3);
  p.row(0) << 0.0, 0.0, 0.0;  // line
  p.row(1) << 1.0, 1.0, 1.0;  // background
  return p;
}

Mat colors_palette() {
  Mat p(8, 3);
  p << 1, 0, 0,
       0, 1, 0,
       0, 0, 1,
       1, 1, 0,
       1, 0, 1,
       0, 1, 1,
       0, 0, 0,
       1, 1, 1;
  return p;
}

LabeledImage gen_voronoi_lines(const Scenario& s) {
  if (s.kind != ScenarioKind::kLines) {
    throw std::invalid_argument("gen_voronoi_lines: wrong scenario kind");
  }
  std::mt19937_64 rng(s.seed);
  const Seeds seeds = sample_seeds(s, rng);

  LabeledImage out;
  out.palette = lines_palette();
  out.clean.height = s.height;
  out.clean.width = s.width;
  out.clean.pixels.resize(out.clean.pixel_count(), 3);
  out.truth.resize(out.clean.pixel_count());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Eigen::Index i = static_cast<Eigen::Index>(y) * s.width + x;
      double d1 = 0.0, d2 = 0.0;
      int cell = 0;
      nearest_two(seeds, x + 0.5, y + 0.5, &d1, &d2, &cell);
      const bool on_edge = (d2 - d1) < s.edge_threshold;
      out.truth(i) = on_edge ? 0 : 1;
      out.clean.pixels.row(i) = out.palette.row(out.truth(i));
    }
  }
  finalize(out, s);
  return out;
}

LabeledImage gen_voronoi_colors(const Scenario& s) {
  if (s.kind != ScenarioKind::kColors) {
    throw std::invalid_argument("gen_voronoi_colors: wrong scenario kind");
  }
  std::mt19937_64 rng(s.seed);
  const Seeds seeds = sample_seeds(s, rng);
  const Mat palette = colors_palette();
  std::uniform_int_distribution<int> pick(0, static_cast<int>(palette.rows()) - 1);
  std::vector<int> cell_color(s.cells);
  for (int c = 0; c < s.cells; ++c) cell_color[c] = pick(rng);

  LabeledImage out;
  out.palette = palette;
  out.clean.height = s.height;
  out.clean.width = s.width;
  out.clean.pixels.resize(out.clean.pixel_count(), 3);
  out.truth.resize(out.clean.pixel_count());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const Eigen::Index i = static_cast<Eigen::Index>(y) * s.width + x;
      double d1 = 0.0, d2 = 0.0;
      int cell = 0;
      nearest_two(seeds, x + 0.5, y + 0.5, &d1, &d2, &cell);
      out.truth(i) = cell_color[cell];
      out.clean.pixels.row(i) = palette.row(out.truth(i));
    }
  }
  finalize(out, s);
  return out;
}

LabeledImage generate(const Scenario& s) {
  return s.kind == ScenarioKind::kLines ? gen_voronoi_lines(s)
                                        : gen_voronoi_colors(s);
}

Image add_noise(const Image& img, double sigma, unsigned long seed) {
  if (sigma < 0.0) {
    throw std::invalid_argument("add_noise: sigma must be non-negative");
  }
  Image out = img;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (Eigen::Index i = 0; i < out.pixels.rows(); ++i) {
    for (Eigen::Index c = 0; c < out.pixels.cols(); ++c) {
      out.pixels(i, c) += gauss(rng);
    }
  }
  return out;
}

Eigen::VectorXi nearest_label(const Image& img, const Mat& palette) {
  Eigen::VectorXi labels(img.pixels.rows());
  for (Eigen::Index i = 0; i < img.pixels.rows(); ++i) {
    Eigen::Index best = 0;
    (palette.rowwise() - img.pixels.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels(i) = static_cast<int>(best);
  }
  return labels;
}

double wrong_pixel_percent(const Eigen::VectorXi& labels,
                           const Eigen::VectorXi& truth) {
  if (labels.size() != truth.size()) {
    throw std::invalid_argument("wrong_pixel_percent: size mismatch");
  }
  const auto wrong = (labels.array() != truth.array()).count();
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double calibrate_noise_sigma(Scenario s, double target_percent, double tol) {
  s.kind = ScenarioKind::kColors;
  auto error_at = [&](double sigma) {
    s.noise_sigma = sigma;
    const LabeledImage img = gen_voronoi_colors(s);
    return wrong_pixel_percent(nearest_label(img.noisy, img.palette), img.truth);
  };
  double lo = 0.0, hi = 0.25;
  while (error_at(hi) < target_percent && hi < 16.0) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double err = error_at(mid);
    if (std::abs(err - target_percent) <= tol) return mid;
    (err < target_percent ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// --- Netpbm ----------------------------------------------------------------

namespace {

int read_pnm_token(std::istream& in) {
  // skips whitespace and '#' comments
  while (true) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  in >> value;
  return value;
}

}  // namespace

void write_ppm16(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_ppm16: cannot open " + path);
  out << "P6\n" << img.width << " " << img.height << "\n65535\n";
  for (Eigen::Index i = 0; i < img.pixels.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(img.pixels(i, c), 0.0, 1.0);
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                      static_cast<unsigned char>(q & 0xff)};
      out.write(reinterpret_cast<const char*>(bytes), 2);
    }
  }
  if (!out) throw std::runtime_error("write_ppm16: write failed for " + path);
}

Image read_ppm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_ppm16: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw std::runtime_error("read_ppm16: bad magic in " + path);
  Image img;
  img.width = read_pnm_token(in);
  img.height = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (maxval != 65535) {
    throw std::runtime_error("read_ppm16: expected 16-bit depth in " + path);
  }
  in.get();  // single whitespace after maxval
  img.pixels.resize(img.pixel_count(), 3);
  for (Eigen::Index i = 0; i < img.pixels.rows(); ++i) {
    for (int c = 0; c < 3; ++c) {
      unsigned char bytes[2];
      in.read(reinterpret_cast<char*>(bytes), 2);
      const int q = (bytes[0] << 8) | bytes[1];
      img.pixels(i, c) = static_cast<double>(q) / 65535.0;
    }
  }
  if (!in) throw std::runtime_error("read_ppm16: truncated file " + path);
  return img;
}

void write_pgm8(const std::string& path, const Eigen::VectorXi& labels,
                int height, int width) {
  if (labels.size() != static_cast<Eigen::Index>(height) * width) {
    throw std::invalid_argument("write_pgm8: size mismatch");
  }
  if (labels.size() > 0 && (labels.minCoeff() < 0 || labels.maxCoeff() > 255)) {
    throw std::invalid_argument("write_pgm8: labels out of 8-bit range");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_pgm8: cannot open " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const auto b = static_cast<unsigned char>(labels(i));
    out.write(reinterpret_cast<const char*>(&b), 1);
  }
  if (!out) throw std::runtime_error("write_pgm8: write failed for " + path);
}

Eigen::VectorXi read_pgm8(const std::string& path, int* height, int* width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm8: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("read_pgm8: bad magic in " + path);
  const int w = read_pnm_token(in);
  const int h = read_pnm_token(in);
  const int maxval = read_pnm_token(in);
  if (maxval != 255) throw std::runtime_error("read_pgm8: expected 8-bit depth");
  in.get();
  Eigen::VectorXi labels(static_cast<Eigen::Index>(h) * w);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    unsigned char b = 0;
    in.read(reinterpret_cast<char*>(&b), 1);
    labels(i) = b;
  }
  if (!in) throw std::runtime_error("read_pgm8: truncated file " + path);
  if (height) *height = h;
  if (width) *width = w;
  return labels;
}

// --- Dataset ----------------------------------------------------------------

namespace {

nlohmann::json scenario_to_json(const Scenario& s) {
  return {{"kind", s.kind == ScenarioKind::kLines ? "lines" : "colors"},
          {"height", s.height},
          {"width", s.width},
          {"cells", s.cells},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed},
          {"edge_threshold", s.edge_threshold}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.kind = j.at("kind").get<std::string>() == "lines" ? ScenarioKind::kLines
                                                      : ScenarioKind::kColors;
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.cells = j.at("cells").get<int>();
  s.noise_sigma = j.at("noise_sigma").get<double>();
  s.seed = j.at("seed").get<unsigned long>();
  s.edge_threshold = j.value("edge_threshold", 1.0);
  return s;
}

}  // namespace

void save_dataset(const std::string& dir, const Scenario& scenario,
                  const std::vector<LabeledImage>& images) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["scenario"] = scenario_to_json(scenario);
  const Mat& palette = images.empty() ? lines_palette() : images.front().palette;
  manifest["palette"] = nlohmann::json::array();
  for (Eigen::Index j = 0; j < palette.rows(); ++j) {
    manifest["palette"].push_back({palette(j, 0), palette(j, 1), palette(j, 2)});
  }
  manifest["images"] = nlohmann::json::array();
  for (std::size_t k = 0; k < images.size(); ++k) {
    const auto& img = images[k];
    DatasetEntry entry;
    entry.clean = "img" + std::to_string(k) + "_clean.ppm";
    entry.noisy = "img" + std::to_string(k) + "_noisy.ppm";
    entry.truth = "img" + std::to_string(k) + "_truth.pgm";

    write_ppm16(dir + "/" + entry.clean, img.clean);

    const double lo = std::min(0.0, img.noisy.pixels.minCoeff());
    const double hi = std::max(1.0, img.noisy.pixels.maxCoeff());
    entry.noisy_offset = lo;
    entry.noisy_scale = hi - lo;
    Image rescaled = img.noisy;
    rescaled.pixels = (rescaled.pixels.array() - lo) / (hi - lo);
    write_ppm16(dir + "/" + entry.noisy, rescaled);

    write_pgm8(dir + "/" + entry.truth, img.truth, img.clean.height,
               img.clean.width);

    manifest["images"].push_back({{"clean", entry.clean},
                                  {"noisy", entry.noisy},
                                  {"truth", entry.truth},
                                  {"noisy_offset", entry.noisy_offset},
                                  {"noisy_scale", entry.noisy_scale}});
  }
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw std::runtime_error("save_dataset: cannot write manifest");
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("load_dataset: missing manifest in " + dir);
  nlohmann::json manifest;
  in >> manifest;

  Dataset ds;
  ds.scenario = scenario_from_json(manifest.at("scenario"));
  const auto& pal = manifest.at("palette");
  ds.palette.resize(static_cast<Eigen::Index>(pal.size()), 3);
  for (Eigen::Index j = 0; j < ds.palette.rows(); ++j) {
    for (int c = 0; c < 3; ++c) ds.palette(j, c) = pal[j][c].get<double>();
  }
  for (const auto& j : manifest.at("images")) {
    DatasetEntry entry;
    entry.clean = j.at("clean").get<std::string>();
    entry.noisy = j.at("noisy").get<std::string>();
    entry.truth = j.at("truth").get<std::string>();
    entry.noisy_offset = j.at("noisy_offset").get<double>();
    entry.noisy_scale = j.at("noisy_scale").get<double>();
    ds.entries.push_back(entry);

    LabeledImage img;
    img.palette = ds.palette;
    img.clean = read_ppm16(dir + "/" + entry.clean);
    img.noisy = read_ppm16(dir + "/" + entry.noisy);
    img.noisy.pixels =
        (img.noisy.pixels.array() * entry.noisy_scale) + entry.noisy_offset;
    img.truth = read_pgm8(dir + "/" + entry.truth);
    img.assignment_truth = smoothed_assignment(img.truth, ds.palette.rows());
    img.tangent_truth = manifold::project_tangent_rows(img.assignment_truth);
    ds.images.push_back(std::move(img));
  }
  return ds;
}

Mat smoothed_assignment(const Eigen::VectorXi& truth, Eigen::Index label_count,
                        double eps) {
  Mat w(truth.size(), label_count);
  const double off = eps / static_cast<double>(label_count);
  const double on = 1.0 - eps * static_cast<double>(label_count - 1) /
                              static_cast<double>(label_count);
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    for (Eigen::Index j = 0; j < label_count; ++j) {
      w(i, j) = (truth(i) == j) ? on : off;
    }
  }
  return w;
}

}  // namespace afflow
