#include "afflow/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace afflow {
namespace manifold {

namespace {

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void require_positive(const Vec& p, const char* what) {
  if ((p.array() <= 0.0).any()) {
    throw std::domain_error(std::string(what) + ": non-positive entry");
  }
}

// Renormalize onto the simplex with entries floored away from zero.
Vec floored_normalize(Vec p) {
  p = p.cwiseMax(kSimplexFloor);
  return p / p.sum();
}

}  // namespace

Vec project_tangent(const Vec& z) {
  if (z.size() < 2) {
    throw std::invalid_argument("project_tangent: need dimension >= 2");
  }
  return z.array() - z.mean();
}

Vec replicator(const Vec& p, const Vec& z) {
  require_same_dim(p, z, "replicator");
  return p.cwiseProduct(z) - p * p.dot(z);
}

Vec lift(const Vec& p, const Vec& z) {
  require_same_dim(p, z, "lift");
  const Vec e = (z.array() - z.maxCoeff()).exp();
  return floored_normalize(p.cwiseProduct(e));
}

Vec lift_inverse(const Vec& p, const Vec& q) {
  require_same_dim(p, q, "lift_inverse");
  require_positive(p, "lift_inverse");
  require_positive(q, "lift_inverse");
  return project_tangent(q.array().log().matrix() - p.array().log().matrix());
}

Vec exp_map(const Vec& p, const Vec& v) {
  require_same_dim(p, v, "exp_map");
  require_positive(p, "exp_map");
  const Vec w = v.cwiseQuotient(p);
  const Vec e = (w.array() - w.maxCoeff()).exp();
  return floored_normalize(p.cwiseProduct(e));
}

Vec exp_map_inverse(const Vec& p, const Vec& q) {
  require_same_dim(p, q, "exp_map_inverse");
  require_positive(p, "exp_map_inverse");
  require_positive(q, "exp_map_inverse");
  return replicator(p, (q.cwiseQuotient(p)).array().log().matrix());
}

Vec barycenter(int c) {
  if (c < 2) {
    throw std::invalid_argument("barycenter: need dimension >= 2");
  }
  return Vec::Constant(c, 1.0 / c);
}

Mat project_tangent_rows(const Mat& z) {
  return z.colwise() - Vec(z.rowwise().mean());
}

namespace {

template <typename F>
Mat rowwise(const Mat& a, const Mat& b, F f) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("field operation: shape mismatch");
  }
  Mat out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out.row(i) = f(Vec(a.row(i)), Vec(b.row(i))).transpose();
  }
  return out;
}

}  // namespace

Mat replicator_rows(const Mat& base, const Mat& z) {
  return rowwise(base, z, [](const Vec& p, const Vec& v) { return replicator(p, v); });
}

Mat lift_rows(const Mat& base, const Mat& z) {
  return rowwise(base, z, [](const Vec& p, const Vec& v) { return lift(p, v); });
}

Mat lift_inverse_rows(const Mat& base, const Mat& q) {
  return rowwise(base, q, [](const Vec& p, const Vec& v) { return lift_inverse(p, v); });
}

Mat exp_map_rows(const Mat& base, const Mat& v) {
  return rowwise(base, v, [](const Vec& p, const Vec& w) { return exp_map(p, w); });
}

Mat exp_map_inverse_rows(const Mat& base, const Mat& q) {
  return rowwise(base, q, [](const Vec& p, const Vec& w) { return exp_map_inverse(p, w); });
}

Mat barycenter_field(Eigen::Index rows, int c) {
  return Mat::Constant(rows, c, 1.0 / c);
}

Vec vec_row(const Mat& m) {
  Vec v(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    v.segment(i * m.cols(), m.cols()) = m.row(i).transpose();
  }
  return v;
}

Mat unvec_row(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("unvec_row: size mismatch");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    m.row(i) = v.segment(i * cols, cols).transpose();
  }
  return m;
}

bool is_simplex_point(const Vec& p, double tol) {
  return (p.array() > 0.0).all() && std::abs(p.sum() - 1.0) <= tol;
}

bool is_tangent(const Vec& v, double tol) { return std::abs(v.sum()) <= tol; }

bool is_assignment_state(const Mat& w, double tol) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    if (!is_simplex_point(w.row(i).transpose(), tol)) return false;
  }
  return true;
}

bool is_tangent_field(const Mat& v, double tol) {
  return (v.rowwise().sum().array().abs() <= tol).all();
}

}  // namespace manifold
}  // namespace afflow
