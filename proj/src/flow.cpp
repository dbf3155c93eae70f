#include "afflow/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace afflow {

using manifold::unvec_row;
using manifold::vec_row;

DistanceField distance_field(const Mat& pixels, const Mat& labels, double rho) {
  if (labels.rows() == 0) {
    throw std::invalid_argument("distance_field: empty label set");
  }
  if (pixels.cols() != labels.cols()) {
    throw std::invalid_argument("distance_field: channel mismatch");
  }
  if (rho <= 0.0) {
    throw std::invalid_argument("distance_field: rho must be positive");
  }
  DistanceField d;
  d.rho = rho;
  d.distances.resize(pixels.rows(), labels.rows());
  for (Eigen::Index j = 0; j < labels.rows(); ++j) {
    d.distances.col(j) =
        (pixels.rowwise() - labels.row(j)).rowwise().norm();
  }
  return d;
}

DistanceField distance_field_patch(const GridGraph& graph, const Mat& pixels,
                                   const Mat& labels, double rho) {
  const DistanceField center = distance_field(pixels, labels, rho);
  DistanceField d;
  d.rho = rho;
  d.distances.resize(center.distances.rows(), center.distances.cols());
  for (Eigen::Index i = 0; i < d.distances.rows(); ++i) {
    Vec acc = Vec::Zero(d.distances.cols());
    for (int t = 0; t < graph.patch_size(); ++t) {
      acc += center.distances.row(graph.neighbors(i, t))
                 .transpose()
                 .array()
                 .square()
                 .matrix();
    }
    d.distances.row(i) = acc.array().sqrt().transpose();
  }
  return d;
}

Mat likelihood(const Mat& w, const DistanceField& d) {
  return manifold::lift_rows(w, -d.distances / d.rho);
}

Mat similarity(const GridGraph& graph, const Mat& w, const Mat& l,
               const WeightField& omega) {
  const auto report = validate_weights(graph, omega);
  if (!report.ok) {
    throw std::invalid_argument("similarity: " + report.message);
  }
  // exp_map_inverse is taken at each center pixel against each neighbor's
  // likelihood, so the generic row-wise helpers do not apply directly.
  Mat out(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    const Vec wi = w.row(i).transpose();
    Vec avg = Vec::Zero(w.cols());
    for (int t = 0; t < graph.patch_size(); ++t) {
      const Eigen::Index k = graph.neighbors(i, t);
      avg += omega(i, t) *
             manifold::exp_map_inverse(wi, l.row(k).transpose());
    }
    out.row(i) = manifold::exp_map(wi, avg).transpose();
  }
  return out;
}

Vec FlowOperator::apply(const Vec& v) const {
  const Eigen::Index j = labels();
  const Eigen::Index pixels = similarity_base.rows();
  Vec out(dim());
  for (Eigen::Index i = 0; i < pixels; ++i) {
    Vec acc = Vec::Zero(j);
    for (int t = 0; t < graph->patch_size(); ++t) {
      acc += omega(i, t) * v.segment(graph->neighbors(i, t) * j, j);
    }
    out.segment(i * j, j) =
        manifold::replicator(similarity_base.row(i).transpose(), acc);
  }
  return out;
}

Vec FlowOperator::apply_transpose(const Vec& u) const {
  const Eigen::Index j = labels();
  const Eigen::Index pixels = similarity_base.rows();
  Vec out = Vec::Zero(dim());
  for (Eigen::Index i = 0; i < pixels; ++i) {
    const Vec r =
        manifold::replicator(similarity_base.row(i).transpose(), u.segment(i * j, j));
    for (int t = 0; t < graph->patch_size(); ++t) {
      out.segment(graph->neighbors(i, t) * j, j) += omega(i, t) * r;
    }
  }
  return out;
}

LinearOperator FlowOperator::op() const {
  return LinearOperator{dim(), [this](const Vec& v) { return apply(v); }};
}

LinearOperator FlowOperator::op_transpose() const {
  return LinearOperator{dim(), [this](const Vec& v) { return apply_transpose(v); }};
}

FlowOperator build_flow_operator(const GridGraph& graph, const WeightField& omega,
                                 const DistanceField& d) {
  if (d.distances.rows() != graph.pixel_count()) {
    throw std::invalid_argument("build_flow_operator: distance field size mismatch");
  }
  FlowOperator op;
  op.graph = &graph;
  op.omega = omega;
  op.distances = d.distances;
  op.rho = d.rho;

  // At the barycenter the similarity field collapses to the lifted
  // patch-averaged data term S = lift(1_W, -(1/rho) Omega D).
  const Eigen::Index j = d.distances.cols();
  Mat averaged(graph.pixel_count(), j);
  for (Eigen::Index i = 0; i < averaged.rows(); ++i) {
    Vec acc = Vec::Zero(j);
    for (int t = 0; t < graph.patch_size(); ++t) {
      acc += omega(i, t) * d.distances.row(graph.neighbors(i, t)).transpose();
    }
    averaged.row(i) = acc.transpose();
  }
  const Mat w0 = manifold::barycenter_field(graph.pixel_count(), static_cast<int>(j));
  op.similarity_base = manifold::lift_rows(w0, -averaged / d.rho);
  op.b = vec_row(manifold::replicator_rows(w0, op.similarity_base));
  return op;
}

Mat solve_linearized(const FlowOperator& op, double t_end, int krylov_dim) {
  if (t_end <= 0.0) {
    throw std::invalid_argument("solve_linearized: need T > 0");
  }
  const Eigen::Index rows = op.similarity_base.rows();
  const Eigen::Index cols = op.labels();
  if (op.b.norm() == 0.0) {
    return Mat::Zero(rows, cols);
  }
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, op.dim()));
  const Vec v = phi_action(op.op(), op.b, t_end, m);
  return unvec_row(v, rows, cols);
}

Mat integrate_euler(const FlowOperator& op, double t_end, double step) {
  if (step <= 0.0) {
    throw std::invalid_argument("integrate_euler: need h > 0");
  }
  const auto steps = static_cast<long>(std::ceil(t_end / step - 1e-12));
  Vec v = Vec::Zero(op.dim());
  for (long k = 0; k < steps; ++k) {
    v += step * (op.apply(v) + op.b);
  }
  return unvec_row(v, op.similarity_base.rows(), op.labels());
}

Eigen::VectorXi lift_to_labeling(const Mat& v) {
  Eigen::VectorXi labels(v.rows());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    Eigen::Index best = 0;
    v.row(i).maxCoeff(&best);
    labels(i) = static_cast<int>(best);
  }
  return labels;
}

namespace {

double mean_entropy(const Mat& w) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double p = w(i, j);
      if (p > 0.0) h -= p * std::log(p);
    }
  }
  return h / static_cast<double>(w.rows());
}

}  // namespace

NonlinearResult integrate_nonlinear(const GridGraph& graph, const Mat& pixels,
                                    const Mat& label_colors,
                                    const WeightField& omega,
                                    const std::vector<double>& step_sizes,
                                    double rho, int krylov_dim,
                                    double entropy_eps) {
  return integrate_nonlinear(graph, distance_field(pixels, label_colors, rho),
                             omega, step_sizes, krylov_dim, entropy_eps);
}

NonlinearResult integrate_nonlinear(const GridGraph& graph,
                                    const DistanceField& d,
                                    const WeightField& omega,
                                    const std::vector<double>& step_sizes,
                                    int krylov_dim, double entropy_eps) {
  if (step_sizes.empty()) {
    throw std::invalid_argument("integrate_nonlinear: need at least one step");
  }
  const Eigen::Index labels = d.distances.cols();
  const Eigen::Index count = graph.pixel_count();

  NonlinearResult result;
  result.assignment = manifold::barycenter_field(count, static_cast<int>(labels));
  result.tangent = Mat::Zero(count, labels);

  for (double h : step_sizes) {
    // Re-linearize at the current assignment state.
    FlowOperator op;
    op.graph = &graph;
    op.omega = omega;
    op.distances = d.distances;
    op.rho = d.rho;
    const Mat l = likelihood(result.assignment, d);
    op.similarity_base = similarity(graph, result.assignment, l, omega);
    op.b = manifold::vec_row(manifold::project_tangent_rows(op.similarity_base));
    ++result.steps_taken;
    if (op.b.norm() > 0.0) {
      const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, op.dim()));
      const Vec dv = phi_action(op.op(), op.b, h, m);
      result.tangent += unvec_row(dv, count, labels);
    }
    const Mat w0 = manifold::barycenter_field(count, static_cast<int>(labels));
    result.assignment = manifold::exp_map_rows(w0, result.tangent);
    if (mean_entropy(result.assignment) < entropy_eps) break;
  }
  result.labels = lift_to_labeling(result.tangent);
  return result;
}

}  // namespace afflow
