#include "afflow/gradient.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "afflow/parallel.hpp"

namespace afflow {

using manifold::project_tangent;
using manifold::replicator;
using manifold::unvec_row;
using manifold::vec_row;

double loss_distance(const Mat& v, const Mat& vstar) {
  const double nv = v.norm();
  const double ns = vstar.norm();
  if (ns == 0.0) {
    throw std::invalid_argument("loss_distance: zero target");
  }
  if (nv == 0.0) return 1.0;  // orthogonal convention for the degenerate case
  const double inner = (v.array() * vstar.array()).sum();
  return 1.0 - inner / (ns * nv);
}

Mat loss_distance_grad(const Mat& v, const Mat& vstar) {
  const double nv = v.norm();
  const double ns = vstar.norm();
  if (nv == 0.0 || ns == 0.0) {
    throw std::invalid_argument("loss_distance_grad: zero norm");
  }
  const double inner = (v.array() * vstar.array()).sum();
  const Mat g = -vstar / (ns * nv) + (inner / (ns * nv * nv * nv)) * v;
  return manifold::project_tangent_rows(g);
}

namespace {

// Centered log of one weight patch, the tangent lift of the patch at the
// uniform base point.
Vec centered_log(const Vec& patch) {
  return project_tangent(patch.array().log().matrix());
}

}  // namespace

double regularizer(const WeightField& omega, double tau) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    sum += centered_log(omega.row(i).transpose()).squaredNorm();
  }
  return 0.5 * tau * sum;
}

Mat regularizer_grad(const WeightField& omega, double tau) {
  Mat g(omega.rows(), omega.cols());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    const Vec patch = omega.row(i).transpose();
    g.row(i) = (tau * centered_log(patch).cwiseQuotient(patch)).transpose();
  }
  return g;
}

Vec AugmentedOperator::apply(const Vec& x) const {
  const Eigen::Index n = flow->dim();
  Vec out(n + 1);
  out.head(n) = horizon * (flow->apply(x.head(n)) + flow->b * x(n));
  out(n) = 0.0;
  return out;
}

Vec AugmentedOperator::apply_transpose(const Vec& x) const {
  const Eigen::Index n = flow->dim();
  Vec out(n + 1);
  out.head(n) = horizon * flow->apply_transpose(x.head(n));
  out(n) = horizon * flow->b.dot(x.head(n));
  return out;
}

LinearOperator AugmentedOperator::op() const {
  return LinearOperator{dim(), [this](const Vec& x) { return apply(x); }};
}

LinearOperator AugmentedOperator::op_transpose() const {
  return LinearOperator{dim(), [this](const Vec& x) { return apply_transpose(x); }};
}

Vec assemble_b1(const FlowOperator& flow, const Vec& v_t, const Vec& g,
                double horizon, int krylov_dim) {
  if (g.norm() == 0.0) {
    throw std::invalid_argument("assemble_b1: stationary loss derivative");
  }
  const Eigen::Index n = flow.dim();
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, n));
  Vec b1(n + 1);
  b1.head(n) = expm_action(flow.op_transpose(), g, horizon, m);
  b1(n) = v_t.dot(g);
  return b1;
}

RankOneGradientFactors benzi_factors(const AugmentedOperator& aug, const Vec& b1,
                                     int krylov_dim) {
  if (b1.size() != aug.dim()) {
    throw std::invalid_argument("benzi_factors: b1 size mismatch");
  }
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, aug.dim()));

  // Krylov bases for -A^T with b1 and for A with the last unit vector.
  const LinearOperator neg_at{
      aug.dim(), [&aug](const Vec& x) -> Vec { return -aug.apply_transpose(x); }};
  const auto left = arnoldi(neg_at, b1, m);

  Vec e_last = Vec::Zero(aug.dim());
  e_last(aug.dim() - 1) = 1.0;
  const auto right = arnoldi(aug.op(), e_last, m);

  // phi of the small Kronecker sum, reshaped to m1 x m2 and decomposed.
  const Mat ks = kronecker_sum(left.hessenberg, right.hessenberg);
  const Vec phi_core = phi_dense(ks).phi_e1;
  const Mat core = unvec_row(phi_core, left.m_eff, right.m_eff);

  Eigen::JacobiSVD<Mat> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);

  RankOneGradientFactors out;
  out.c = b1.norm();
  const Eigen::Index rank = svd.singularValues().size();
  out.full_svd.reserve(rank);
  for (Eigen::Index r = 0; r < rank; ++r) {
    SvdComponent comp;
    comp.sigma = svd.singularValues()(r);
    comp.u = left.basis * svd.matrixU().col(r);
    comp.w = right.basis * svd.matrixV().col(r);
    out.full_svd.push_back(std::move(comp));
  }
  out.sigma1 = out.full_svd.front().sigma;
  out.u = out.full_svd.front().u;
  out.w = out.full_svd.front().w;
  return out;
}

Mat df1_transpose(const FlowOperator& flow, const Mat& z) {
  const GridGraph& graph = *flow.graph;
  const Eigen::Index pixels = flow.similarity_base.rows();
  if (z.rows() != pixels || z.cols() != flow.labels()) {
    throw std::invalid_argument("df1_transpose: field shape mismatch");
  }
  Mat grad(pixels, graph.patch_size());
  const double inv_rho = 1.0 / flow.rho;
  for (Eigen::Index i = 0; i < pixels; ++i) {
    const Vec rz_i =
        replicator(flow.similarity_base.row(i).transpose(), z.row(i).transpose());
    for (int t = 0; t < graph.patch_size(); ++t) {
      grad(i, t) = -inv_rho * flow.distances.row(graph.neighbors(i, t)).dot(rz_i);
    }
  }
  return grad;
}

Mat df2_transpose(const FlowOperator& flow, const Mat& z) {
  // R at the barycenter is the tangent projection scaled by 1/|J|; the
  // replicator inside df1^T annihilates the projected-away constant.
  return df1_transpose(flow, Mat(z / static_cast<double>(flow.labels())));
}

Mat df3_transpose_rank_one(const FlowOperator& flow, const Vec& a, const Vec& z) {
  const GridGraph& graph = *flow.graph;
  const Eigen::Index labels = flow.labels();
  const Eigen::Index pixels = flow.similarity_base.rows();
  const int patch = graph.patch_size();
  if (a.size() != flow.dim() || z.size() != flow.dim()) {
    throw std::invalid_argument("df3_transpose_rank_one: size mismatch");
  }

  // forward-gathered right factor: zbar_i = sum_t omega(i,t) z_{nbr(i,t)}
  Mat zbar = Mat::Zero(pixels, labels);
  for (Eigen::Index i = 0; i < pixels; ++i) {
    for (int t = 0; t < patch; ++t) {
      zbar.row(i) += flow.omega(i, t) *
                     z.segment(graph.neighbors(i, t) * labels, labels).transpose();
    }
  }

  Mat grad(pixels, patch);
  const double inv_rho = 1.0 / flow.rho;
  parallel_for(0, pixels, [&](Eigen::Index i) {
    const Vec s_i = flow.similarity_base.row(i).transpose();
    const Vec a_i = a.segment(i * labels, labels);
    const Vec zb_i = zbar.row(i).transpose();

    const Vec ra_i = replicator(s_i, a_i);
    // adjoint of the replicator differential at the base state
    const Vec h_i =
        a_i.cwiseProduct(zb_i) - s_i.dot(zb_i) * a_i - s_i.dot(a_i) * zb_i;
    const Vec rh_i = replicator(s_i, h_i);

    for (int t = 0; t < patch; ++t) {
      const Eigen::Index k = graph.neighbors(i, t);
      grad(i, t) = ra_i.dot(z.segment(k * labels, labels)) -
                   inv_rho * flow.distances.row(k).dot(rh_i);
    }
  });
  return grad;
}

Mat apply_da_transpose(const FlowOperator& flow, double horizon,
                       const RankOneGradientFactors& factors, int rank) {
  const Eigen::Index n = flow.dim();
  Mat grad = Mat::Zero(flow.similarity_base.rows(), flow.graph->patch_size());
  const auto count =
      rank <= 0 ? static_cast<Eigen::Index>(factors.full_svd.size())
                : std::min<Eigen::Index>(
                      rank, static_cast<Eigen::Index>(factors.full_svd.size()));
  for (Eigen::Index r = 0; r < count; ++r) {
    const auto& comp = factors.full_svd[r];
    const double scale = factors.c * comp.sigma * horizon;
    if (scale == 0.0) continue;
    const Vec a = comp.u.head(n);
    grad += scale * df3_transpose_rank_one(flow, a, comp.w.head(n));
    grad += scale * comp.w(n) *
            df2_transpose(flow, unvec_row(a, flow.similarity_base.rows(),
                                          flow.labels()));
  }
  return grad;
}

Mat second_summand_grad(const FlowOperator& flow, const Vec& g, double horizon,
                        int krylov_dim) {
  if (g.norm() == 0.0) {
    return Mat::Zero(flow.similarity_base.rows(), flow.graph->patch_size());
  }
  const int m = static_cast<int>(std::min<Eigen::Index>(krylov_dim, flow.dim()));
  const Vec q = phi_action(flow.op_transpose(), g, horizon, m);
  return df2_transpose(flow,
                       unvec_row(q, flow.similarity_base.rows(), flow.labels()));
}

Mat riemannian_gradient(const Mat& euclidean, const WeightField& omega) {
  if (euclidean.rows() != omega.rows() || euclidean.cols() != omega.cols()) {
    throw std::invalid_argument("riemannian_gradient: shape mismatch");
  }
  Mat out(omega.rows(), omega.cols());
  for (Eigen::Index i = 0; i < omega.rows(); ++i) {
    out.row(i) =
        replicator(omega.row(i).transpose(), euclidean.row(i).transpose()).transpose();
  }
  return out;
}

ParameterGradient full_gradient(const FlowOperator& flow, const Mat& vstar,
                                const GradientOptions& opt) {
  ParameterGradient result;
  const Mat v_t = solve_linearized(flow, opt.horizon, opt.krylov_dim);
  result.tangent_solution = v_t;
  result.data_loss = loss_distance(v_t, vstar);
  result.loss = result.data_loss + regularizer(flow.omega, opt.tau);

  Mat g;
  if (v_t.norm() == 0.0) {
    result.degenerate = true;
  } else {
    g = loss_distance_grad(v_t, vstar);
    if (g.norm() == 0.0) result.degenerate = true;
  }

  if (result.degenerate) {
    result.euclidean = regularizer_grad(flow.omega, opt.tau);
    result.riemannian = riemannian_gradient(result.euclidean, flow.omega);
    return result;
  }

  const Vec gvec = vec_row(g);
  const Vec vvec = vec_row(v_t);
  const Vec b1 = assemble_b1(flow, vvec, gvec, opt.horizon, opt.krylov_dim);

  AugmentedOperator aug{&flow, opt.horizon};
  const auto factors = benzi_factors(aug, b1, opt.krylov_dim);
  result.sigma1 = factors.sigma1;
  result.sigma_ratio = factors.sigma_ratio();

  int rank = 1;
  if (opt.rank_mode == RankMode::kRankR) rank = std::max(1, opt.rank);
  if (opt.rank_mode == RankMode::kFullM) rank = 0;

  result.euclidean = apply_da_transpose(flow, opt.horizon, factors, rank);
  if (opt.include_second_summand) {
    result.euclidean +=
        second_summand_grad(flow, gvec, opt.horizon, opt.krylov_dim);
  }
  result.euclidean += regularizer_grad(flow.omega, opt.tau);
  result.riemannian = riemannian_gradient(result.euclidean, flow.omega);
  return result;
}

double euler_loss(const GridGraph& graph, const Mat& pixels,
                  const Mat& label_colors, const WeightField& omega,
                  const Mat& vstar, double horizon, double tau, double rho,
                  double euler_step) {
  const auto d = distance_field(pixels, label_colors, rho);
  const auto op = build_flow_operator(graph, omega, d);
  const Mat v = integrate_euler(op, horizon, euler_step);
  return loss_distance(v, vstar) + regularizer(omega, tau);
}

Mat fd_gradient_oracle(const GridGraph& graph, const Mat& pixels,
                       const Mat& label_colors, const WeightField& omega,
                       const Mat& vstar, double horizon, double tau, double rho,
                       double fd_step, double euler_step) {
  const Eigen::Index budget = omega.size();
  if (budget > 10000) {
    throw std::invalid_argument("fd_gradient_oracle: instance too large");
  }
  const int patch = graph.patch_size();
  Mat grad(omega.rows(), omega.cols());
  parallel_for(0, omega.rows(), [&](Eigen::Index i) {
    for (int t = 0; t < patch; ++t) {
      // simplex-tangent coordinate direction at patch position t
      Vec dir = Vec::Constant(patch, -1.0 / patch);
      dir(t) += 1.0;
      WeightField plus = omega;
      WeightField minus = omega;
      plus.row(i) += fd_step * dir.transpose();
      minus.row(i) -= fd_step * dir.transpose();
      const double lp = euler_loss(graph, pixels, label_colors, plus, vstar,
                                   horizon, tau, rho, euler_step);
      const double lm = euler_loss(graph, pixels, label_colors, minus, vstar,
                                   horizon, tau, rho, euler_step);
      grad(i, t) = (lp - lm) / (2.0 * fd_step);
    }
  });
  return grad;
}

}  // namespace afflow
