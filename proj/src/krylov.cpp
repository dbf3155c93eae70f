#include "afflow/krylov.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace afflow {

LinearOperator LinearOperator::from_dense(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("LinearOperator::from_dense: matrix not square");
  }
  return LinearOperator{m.rows(), [m](const Vec& x) -> Vec { return m * x; }};
}

KrylovDecomposition arnoldi(const LinearOperator& op, const Vec& b, int m,
                            double breakdown_tol) {
  if (b.size() != op.dim) {
    throw std::invalid_argument("arnoldi: vector size does not match operator");
  }
  const double beta = b.norm();
  if (beta == 0.0) {
    throw std::domain_error("arnoldi: start vector is zero");
  }
  if (m < 1 || m > op.dim) {
    throw std::invalid_argument("arnoldi: need 1 <= m <= dim");
  }
  if (breakdown_tol < 0.0) breakdown_tol = 1e-12 * beta;

  Mat basis(op.dim, m);
  Mat h = Mat::Zero(m, m);
  basis.col(0) = b / beta;

  Eigen::Index m_eff = m;
  for (int j = 0; j < m; ++j) {
    Vec w = op.apply(basis.col(j));
    for (int i = 0; i <= j; ++i) {
      const double hij = basis.col(i).dot(w);
      h(i, j) += hij;
      w -= hij * basis.col(i);
    }
    // one reorthogonalization pass to recover orthogonality lost in MGS
    for (int i = 0; i <= j; ++i) {
      const double c = basis.col(i).dot(w);
      h(i, j) += c;
      w -= c * basis.col(i);
    }
    const double res = w.norm();
    if (res < breakdown_tol) {
      m_eff = j + 1;
      break;
    }
    if (j + 1 < m) {
      h(j + 1, j) = res;
      basis.col(j + 1) = w / res;
    }
  }

  KrylovDecomposition dec;
  dec.basis = basis.leftCols(m_eff);
  dec.hessenberg = h.topLeftCorner(m_eff, m_eff);
  dec.beta = beta;
  dec.m_eff = m_eff;
  return dec;
}

Mat expm_dense(const Mat& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("expm_dense: matrix not square");
  }
  if (!m.allFinite()) {
    throw std::invalid_argument("expm_dense: non-finite entries");
  }
  const Eigen::Index k = m.rows();
  const Mat id = Mat::Identity(k, k);

  // degree-13 Pade coefficients and scaling threshold theta_13
  static const double kTheta13 = 5.371920351148152;
  static const double c[] = {64764752532480000.0, 32382376266240000.0,
                             7771770303897600.0,  1187353796428800.0,
                             129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,
                             1323241920.0,        40840800.0,
                             960960.0,            16380.0,
                             182.0,               1.0};

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  }
  const Mat a = m / std::ldexp(1.0, squarings);

  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u = a * (a6 * (c[13] * a6 + c[11] * a4 + c[9] * a2) + c[7] * a6 +
                     c[5] * a4 + c[3] * a2 + c[1] * id);
  const Mat v = a6 * (c[12] * a6 + c[10] * a4 + c[8] * a2) + c[6] * a6 +
                c[4] * a4 + c[2] * a2 + c[0] * id;

  Mat r = (v - u).partialPivLu().solve(v + u);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

PhiResult phi_dense(const Mat& m) {
  const Eigen::Index k = m.rows();
  Mat aug = Mat::Zero(k + 1, k + 1);
  aug.topLeftCorner(k, k) = m;
  aug(0, k) = 1.0;
  const Mat e = expm_dense(aug);
  PhiResult out;
  out.expm = e.topLeftCorner(k, k);
  out.phi_e1 = e.topRightCorner(k, 1);
  return out;
}

Vec phi_apply_dense(const Mat& m, const Vec& v) {
  const Eigen::Index k = m.rows();
  if (v.size() != k) {
    throw std::invalid_argument("phi_apply_dense: size mismatch");
  }
  Mat aug = Mat::Zero(k + 1, k + 1);
  aug.topLeftCorner(k, k) = m;
  aug.topRightCorner(k, 1) = v;
  return expm_dense(aug).topRightCorner(k, 1);
}

Vec phi_action(const LinearOperator& op, const Vec& b, double t, int m) {
  const auto dec = arnoldi(op, b, m);
  const Vec y = phi_dense(t * dec.hessenberg).phi_e1;
  return t * dec.beta * (dec.basis * y);
}

Vec expm_action(const LinearOperator& op, const Vec& b, double t, int m) {
  const auto dec = arnoldi(op, b, m);
  const Mat e = expm_dense(t * dec.hessenberg);
  return dec.beta * (dec.basis * e.col(0));
}

Mat kronecker_sum(const Mat& a, const Mat& b) {
  const Eigen::Index p = a.rows();
  const Eigen::Index q = b.rows();
  Mat out = Mat::Zero(p * q, p * q);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (a(i, j) != 0.0) {
        out.block(i * q, j * q, q, q).diagonal().array() += a(i, j);
      }
    }
    out.block(i * q, i * q, q, q) += b;
  }
  return out;
}

Mat dexpm_dense(const Mat& x, const Mat& y) {
  if (x.rows() != x.cols() || y.rows() != y.cols() || x.rows() != y.rows()) {
    throw std::invalid_argument("dexpm_dense: size mismatch");
  }
  // vec_r(dexpm(X) Y) = (expm(X) ox I) phi(-X (+) X^T) vec_r(Y)
  const Mat ks = kronecker_sum(-x, x.transpose());
  const Vec w = phi_apply_dense(ks, manifold::vec_row(y));
  return expm_dense(x) * manifold::unvec_row(w, x.rows(), x.cols());
}

}  // namespace afflow
