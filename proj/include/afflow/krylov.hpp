// Matrix-free Krylov approximation of matrix-exponential and phi-function
// actions, plus the dense small-matrix kernels they reduce to.
#pragma once

#include <functional>

#include <Eigen/Core>

#include "afflow/manifold.hpp"

namespace afflow {

// A matrix-free linear map on R^dim. apply must be linear and safe to
// invoke concurrently.
struct LinearOperator {
  Eigen::Index dim = 0;
  std::function<Vec(const Vec&)> apply;

  static LinearOperator from_dense(const Mat& m);
};

// Result of the Arnoldi iteration: basis is n x m_eff with orthonormal
// columns, hessenberg is the m_eff x m_eff projected operator and beta
// the norm of the start vector. m_eff < m signals a happy breakdown.
struct KrylovDecomposition {
  Mat basis;
  Mat hessenberg;
  double beta = 0.0;
  Eigen::Index m_eff = 0;
};

/// Arnoldi with modified Gram-Schmidt and one reorthogonalization pass.
/// Stops early when the next residual norm falls below breakdown_tol
/// (default 1e-12 * ||b||). Throws on b = 0.
KrylovDecomposition arnoldi(const LinearOperator& op, const Vec& b, int m,
                            double breakdown_tol = -1.0);

/// Dense matrix exponential by scaling and squaring with the degree-13
/// diagonal Pade approximant.
Mat expm_dense(const Mat& m);

struct PhiResult {
  Mat expm;     // expm(M)
  Vec phi_e1;   // phi(M) e_1
};

/// expm(M) and phi(M) e_1 in one shot, read off the exponential of the
/// augmented matrix [[M, e1], [0, 0]].
PhiResult phi_dense(const Mat& m);

/// phi(M) v for a dense M via the same augmentation with v in place of e_1.
Vec phi_apply_dense(const Mat& m, const Vec& v);

/// Krylov approximation of t * phi(t A) b.
Vec phi_action(const LinearOperator& op, const Vec& b, double t, int m);

/// Krylov approximation of expm(t A) b.
Vec expm_action(const LinearOperator& op, const Vec& b, double t, int m);

/// Directional differential of the matrix exponential at X in direction Y,
/// evaluated densely. Test utility for validating gradient assembly.
Mat dexpm_dense(const Mat& x, const Mat& y);

/// Kronecker sum A (+) B = A ox I + I ox B for dense matrices.
Mat kronecker_sum(const Mat& a, const Mat& b);

}  // namespace afflow
