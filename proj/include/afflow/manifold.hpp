// Elementary Fisher-Rao geometry on the open probability simplex and on
// row-wise products of simplices (assignment fields).
#pragma once

#include <Eigen/Core>

namespace afflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace manifold {

// Entries of simplex points are kept at or above this floor after any
// lifting so that subsequent log-domain operations stay finite.
inline constexpr double kSimplexFloor = 1e-12;

/// Orthogonal projection onto the zero-sum tangent space: z - mean(z).
Vec project_tangent(const Vec& z);

/// Replicator map R_p z = p.*z - p <p,z>. Output sums to zero.
Vec replicator(const Vec& p, const Vec& z);

/// Lifting map exp_p(z) = p.*e^z / <p, e^z>, evaluated in shifted
/// log-domain. Invariant under z -> z + const.
Vec lift(const Vec& p, const Vec& z);

/// Inverse of the lifting map restricted to the tangent space:
/// lift_inverse(p, q) = project_tangent(log q - log p).
Vec lift_inverse(const Vec& p, const Vec& q);

/// Exponential-type retraction Exp_p(v) = p.*e^(v/p) / <p, e^(v/p)>
/// for tangent vectors v.
Vec exp_map(const Vec& p, const Vec& v);

/// Left inverse of exp_map: Exp_p^{-1}(q) = R_p log(q/p).
Vec exp_map_inverse(const Vec& p, const Vec& q);

/// Uniform distribution over c states.
Vec barycenter(int c);

// Row-wise forms acting on |I| x |J| fields. Row i of the output is the
// pointwise operation applied to row i of the inputs.
Mat project_tangent_rows(const Mat& z);
Mat replicator_rows(const Mat& base, const Mat& z);
Mat lift_rows(const Mat& base, const Mat& z);
Mat lift_inverse_rows(const Mat& base, const Mat& q);
Mat exp_map_rows(const Mat& base, const Mat& v);
Mat exp_map_inverse_rows(const Mat& base, const Mat& q);
Mat barycenter_field(Eigen::Index rows, int c);

/// Row-stacking vectorization of a matrix and its inverse.
Vec vec_row(const Mat& m);
Mat unvec_row(const Vec& v, Eigen::Index rows, Eigen::Index cols);

bool is_simplex_point(const Vec& p, double tol = 1e-12);
bool is_tangent(const Vec& v, double tol = 1e-12);
bool is_assignment_state(const Mat& w, double tol = 1e-12);
bool is_tangent_field(const Mat& v, double tol = 1e-12);

}  // namespace manifold
}  // namespace afflow
