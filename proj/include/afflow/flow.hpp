// Linearized assignment flow: data terms, neighborhood coupling, the
// matrix-free flow operator and its integrators.
#pragma once

#include <Eigen/Core>

#include "afflow/grid.hpp"
#include "afflow/krylov.hpp"
#include "afflow/manifold.hpp"

namespace afflow {

struct DistanceField {
  Mat distances;  // |I| x |J|, D(i, j) = d(f_i, l_j)
  double rho = 1.0;
};

/// Euclidean distances between pixel features and label colors.
/// pixels is |I| x C, labels |J| x C.
DistanceField distance_field(const Mat& pixels, const Mat& labels, double rho);

/// Alternative data term: distance between the patch window around each
/// pixel and the label color tiled across the window.
DistanceField distance_field_patch(const GridGraph& graph, const Mat& pixels,
                                   const Mat& labels, double rho);

/// Row-wise data lifting L_i = lift(W_i, -D_i / rho).
Mat likelihood(const Mat& w, const DistanceField& d);

/// Geometric neighborhood averaging
/// S_i = exp_map(W_i, sum_t omega(i,t) exp_map_inverse(W_i, L_{nbr(i,t)})).
Mat similarity(const GridGraph& graph, const Mat& w, const Mat& l,
               const WeightField& omega);

// The linear tangent-space flow v' = A v + b assembled at a base state.
// A applies blockwise: (A v)_i = R_{S_i} sum_t omega(i,t) v_{nbr(i,t)}.
struct FlowOperator {
  const GridGraph* graph = nullptr;
  WeightField omega;
  Mat similarity_base;  // S at the linearization point, |I| x |J|
  Mat distances;        // copy of the data term used to build the operator
  double rho = 1.0;
  Vec b;                // row-stacked constant term

  Eigen::Index labels() const { return similarity_base.cols(); }
  Eigen::Index dim() const { return similarity_base.size(); }

  Vec apply(const Vec& v) const;
  Vec apply_transpose(const Vec& u) const;

  LinearOperator op() const;
  LinearOperator op_transpose() const;
};

/// Flow operator linearized at the barycenter: S = lift(1_W, -(1/rho) Omega D)
/// and b = vec(R_{W0} S).
FlowOperator build_flow_operator(const GridGraph& graph, const WeightField& omega,
                                 const DistanceField& d);

/// Tangent solution V(T) = T phi(T A) b via the Krylov approximation.
/// A zero data term yields the zero field.
Mat solve_linearized(const FlowOperator& op, double t_end, int krylov_dim);

/// Explicit Euler baseline v <- v + h (A v + b) from v(0) = 0.
Mat integrate_euler(const FlowOperator& op, double t_end, double step);

/// Per-pixel argmax labeling; ties resolve to the smallest label index.
Eigen::VectorXi lift_to_labeling(const Mat& v);

struct NonlinearResult {
  Mat assignment;        // W after the final step
  Mat tangent;           // accumulated V
  Eigen::VectorXi labels;
  int steps_taken = 0;
};

/// Iterated linearized flows approximating the nonlinear assignment flow:
/// repeated re-linearization at the current state with tangent accumulation.
/// Stops early when the mean assignment entropy drops below entropy_eps.
NonlinearResult integrate_nonlinear(const GridGraph& graph,
                                    const DistanceField& d,
                                    const WeightField& omega,
                                    const std::vector<double>& step_sizes,
                                    int krylov_dim, double entropy_eps);
NonlinearResult integrate_nonlinear(const GridGraph& graph, const Mat& pixels,
                                    const Mat& label_colors,
                                    const WeightField& omega,
                                    const std::vector<double>& step_sizes,
                                    double rho, int krylov_dim,
                                    double entropy_eps);

}  // namespace afflow
