// Dense reference implementations used only by the test suites. Everything
// here materializes the full matrices the library deliberately avoids, so it
// stays independent of the matrix-free code paths it checks.
#pragma once

#include <random>

#include "afflow/flow.hpp"
#include "afflow/gradient.hpp"

namespace afflow::oracle {

// Dense |I| x |I| weight matrix, accumulating duplicate neighbors of small
// wrapped grids.
Mat dense_omega(const GridGraph& graph, const WeightField& omega);

// Patch-pattern direction (|I| x |N|) accumulated into a dense |I| x |I|
// matrix the forward differentials act on.
Mat dense_direction(const GridGraph& graph, const Mat& patch_direction);

// Dense materialization of the flow operator A and the augmented matrix
// [[T A, T b], [0, 0]].
Mat dense_flow_matrix(const FlowOperator& flow);
Mat dense_augmented(const FlowOperator& flow, double horizon);

// Forward differentials of the gradient chain, evaluated densely for a
// dense direction Y.
Mat dense_df1(const FlowOperator& flow, const Mat& y);   // |I| x |J|
Vec dense_df2(const FlowOperator& flow, const Mat& y);   // n
Mat dense_df3(const FlowOperator& flow, const Mat& y);   // n x n
Mat dense_daug(const FlowOperator& flow, double horizon, const Mat& y);

// Exact v(T) from the exponential of the dense augmented matrix.
Vec dense_flow_solution(const FlowOperator& flow, double horizon);

// phi(M) v for a dense matrix (augmented-column evaluation); re-exported
// here so test files read uniformly.
Vec dense_phi_apply(const Mat& m, const Vec& v);

// Random points with the invariants the library expects.
Vec random_simplex(int dim, std::mt19937_64& rng);
Vec random_tangent(int dim, std::mt19937_64& rng);
Mat random_patch_tangent_field(const GridGraph& graph, std::mt19937_64& rng);
WeightField random_weights(const GridGraph& graph, std::mt19937_64& rng);

// Cosine of the angle between two vectors; 1 when both vanish.
double cosine(const Vec& a, const Vec& b);

}  // namespace afflow::oracle
