// Deterministic chunked parallel loop. Callers must write to disjoint
// locations; reductions stay with the caller.
#pragma once

#include <functional>

#include <Eigen/Core>

namespace afflow {

/// Global worker count. Defaults to 1; AFFLOW_THREADS overrides, and the
/// CLI forwards its --threads flag here.
int thread_count();
void set_thread_count(int threads);

void parallel_for(Eigen::Index begin, Eigen::Index end,
                  const std::function<void(Eigen::Index)>& body);

}  // namespace afflow
