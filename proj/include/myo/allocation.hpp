#pragma once

#include "myo/types.hpp"

namespace myo {

// Tension allocation: find muscle tensions realizing a joint torque through
// tau = -G^T f, subject to per-muscle box bounds.
struct AllocationProblem {
  MatX G;      // M x N muscle Jacobian
  VecX tau;    // N, desired joint torque
  VecX f_min;  // M
  VecX f_max;  // M
  VecX w1;     // M, diagonal of W1 (> 0)
  VecX w2;     // N, diagonal of W2 (>= 0), relaxed form only

  int muscles() const { return static_cast<int>(G.rows()); }
  int joints() const { return static_cast<int>(G.cols()); }
  void check() const;

  static AllocationProblem with_defaults(const MatX& G, const VecX& tau, const VecX& f_min,
                                         const VecX& f_max);
};

struct AllocationResult {
  VecX f;
  bool feasible = true;      // exact form only: equality + box admits a point
  double torque_residual = 0.0;  // || G^T f + tau ||_inf
  double kkt_residual = 0.0;
};

// minimize f^T W1 f  s.t.  tau = -G^T f,  f_min <= f <= f_max.
// Infeasible problems are reported (feasible=false) with the least-squares
// fallback point attached; callers typically retry with allocate_relaxed.
AllocationResult allocate_exact(const AllocationProblem& p);

// minimize f^T W1 f + (G^T f + tau)^T W2 (G^T f + tau)  s.t. box only.
AllocationResult allocate_relaxed(const AllocationProblem& p);

}  // namespace myo
