#pragma once

#include "myo/types.hpp"

namespace myo::qp {

// minimize   0.5 x^T H x + g^T x
// subject to A_eq x  = b_eq
//            A_in x <= b_in
//
// Dense primal active-set solver for small strictly convex problems.
// Pivoting is deterministic: among blocking rows the lowest index enters the
// working set, among negative multipliers the lowest index leaves.
struct Problem {
  MatX H;
  VecX g;
  MatX A_eq;  // may be 0 x n
  VecX b_eq;
  MatX A_in;  // may be 0 x n
  VecX b_in;
};

struct Result {
  VecX x;
  bool optimal = false;
  double kkt_residual = 0.0;  // max of stationarity, equality and bound violation
  int iterations = 0;
  std::vector<int> active;    // working inequality rows at exit
};

// x0 must satisfy A_in x0 <= b_in (+ slack tolerance) and A_eq x0 ~= b_eq.
Result solve(const Problem& p, const VecX& x0, int max_iterations = 0);

// Convenience: box rows l <= x <= u appended to A_in.
void append_box(Problem& p, const VecX& lower, const VecX& upper);

}  // namespace myo::qp
