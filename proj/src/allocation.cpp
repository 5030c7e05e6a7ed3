#include "myo/allocation.hpp"

#include "myo/qp.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace myo {

void AllocationProblem::check() const {
  const int m = muscles();
  const int n = joints();
  require(m > 0 && n > 0, "allocation problem is empty");
  require(tau.size() == n, "tau dimension mismatch");
  require(f_min.size() == m && f_max.size() == m, "bound dimension mismatch");
  require((f_min.array() <= f_max.array()).all(), "f_min must not exceed f_max");
  require(w1.size() == m, "w1 dimension mismatch");
  require((w1.array() > 0.0).all(), "W1 diagonal must be positive");
  require(w2.size() == 0 || w2.size() == n, "w2 dimension mismatch");
  if (w2.size() == n) require((w2.array() >= 0.0).all(), "W2 diagonal must be non-negative");
}

AllocationProblem AllocationProblem::with_defaults(const MatX& G, const VecX& tau,
                                                   const VecX& f_min, const VecX& f_max) {
  AllocationProblem p;
  p.G = G;
  p.tau = tau;
  p.f_min = f_min;
  p.f_max = f_max;
  p.w1 = VecX::Ones(G.rows());
  p.w2 = VecX::Constant(G.cols(), 1e4);
  return p;
}

namespace {

// Relaxed objective as 0.5 x^T H x + g^T x (factor 2 absorbed).
void relaxed_matrices(const AllocationProblem& p, MatX& H, VecX& g) {
  const int m = p.muscles();
  H = 2.0 * MatX(p.w1.asDiagonal());
  if (p.w2.size() > 0 && p.w2.maxCoeff() > 0.0) {
    H += 2.0 * p.G * p.w2.asDiagonal() * p.G.transpose();
    g = 2.0 * p.G * (p.w2.asDiagonal() * p.tau);
  } else {
    g = VecX::Zero(m);
  }
}

VecX clamp_box(const VecX& x, const VecX& lo, const VecX& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

AllocationResult allocate_relaxed(const AllocationProblem& p) {
  p.check();
  qp::Problem q;
  relaxed_matrices(p, q.H, q.g);
  qp::append_box(q, p.f_min, p.f_max);
  VecX x0 = clamp_box(VecX::Zero(p.muscles()), p.f_min, p.f_max);
  auto r = qp::solve(q, x0);

  AllocationResult out;
  out.f = r.x;
  out.kkt_residual = r.kkt_residual;
  out.torque_residual = (p.G.transpose() * out.f + p.tau).lpNorm<Eigen::Infinity>();
  return out;
}

AllocationResult allocate_exact(const AllocationProblem& p) {
  p.check();
  const int m = p.muscles();

  // Phase 1: minimal torque residual over the box decides feasibility.
  AllocationProblem ls = p;
  ls.w1 = VecX::Constant(m, 1e-18 * std::max(1.0, p.G.squaredNorm()));
  ls.w2 = VecX::Ones(p.joints());
  AllocationResult phase1 = allocate_relaxed(ls);
  const double feas_tol = 1e-6 * (1.0 + p.tau.lpNorm<Eigen::Infinity>());
  if (phase1.torque_residual > feas_tol) {
    AllocationResult out;
    out.f = phase1.f;
    out.feasible = false;
    out.torque_residual = phase1.torque_residual;
    out.kkt_residual = phase1.kkt_residual;
    return out;
  }

  // Phase 2: exact QP with the equality constraint, warm-started from the
  // phase-1 point projected onto the equality manifold.
  VecX f0 = phase1.f;
  {
    VecX resid = p.G.transpose() * f0 + p.tau;  // want -G^T f = tau
    MatX Gt = p.G.transpose();
    VecX corr = Gt.completeOrthogonalDecomposition().solve(resid);
    f0 = clamp_box(f0 - corr, p.f_min, p.f_max);
  }
  qp::Problem q;
  q.H = 2.0 * MatX(p.w1.asDiagonal());
  q.g = VecX::Zero(m);
  q.A_eq = -p.G.transpose();
  q.b_eq = p.tau;
  qp::append_box(q, p.f_min, p.f_max);
  auto r = qp::solve(q, f0);

  AllocationResult out;
  out.f = r.x;
  out.kkt_residual = r.kkt_residual;
  out.torque_residual = (p.G.transpose() * r.x + p.tau).lpNorm<Eigen::Infinity>();
  out.feasible = out.torque_residual <= feas_tol;
  return out;
}

}  // namespace myo
