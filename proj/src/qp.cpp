#include "myo/qp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace myo::qp {

namespace {

// Solve the equality-constrained subproblem
//   min 0.5 x^T H x + g^T x  s.t.  C x = d
// via the KKT system; returns x and multipliers nu (for C rows).
// Falls back to a least-squares solve when the KKT matrix is singular
// (redundant working constraints).
void solve_eqp(const MatX& H, const VecX& g, const MatX& C, const VecX& d, VecX& x, VecX& nu) {
  const int n = static_cast<int>(H.rows());
  const int m = static_cast<int>(C.rows());
  MatX K(n + m, n + m);
  K.setZero();
  K.topLeftCorner(n, n) = H;
  if (m > 0) {
    K.topRightCorner(n, m) = C.transpose();
    K.bottomLeftCorner(m, n) = C;
  }
  VecX rhs(n + m);
  rhs.head(n) = -g;
  if (m > 0) rhs.tail(m) = d;

  Eigen::FullPivLU<MatX> lu(K);
  VecX sol;
  if (lu.isInvertible()) {
    sol = lu.solve(rhs);
  } else {
    sol = K.completeOrthogonalDecomposition().solve(rhs);
  }
  x = sol.head(n);
  nu = m > 0 ? VecX(sol.tail(m)) : VecX();
}

}  // namespace

void append_box(Problem& p, const VecX& lower, const VecX& upper) {
  const int n = static_cast<int>(lower.size());
  require(upper.size() == n, "box bound dimension mismatch");
  require((lower.array() <= upper.array()).all(), "box bounds must satisfy lower <= upper");
  const int m0 = static_cast<int>(p.A_in.rows());
  MatX A(m0 + 2 * n, n);
  VecX b(m0 + 2 * n);
  if (m0 > 0) {
    A.topRows(m0) = p.A_in;
    b.head(m0) = p.b_in;
  }
  A.middleRows(m0, n) = MatX::Identity(n, n);
  b.segment(m0, n) = upper;
  A.middleRows(m0 + n, n) = -MatX::Identity(n, n);
  b.segment(m0 + n, n) = -lower;
  p.A_in = std::move(A);
  p.b_in = std::move(b);
}

Result solve(const Problem& p, const VecX& x0, int max_iterations) {
  const int n = static_cast<int>(p.H.rows());
  const int me = static_cast<int>(p.A_eq.rows());
  const int mi = static_cast<int>(p.A_in.rows());
  require(p.H.cols() == n && p.g.size() == n, "H/g dimension mismatch");
  require(me == 0 || p.A_eq.cols() == n, "A_eq dimension mismatch");
  require(mi == 0 || p.A_in.cols() == n, "A_in dimension mismatch");
  require(x0.size() == n, "x0 dimension mismatch");

  if (max_iterations <= 0) max_iterations = 100 + 20 * (n + me + mi);

  const double scale = std::max(1.0, p.H.cwiseAbs().maxCoeff());
  const double tol_mult = 1e-10 * scale;
  const double tol_step = 1e-12 * std::max(1.0, x0.cwiseAbs().maxCoeff());
  const double tol_act = 1e-10;

  VecX x = x0;
  std::vector<int> W;  // working inequality rows, kept sorted

  Result res;
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    // Assemble C = [A_eq; A_in rows in W].
    const int mw = static_cast<int>(W.size());
    MatX C(me + mw, n);
    VecX d(me + mw);
    if (me > 0) {
      C.topRows(me) = p.A_eq;
      d.head(me) = p.b_eq;
    }
    for (int k = 0; k < mw; ++k) {
      C.row(me + k) = p.A_in.row(W[k]);
      d[me + k] = p.b_in[W[k]];
    }

    VecX xs, nu;
    solve_eqp(p.H, p.g, C, d, xs, nu);
    VecX step = xs - x;

    if (step.lpNorm<Eigen::Infinity>() <= tol_step) {
      // At the EQP optimum: check working-set multipliers.
      int drop = -1;
      for (int k = 0; k < mw; ++k) {
        if (nu[me + k] < -tol_mult) {
          drop = k;
          break;  // lowest index leaves
        }
      }
      if (drop < 0) {
        res.x = xs;
        res.optimal = true;
        break;
      }
      W.erase(W.begin() + drop);
      continue;
    }

    // Ratio test against inequality rows not in the working set.
    double alpha = 1.0;
    int block = -1;
    for (int r = 0; r < mi; ++r) {
      if (std::binary_search(W.begin(), W.end(), r)) continue;
      double dir = p.A_in.row(r).dot(step);
      if (dir <= tol_act) continue;
      double room = p.b_in[r] - p.A_in.row(r).dot(x);
      double a = room / dir;
      if (a < alpha - 1e-14) {
        alpha = std::max(0.0, a);
        block = r;
      }
    }
    x += alpha * step;
    if (block >= 0) {
      W.insert(std::upper_bound(W.begin(), W.end(), block), block);
    } else {
      x = xs;  // full step, multiplier check next round
    }
  }
  if (!res.optimal) res.x = x;  // iteration cap: best effort

  // KKT residual: stationarity (with multipliers recovered by least squares
  // at the final working set) + primal feasibility.
  VecX grad = p.H * res.x + p.g;
  {
    const int mw = static_cast<int>(W.size());
    MatX C(me + mw, n);
    if (me > 0) C.topRows(me) = p.A_eq;
    for (int k = 0; k < mw; ++k) C.row(me + k) = p.A_in.row(W[k]);
    if (me + mw > 0) {
      VecX nu = C.transpose().completeOrthogonalDecomposition().solve(-grad);
      grad += C.transpose() * nu;
    }
  }
  double stat = grad.lpNorm<Eigen::Infinity>();
  double feas = 0.0;
  if (me > 0) feas = (p.A_eq * res.x - p.b_eq).lpNorm<Eigen::Infinity>();
  double ineq = 0.0;
  if (mi > 0) ineq = std::max(0.0, (p.A_in * res.x - p.b_in).maxCoeff());
  res.kkt_residual = std::max({stat, feas, ineq});
  res.active = W;
  return res;
}

}  // namespace myo::qp
