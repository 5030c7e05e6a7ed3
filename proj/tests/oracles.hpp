#pragma once

#include "myo/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

// Independent reference implementations used to freeze expected values.
// Nothing here may call into the solvers under test.
namespace oracles {

using myo::MatX;
using myo::Vec3;
using myo::VecX;

// --- tension-allocation oracles ---------------------------------------------

struct BoxQpOracleResult {
  VecX f;
  bool feasible = true;
  double objective = 0.0;
};

// Brute-force multilevel grid minimization of a callable objective over the
// box [lo, hi]^M, refined around the running argmin. Resolution after the
// final level is far below 1e-3 N for the fixtures used.
template <typename F>
BoxQpOracleResult grid_minimize_box(const F& objective, const VecX& lo, const VecX& hi,
                                    int pts_per_dim = 25, int levels = 6) {
  const int dim = static_cast<int>(lo.size());
  VecX cur_lo = lo, cur_hi = hi;
  VecX best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int level = 0; level < levels; ++level) {
    std::vector<int> idx(dim, 0);
    VecX pt(dim);
    while (true) {
      for (int d = 0; d < dim; ++d) {
        double t = pts_per_dim == 1 ? 0.5 : static_cast<double>(idx[d]) / (pts_per_dim - 1);
        pt[d] = cur_lo[d] + t * (cur_hi[d] - cur_lo[d]);
      }
      double o = objective(pt);
      if (o < best_obj) {
        best_obj = o;
        best = pt;
      }
      int d = 0;
      while (d < dim && ++idx[d] == pts_per_dim) idx[d++] = 0;
      if (d == dim) break;
    }
    // shrink around the best point, clamped to the original box
    VecX span = (cur_hi - cur_lo) * (2.5 / (pts_per_dim - 1));
    for (int d = 0; d < dim; ++d) {
      cur_lo[d] = std::max(lo[d], best[d] - span[d]);
      cur_hi[d] = std::min(hi[d], best[d] + span[d]);
    }
  }
  return {best, true, best_obj};
}

// Relaxed allocation objective f^T W1 f + (G^T f + tau)^T W2 (G^T f + tau).
inline BoxQpOracleResult relaxed_oracle(const MatX& G, const VecX& tau, const VecX& f_min,
                                        const VecX& f_max, const VecX& w1, const VecX& w2) {
  auto obj = [&](const VecX& f) {
    VecX r = G.transpose() * f + tau;
    return f.dot(w1.cwiseProduct(f)) + r.dot(w2.cwiseProduct(r));
  };
  return grid_minimize_box(obj, f_min, f_max);
}

// Exact allocation via a nullspace grid: f = f_p + Z t with the equality
// -G^T f = tau eliminated, minimizing f^T W1 f over box-feasible grid points.
inline BoxQpOracleResult exact_oracle(const MatX& G, const VecX& tau, const VecX& f_min,
                                      const VecX& f_max, const VecX& w1) {
  const int m = static_cast<int>(G.rows());
  MatX A = -G.transpose();  // A f = tau
  Eigen::CompleteOrthogonalDecomposition<MatX> cod(A);
  VecX f_p = cod.solve(tau);
  Eigen::FullPivLU<MatX> lu(A);
  MatX Z = lu.kernel();  // m x k
  const int k = static_cast<int>(Z.cols());
  for (int c = 0; c < k; ++c) Z.col(c).normalize();

  if ((A * f_p - tau).lpNorm<Eigen::Infinity>() > 1e-6 * (1.0 + tau.lpNorm<Eigen::Infinity>()))
    return {VecX::Zero(m), false, 0.0};

  const double box_tol = 1e-12;
  auto in_box = [&](const VecX& f) {
    return (f.array() >= f_min.array() - box_tol).all() &&
           (f.array() <= f_max.array() + box_tol).all();
  };
  auto obj = [&](const VecX& t) {
    VecX f = f_p + Z * t;
    if (!in_box(f)) return std::numeric_limits<double>::infinity();
    return f.dot(w1.cwiseProduct(f));
  };

  if (k == 1) {
    // Exact feasible interval for the single nullspace coordinate.
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double z = Z(i, 0);
      if (std::abs(z) < 1e-14) {
        if (f_p[i] < f_min[i] - 1e-9 || f_p[i] > f_max[i] + 1e-9)
          return {VecX::Zero(m), false, 0.0};
        continue;
      }
      double a = (f_min[i] - f_p[i]) / z;
      double b = (f_max[i] - f_p[i]) / z;
      t_lo = std::max(t_lo, std::min(a, b));
      t_hi = std::min(t_hi, std::max(a, b));
    }
    if (t_lo > t_hi) return {VecX::Zero(m), false, 0.0};
    double best_t = t_lo, best_o = std::numeric_limits<double>::infinity();
    const int steps = 400000;
    for (int s = 0; s <= steps; ++s) {
      double t = t_lo + (t_hi - t_lo) * s / steps;
      VecX f = f_p + Z.col(0) * t;
      double o = f.dot(w1.cwiseProduct(f));
      if (o < best_o) {
        best_o = o;
        best_t = t;
      }
    }
    return {f_p + Z.col(0) * best_t, true, best_o};
  }

  // Seed the refinement with a feasible interior point so the tight box
  // indicator cannot starve the coarse levels.
  const double radius = (f_max - f_min).lpNorm<Eigen::Infinity>() * std::sqrt(double(m)) + 1.0;
  VecX t_lo = VecX::Constant(k, -radius), t_hi = VecX::Constant(k, radius);
  VecX t_center = Z.transpose() * (0.5 * (f_min + f_max) - f_p);
  VecX cur_lo = t_lo, cur_hi = t_hi;
  VecX best = t_center;
  double best_obj = obj(t_center);
  const int pts = k >= 3 ? 41 : 161;
  for (int level = 0; level < 7; ++level) {
    std::vector<int> idx(k, 0);
    VecX pt(k);
    while (true) {
      for (int d = 0; d < k; ++d)
        pt[d] = cur_lo[d] + (cur_hi[d] - cur_lo[d]) * idx[d] / (pts - 1);
      double o = obj(pt);
      if (o < best_obj) {
        best_obj = o;
        best = pt;
      }
      int d = 0;
      while (d < k && ++idx[d] == pts) idx[d++] = 0;
      if (d == k) break;
    }
    if (std::isfinite(best_obj)) {
      VecX span = (cur_hi - cur_lo) * (2.5 / (pts - 1));
      for (int d = 0; d < k; ++d) {
        cur_lo[d] = std::max(t_lo[d], best[d] - span[d]);
        cur_hi[d] = std::min(t_hi[d], best[d] + span[d]);
      }
    }
  }
  if (!std::isfinite(best_obj)) return {VecX::Zero(m), false, 0.0};
  return {f_p + Z * best, true, best_obj};
}

// --- scalar Kalman filter ----------------------------------------------------

struct ScalarKf {
  double theta = 0.0;
  double p = 1.0;

  // predict with length change dl through a fixed moment arm h (l = h*theta+c)
  void predict(double dl, double q, double h) {
    theta += dl / h;
    p += q;
  }
  void update(double z, double h, double c, double r) {
    double e = z - (h * theta + c);
    double s = h * p * h + r;
    double k = p * h / s;
    theta += k * e;
    p = (1.0 - k * h) * p;
  }
};

// --- planar two-link closed forms ---------------------------------------------

inline Vec3 planar_fk(double L1, double L2, double q1, double q2) {
  return Vec3(L1 * std::cos(q1) + L2 * std::cos(q1 + q2),
              L1 * std::sin(q1) + L2 * std::sin(q1 + q2), 0.0);
}

// Both elbow branches; empty when the target is out of reach.
inline std::vector<Eigen::Vector2d> planar_ik(double L1, double L2, double x, double y) {
  std::vector<Eigen::Vector2d> sols;
  const double d2 = x * x + y * y;
  double c2 = (d2 - L1 * L1 - L2 * L2) / (2.0 * L1 * L2);
  if (c2 < -1.0 || c2 > 1.0) return sols;
  for (double sign : {1.0, -1.0}) {
    double q2 = sign * std::acos(std::clamp(c2, -1.0, 1.0));
    double q1 = std::atan2(y, x) - std::atan2(L2 * std::sin(q2), L1 + L2 * std::cos(q2));
    sols.emplace_back(q1, q2);
  }
  return sols;
}

// --- misc ---------------------------------------------------------------------

// Central-difference derivative of a scalar function of a vector.
template <typename F>
VecX fd_gradient(const F& f, const VecX& x, double h = 1e-6) {
  VecX g(x.size());
  VecX xp = x;
  for (int i = 0; i < x.size(); ++i) {
    double saved = xp[i];
    xp[i] = saved + h;
    double fp = f(xp);
    xp[i] = saved - h;
    double fm = f(xp);
    xp[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace oracles
