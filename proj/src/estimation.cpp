#include "myo/estimation.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace myo {

LengthModel length_model(const MusculoskeletalModel& model) {
  LengthModel lm;
  lm.lengths = [&model](const VecX& theta) { return muscle_lengths(model, theta); };
  lm.jacobian = [&model](const VecX& theta) { return muscle_jacobian(model, theta); };
  return lm;
}

EkfParams EkfParams::diagonal(int n, int m, double q, double r) {
  EkfParams p;
  p.Q = q * MatX::Identity(n, n);
  p.R = r * MatX::Identity(m, m);
  return p;
}

MatX pseudoinverse(const MatX& A, double rel_tol) {
  Eigen::JacobiSVD<MatX> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VecX& s = svd.singularValues();
  if (s.size() == 0) return MatX::Zero(A.cols(), A.rows());
  const double cutoff = rel_tol * s[0];
  VecX inv = VecX::Zero(s.size());
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > cutoff && s[i] > 0.0) inv[i] = 1.0 / s[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

MatX make_psd(const MatX& P) {
  MatX S = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> es(S);
  if (es.eigenvalues().minCoeff() >= 0.0) return S;
  VecX ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

EkfState ekf_predict(const EkfState& state, const VecX& delta_l, const LengthModel& model,
                     const EkfParams& params) {
  require(delta_l.allFinite(), "delta_l must be finite");
  MatX G = model.jacobian(state.theta);
  require(G.rows() == delta_l.size(), "delta_l dimension mismatch");
  EkfState out;
  out.theta = state.theta + pseudoinverse(G) * delta_l;
  out.P = make_psd(state.P + params.Q);
  return out;
}

EkfUpdateResult ekf_update(const EkfState& state, const VecX& l_meas, const LengthModel& model,
                           const EkfParams& params) {
  require(l_meas.allFinite(), "l_meas must be finite");
  EkfUpdateResult out;
  MatX G = model.jacobian(state.theta);
  require(G.rows() == l_meas.size(), "l_meas dimension mismatch");

  VecX e = l_meas - model.lengths(state.theta);
  MatX S = G * state.P * G.transpose() + params.R;
  S = 0.5 * (S + S.transpose());

  Eigen::SelfAdjointEigenSolver<MatX> es(S);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  out.condition = (lmin > 0.0) ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(lmin > 0.0) || out.condition > 1e12) {
    out.state = state;
    out.skipped = true;
    return out;
  }

  MatX K = state.P * G.transpose() * S.inverse();
  out.state.theta = state.theta + K * e;
  const int n = static_cast<int>(state.theta.size());
  out.state.P = make_psd((MatX::Identity(n, n) - K * G) * state.P);
  return out;
}

EkfState ekf_predict(const EkfState& state, const VecX& delta_l, const MusculoskeletalModel& model,
                     const EkfParams& params) {
  return ekf_predict(state, delta_l, length_model(model), params);
}

EkfUpdateResult ekf_update(const EkfState& state, const VecX& l_meas,
                           const MusculoskeletalModel& model, const EkfParams& params) {
  return ekf_update(state, l_meas, length_model(model), params);
}

VisionCorrection vision_correct(const Posture& theta_est, const Vec3& p_marker,
                                const MusculoskeletalModel& model, int end_effector) {
  require(p_marker.allFinite(), "marker position must be finite");
  IkResult ik = solve_ik(model, p_marker, theta_est, end_effector);
  VisionCorrection out;
  out.residual = ik.residual;
  if (ik.converged) {
    out.theta = ik.theta;
    out.corrected = true;
  } else {
    out.theta = theta_est;
  }
  return out;
}

}  // namespace myo
