#pragma once

#include "myo/morphology.hpp"
#include "myo/types.hpp"

#include <functional>

namespace myo {

// Joint-angle estimation from muscle-length changes. The filter only needs
// the length map and its Jacobian, so it accepts any differentiable model;
// the MusculoskeletalModel overloads are the production path.
struct LengthModel {
  std::function<VecX(const VecX&)> lengths;
  std::function<MatX(const VecX&)> jacobian;
};

LengthModel length_model(const MusculoskeletalModel& model);

struct EkfState {
  VecX theta;  // N
  MatX P;      // N x N, kept symmetric PSD
};

struct EkfParams {
  MatX Q;  // N x N process covariance
  MatX R;  // M x M observation covariance

  static EkfParams diagonal(int n, int m, double q = 1e-6, double r = 1e-6);
};

// Predict: theta += pinv(G) * delta_l, P += Q. Singular values below
// 1e-8 * sigma_max are truncated in the pseudoinverse.
EkfState ekf_predict(const EkfState& state, const VecX& delta_l, const LengthModel& model,
                     const EkfParams& params);

struct EkfUpdateResult {
  EkfState state;
  bool skipped = false;      // innovation covariance numerically singular
  double condition = 0.0;
};

EkfUpdateResult ekf_update(const EkfState& state, const VecX& l_meas, const LengthModel& model,
                           const EkfParams& params);

EkfState ekf_predict(const EkfState& state, const VecX& delta_l, const MusculoskeletalModel& model,
                     const EkfParams& params);
EkfUpdateResult ekf_update(const EkfState& state, const VecX& l_meas,
                           const MusculoskeletalModel& model, const EkfParams& params);

struct VisionCorrection {
  Posture theta;
  bool corrected = false;  // false: IK did not converge, estimate untouched
  double residual = 0.0;
};

// Replaces the estimate mean with IK(p_marker, init=theta_est); P untouched.
VisionCorrection vision_correct(const Posture& theta_est, const Vec3& p_marker,
                                const MusculoskeletalModel& model, int end_effector);

// Moore-Penrose pseudoinverse via SVD with relative truncation.
MatX pseudoinverse(const MatX& A, double rel_tol = 1e-8);

// Symmetrize and clamp negative eigenvalues (tolerated down to -1e-10).
MatX make_psd(const MatX& P);

}  // namespace myo
