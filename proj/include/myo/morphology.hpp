#pragma once

#include "myo/types.hpp"

#include <optional>

namespace myo {

// Revolute joint attaching child_link to parent_link. The child frame is the
// parent frame translated by `origin`, then rotated about `axis` by the joint
// angle.
struct JointDef {
  int id = -1;
  int parent_link = -1;
  int child_link = -1;
  Vec3 axis = Vec3::UnitZ();
  Vec3 origin = Vec3::Zero();
  double limit_min = -3.14;
  double limit_max = 3.14;
};

struct ViaPoint {
  int link = -1;
  Vec3 offset = Vec3::Zero();
};

// A muscle is a polyline through via points fixed on links. Lengths are sums
// of straight segments between consecutive via points.
struct MusclePath {
  int id = -1;
  std::vector<ViaPoint> via_points;
  double f_min = 0.0;        // N
  double f_max = 200.0;      // N
  double ldot_min = -0.3;    // m/s, winding (shortening) bound, <= 0
  double ldot_max = 0.3;     // m/s, payout (lengthening) bound, > 0
  double k_n = 2.0e4;        // 1/m, elastic element constant
};

struct EndEffector {
  int link = -1;
  Vec3 offset = Vec3::Zero();
};

struct MusculoskeletalModel {
  int num_links = 0;  // link 0 is the fixed base
  std::vector<JointDef> joints;
  std::vector<MusclePath> muscles;
  std::vector<EndEffector> end_effectors;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int muscle_count() const { return static_cast<int>(muscles.size()); }

  // Throws InvalidInput on broken invariants. Returns warnings (e.g. M < N).
  std::vector<std::string> validate() const;

  Posture clamp_to_limits(const Posture& theta) const;
};

// World transform of every link at the given posture.
std::vector<Transform> link_transforms(const MusculoskeletalModel& model, const Posture& theta);

// l = g_m(theta): per-muscle polyline length in meters.
VecX muscle_lengths(const MusculoskeletalModel& model, const Posture& theta);

// G(theta), M x N, by central finite differences with step h.
MatX muscle_jacobian(const MusculoskeletalModel& model, const Posture& theta, double h = 1e-6);

// tau = -G(theta)^T f. Tensions must be non-negative.
VecX tensions_to_torque(const MusculoskeletalModel& model, const Posture& theta, const VecX& f);

// x = g_j(theta) for one end effector.
Vec3 forward_kinematics(const MusculoskeletalModel& model, const Posture& theta, int end_effector);

// Joint Jacobian J, 3 x N, central finite differences.
MatX point_jacobian(const MusculoskeletalModel& model, const Posture& theta, int end_effector,
                    double h = 1e-6);

// World position and Jacobian of an arbitrary point fixed on a link.
Vec3 link_point_position(const MusculoskeletalModel& model, const Posture& theta, int link,
                         const Vec3& offset);
MatX link_point_jacobian(const MusculoskeletalModel& model, const Posture& theta, int link,
                         const Vec3& offset, double h = 1e-6);

struct IkResult {
  Posture theta;
  bool converged = false;
  double residual = 0.0;  // final task-space error, m
  int iterations = 0;
};

struct IkOptions {
  double tolerance = 1e-5;      // m
  int max_iterations = 200;
  double damping = 1e-3;        // DLS lambda
  double stall_epsilon = 1e-12; // error-reduction threshold
  int stall_iterations = 20;
};

// Damped-least-squares IK toward p_ref, joint limits clamped each step.
// Returns the best iterate with converged=false if progress stalls.
IkResult solve_ik(const MusculoskeletalModel& model, const Vec3& p_ref, const Posture& theta_init,
                  int end_effector, const IkOptions& opts = {});

// Deterministic posture samples inside joint limits, used for moment-arm
// screening (grouping) and reachable-length bounds (adaptation).
std::vector<Posture> sample_postures(const MusculoskeletalModel& model, int count,
                                     unsigned long long seed = 0x9e3779b97f4a7c15ull);

}  // namespace myo
