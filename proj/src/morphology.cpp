#include "myo/morphology.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace myo {

std::vector<std::string> MusculoskeletalModel::validate() const {
  std::vector<std::string> warnings;
  require(num_links >= 1, "model needs at least the base link");

  std::vector<int> parent_of(num_links, -1);
  for (const auto& j : joints) {
    require(j.parent_link >= 0 && j.parent_link < num_links, "joint parent link out of range");
    require(j.child_link >= 1 && j.child_link < num_links, "joint child link out of range (base cannot be a child)");
    require(std::abs(j.axis.norm() - 1.0) <= 1e-9, "joint axis must have unit norm");
    require(j.limit_min < j.limit_max, "joint limits must satisfy min < max");
    require(parent_of[j.child_link] == -1, "link has more than one parent joint");
    parent_of[j.child_link] = j.parent_link;
  }
  // Acyclicity: walking parents from any link must reach the base.
  for (int l = 1; l < num_links; ++l) {
    int cur = l, hops = 0;
    while (cur > 0) {
      require(parent_of[cur] != -1 || cur == 0, "kinematic tree is disconnected");
      cur = parent_of[cur];
      require(++hops <= num_links, "kinematic tree contains a cycle");
    }
  }

  for (const auto& m : muscles) {
    require(m.via_points.size() >= 2, "muscle needs at least two via points");
    for (const auto& vp : m.via_points)
      require(vp.link >= 0 && vp.link < num_links, "via point refers to a missing link");
    require(m.f_min >= 0.0, "f_min must be non-negative");
    require(m.f_min < m.f_max, "f_min must be below f_max");
    require(m.ldot_max > 0.0, "ldot_max must be positive");
    require(m.ldot_min <= 0.0, "ldot_min must be non-positive");
    require(m.k_n > 0.0, "k_n must be positive");
  }
  for (const auto& ee : end_effectors)
    require(ee.link >= 0 && ee.link < num_links, "end effector refers to a missing link");

  // Zero-posture segment check needs kinematics; done here since validate()
  // is called once at load.
  if (!joints.empty() || !muscles.empty()) {
    Posture zero = VecX::Zero(joint_count());
    auto tf = link_transforms(*this, zero);
    for (const auto& m : muscles) {
      for (size_t s = 0; s + 1 < m.via_points.size(); ++s) {
        Vec3 a = tf[m.via_points[s].link] * m.via_points[s].offset;
        Vec3 b = tf[m.via_points[s + 1].link] * m.via_points[s + 1].offset;
        require((a - b).norm() > 1e-9, "muscle has a zero-length segment at the zero posture");
      }
    }
  }

  if (muscle_count() < joint_count())
    warnings.push_back("model has fewer muscles than joints; redundancy scenarios need M >= N");
  return warnings;
}

Posture MusculoskeletalModel::clamp_to_limits(const Posture& theta) const {
  require(theta.size() == joint_count(), "posture dimension mismatch");
  Posture out = theta;
  for (int j = 0; j < joint_count(); ++j)
    out[j] = std::clamp(out[j], joints[j].limit_min, joints[j].limit_max);
  return out;
}

std::vector<Transform> link_transforms(const MusculoskeletalModel& model, const Posture& theta) {
  require(theta.size() == model.joint_count(), "posture dimension mismatch");
  require(theta.allFinite(), "posture must be finite");

  std::vector<Transform> tf(model.num_links, Transform::Identity());
  std::vector<bool> done(model.num_links, false);
  done[0] = true;
  // Joints are not required to be topologically sorted; sweep until fixed.
  int resolved = 1;
  while (resolved < model.num_links) {
    int before = resolved;
    for (int j = 0; j < model.joint_count(); ++j) {
      const auto& jd = model.joints[j];
      if (done[jd.child_link] || !done[jd.parent_link]) continue;
      Transform t = tf[jd.parent_link];
      t.translate(jd.origin);
      t.rotate(Eigen::AngleAxisd(theta[j], jd.axis));
      tf[jd.child_link] = t;
      done[jd.child_link] = true;
      ++resolved;
    }
    require(resolved != before, "kinematic tree has unreachable links");
  }
  return tf;
}

VecX muscle_lengths(const MusculoskeletalModel& model, const Posture& theta) {
  auto tf = link_transforms(model, theta);
  VecX l(model.muscle_count());
  for (int i = 0; i < model.muscle_count(); ++i) {
    const auto& m = model.muscles[i];
    double len = 0.0;
    Vec3 prev = tf[m.via_points[0].link] * m.via_points[0].offset;
    for (size_t s = 1; s < m.via_points.size(); ++s) {
      Vec3 cur = tf[m.via_points[s].link] * m.via_points[s].offset;
      len += (cur - prev).norm();
      prev = cur;
    }
    l[i] = len;
  }
  return l;
}

MatX muscle_jacobian(const MusculoskeletalModel& model, const Posture& theta, double h) {
  require(theta.allFinite(), "posture must be finite");
  const int n = model.joint_count();
  MatX G(model.muscle_count(), n);
  Posture t = theta;
  for (int j = 0; j < n; ++j) {
    const double saved = t[j];
    t[j] = saved + h;
    VecX lp = muscle_lengths(model, t);
    t[j] = saved - h;
    VecX lm = muscle_lengths(model, t);
    t[j] = saved;
    G.col(j) = (lp - lm) / (2.0 * h);
  }
  return G;
}

VecX tensions_to_torque(const MusculoskeletalModel& model, const Posture& theta, const VecX& f) {
  require(f.size() == model.muscle_count(), "tension dimension mismatch");
  require(f.allFinite(), "tensions must be finite");
  require((f.array() >= 0.0).all(), "tensions must be non-negative");
  return -muscle_jacobian(model, theta).transpose() * f;
}

Vec3 forward_kinematics(const MusculoskeletalModel& model, const Posture& theta, int end_effector) {
  require(end_effector >= 0 && end_effector < static_cast<int>(model.end_effectors.size()),
          "end effector index out of range");
  const auto& ee = model.end_effectors[end_effector];
  return link_point_position(model, theta, ee.link, ee.offset);
}

Vec3 link_point_position(const MusculoskeletalModel& model, const Posture& theta, int link,
                         const Vec3& offset) {
  require(link >= 0 && link < model.num_links, "link index out of range");
  auto tf = link_transforms(model, theta);
  return tf[link] * offset;
}

MatX link_point_jacobian(const MusculoskeletalModel& model, const Posture& theta, int link,
                         const Vec3& offset, double h) {
  const int n = model.joint_count();
  MatX J(3, n);
  Posture t = theta;
  for (int j = 0; j < n; ++j) {
    const double saved = t[j];
    t[j] = saved + h;
    Vec3 pp = link_point_position(model, t, link, offset);
    t[j] = saved - h;
    Vec3 pm = link_point_position(model, t, link, offset);
    t[j] = saved;
    J.col(j) = (pp - pm) / (2.0 * h);
  }
  return J;
}

MatX point_jacobian(const MusculoskeletalModel& model, const Posture& theta, int end_effector,
                    double h) {
  require(end_effector >= 0 && end_effector < static_cast<int>(model.end_effectors.size()),
          "end effector index out of range");
  const auto& ee = model.end_effectors[end_effector];
  return link_point_jacobian(model, theta, ee.link, ee.offset, h);
}

IkResult solve_ik(const MusculoskeletalModel& model, const Vec3& p_ref, const Posture& theta_init,
                  int end_effector, const IkOptions& opts) {
  require(p_ref.allFinite(), "IK target must be finite");
  Posture theta = model.clamp_to_limits(theta_init);

  IkResult best;
  best.theta = theta;
  best.residual = (p_ref - forward_kinematics(model, theta, end_effector)).norm();

  double prev_err = best.residual;
  int stall = 0;
  double lambda = opts.damping;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Vec3 err = p_ref - forward_kinematics(model, theta, end_effector);
    double e = err.norm();
    if (e < best.residual) {
      best.residual = e;
      best.theta = theta;
    }
    best.iterations = it;
    if (e < opts.tolerance) {
      best.converged = true;
      return best;
    }
    if (prev_err - e < opts.stall_epsilon) {
      if (++stall >= opts.stall_iterations) return best;  // converged stays false
    } else {
      stall = 0;
    }
    prev_err = e;

    // Damped step; rejected steps raise the damping (near-singular postures
    // overshoot under plain DLS), accepted steps relax it back to the base.
    MatX J = point_jacobian(model, theta, end_effector);
    Eigen::Matrix3d JJt = (J * J.transpose()).eval();
    JJt.diagonal().array() += lambda * lambda;
    VecX dtheta = J.transpose() * JJt.ldlt().solve(err);
    Posture cand = model.clamp_to_limits(theta + dtheta);
    double cand_err = (p_ref - forward_kinematics(model, cand, end_effector)).norm();
    if (cand_err < e) {
      theta = cand;
      lambda = std::max(opts.damping, 0.5 * lambda);
    } else {
      lambda *= 4.0;
    }
  }
  Vec3 err = p_ref - forward_kinematics(model, theta, end_effector);
  if (err.norm() < best.residual) {
    best.residual = err.norm();
    best.theta = theta;
  }
  best.converged = best.residual < opts.tolerance;
  best.iterations = opts.max_iterations;
  return best;
}

std::vector<Posture> sample_postures(const MusculoskeletalModel& model, int count,
                                     unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Posture> out;
  out.reserve(count + 1);
  out.push_back(VecX::Zero(model.joint_count()));
  for (int s = 1; s < count; ++s) {
    Posture t(model.joint_count());
    for (int j = 0; j < model.joint_count(); ++j) {
      const auto& jd = model.joints[j];
      t[j] = jd.limit_min + u(rng) * (jd.limit_max - jd.limit_min);
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace myo
