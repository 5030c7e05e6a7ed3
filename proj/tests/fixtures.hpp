#pragma once

#include "myo/morphology.hpp"
#include "myo/sim.hpp"

#include <cmath>

namespace fixtures {

using namespace myo;

// 1-DOF pin joint at the origin (axis z) with one flexor/extensor pair.
// At theta = 0 the flexor's moment arm is exactly -r and the extensor's +r.
inline MusculoskeletalModel pin_antagonist(double r = 0.02, double L = 0.3,
                                           double f_max = 200.0, double k_n = 2.0e4) {
  MusculoskeletalModel m;
  m.num_links = 2;
  JointDef j;
  j.id = 0;
  j.parent_link = 0;
  j.child_link = 1;
  j.axis = Vec3::UnitZ();
  j.origin = Vec3::Zero();
  j.limit_min = -1.5;
  j.limit_max = 1.5;
  m.joints.push_back(j);

  auto add_muscle = [&](double y) {
    MusclePath p;
    p.id = static_cast<int>(m.muscles.size());
    p.via_points.push_back({0, Vec3(-L, y, 0)});
    p.via_points.push_back({1, Vec3(0, y, 0)});
    p.f_min = 0.0;
    p.f_max = f_max;
    p.ldot_min = -0.3;
    p.ldot_max = 0.3;
    p.k_n = k_n;
    m.muscles.push_back(p);
  };
  add_muscle(r);    // flexor: dl/dtheta = -r at 0
  add_muscle(-r);   // extensor: +r
  m.end_effectors.push_back({1, Vec3(0.25, 0, 0)});
  m.validate();
  return m;
}

// 1-DOF with two flexors and two extensors (redundant), arms -r,-0.8r,+r,+0.8r.
inline MusculoskeletalModel pin_quad(double r = 0.02, double k_n = 2.0e4) {
  MusculoskeletalModel m = pin_antagonist(r, 0.3, 200.0, k_n);
  auto add_muscle = [&](double y) {
    MusclePath p;
    p.id = static_cast<int>(m.muscles.size());
    p.via_points.push_back({0, Vec3(-0.3, y, 0)});
    p.via_points.push_back({1, Vec3(0, y, 0)});
    p.k_n = k_n;
    m.muscles.push_back(p);
  };
  add_muscle(0.8 * r);
  add_muscle(-0.8 * r);
  m.validate();
  return m;
}

// Planar 2-link arm, shoulder + elbow (both axis z), with two antagonist
// pairs; end effector at the tip. Textbook planar FK applies.
inline MusculoskeletalModel planar_two_link(double L1 = 0.3, double L2 = 0.25, double r = 0.02,
                                            double k_n = 2.0e4) {
  MusculoskeletalModel m;
  m.num_links = 3;
  JointDef shoulder;
  shoulder.id = 0;
  shoulder.parent_link = 0;
  shoulder.child_link = 1;
  shoulder.axis = Vec3::UnitZ();
  shoulder.origin = Vec3::Zero();
  shoulder.limit_min = -2.5;
  shoulder.limit_max = 2.5;
  m.joints.push_back(shoulder);
  JointDef elbow;
  elbow.id = 1;
  elbow.parent_link = 1;
  elbow.child_link = 2;
  elbow.axis = Vec3::UnitZ();
  elbow.origin = Vec3(L1, 0, 0);
  elbow.limit_min = -2.5;
  elbow.limit_max = 2.5;
  m.joints.push_back(elbow);

  auto add_muscle = [&](int la, const Vec3& a, int lb, const Vec3& b) {
    MusclePath p;
    p.id = static_cast<int>(m.muscles.size());
    p.via_points.push_back({la, a});
    p.via_points.push_back({lb, b});
    p.k_n = k_n;
    m.muscles.push_back(p);
  };
  add_muscle(0, Vec3(-0.2, r, 0), 1, Vec3(0, r, 0));    // shoulder flexor
  add_muscle(0, Vec3(-0.2, -r, 0), 1, Vec3(0, -r, 0));  // shoulder extensor
  add_muscle(1, Vec3(L1 - 0.2, r, 0), 2, Vec3(0, r, 0));    // elbow flexor
  add_muscle(1, Vec3(L1 - 0.2, -r, 0), 2, Vec3(0, -r, 0));  // elbow extensor
  m.end_effectors.push_back({2, Vec3(L2, 0, 0)});
  m.validate();
  return m;
}

// Gravity pendulum: 1-DOF arm along +x with a point mass at distance Lp.
// Muscles exist but hang slack when paid out.
inline MusculoskeletalModel pendulum_model(double Lp = 0.3) {
  MusculoskeletalModel m = pin_antagonist(0.02, 0.3);
  m.joints[0].limit_min = -3.1;
  m.joints[0].limit_max = 3.1;
  m.end_effectors[0] = {1, Vec3(Lp, 0, 0)};
  m.validate();
  return m;
}

inline SimParams pendulum_params(double mass = 0.5, double Lp = 0.3, double damping = 0.0) {
  SimParams p;
  p.inertia = VecX::Constant(1, mass * Lp * Lp);
  p.damping = VecX::Constant(1, damping);
  p.masses.push_back({1, mass, Vec3(Lp, 0, 0)});
  return p;
}

// Two mechanically independent pin joints far apart, each with an antagonist
// pair: muscles 0,1 on the "arm" joint at the origin, 2,3 on the "leg" joint
// 0.8 m away.
inline MusculoskeletalModel two_separate_pins(double r = 0.02) {
  MusculoskeletalModel m;
  m.num_links = 3;
  JointDef a;
  a.id = 0;
  a.parent_link = 0;
  a.child_link = 1;
  a.axis = Vec3::UnitZ();
  a.origin = Vec3::Zero();
  a.limit_min = -1.5;
  a.limit_max = 1.5;
  m.joints.push_back(a);
  JointDef b = a;
  b.id = 1;
  b.child_link = 2;
  b.origin = Vec3(0, -0.8, 0);
  m.joints.push_back(b);

  auto add_muscle = [&](int link, const Vec3& base_anchor, const Vec3& child_pt) {
    MusclePath p;
    p.id = static_cast<int>(m.muscles.size());
    p.via_points.push_back({0, base_anchor});
    p.via_points.push_back({link, child_pt});
    m.muscles.push_back(p);
  };
  add_muscle(1, Vec3(-0.3, r, 0), Vec3(0, r, 0));
  add_muscle(1, Vec3(-0.3, -r, 0), Vec3(0, -r, 0));
  add_muscle(2, Vec3(-0.3, -0.8 + r, 0), Vec3(0, r, 0));
  add_muscle(2, Vec3(-0.3, -0.8 - r, 0), Vec3(0, -r, 0));
  m.end_effectors.push_back({1, Vec3(0.2, 0, 0)});
  m.validate();
  return m;
}

// Serial chain of `n_joints` pin joints (0.1 m links along +x, axis z).
// Muscles span [from_link, to_link] with a lateral offset; such a muscle has
// nonzero moment arm on every joint strictly between the two links.
inline MusculoskeletalModel chain_model(int n_joints,
                                        const std::vector<std::tuple<int, int, double>>& spans) {
  MusculoskeletalModel m;
  m.num_links = n_joints + 1;
  for (int j = 0; j < n_joints; ++j) {
    JointDef d;
    d.id = j;
    d.parent_link = j;
    d.child_link = j + 1;
    d.axis = Vec3::UnitZ();
    d.origin = j == 0 ? Vec3::Zero() : Vec3(0.1, 0, 0);
    d.limit_min = -0.8;
    d.limit_max = 0.8;
    m.joints.push_back(d);
  }
  for (const auto& [from, to, y] : spans) {
    MusclePath p;
    p.id = static_cast<int>(m.muscles.size());
    p.via_points.push_back({from, Vec3(0.02, y, 0)});
    p.via_points.push_back({to, Vec3(0.05, -0.7 * y, 0)});
    m.muscles.push_back(p);
  }
  m.end_effectors.push_back({n_joints, Vec3(0.1, 0, 0)});
  m.validate();
  return m;
}

// Shoulder-like grouping fixture: a 10-joint chain whose 10 muscles all cross
// the 3 target joints' region, plus a 2-joint "leg" branch with 2 muscles.
// manual_group on targets {0,1,2} must return exactly 10 muscles / 10 joints.
inline MusculoskeletalModel shoulder_like_model() {
  MusculoskeletalModel m;
  m.num_links = 13;  // 0 base, 1..10 chain, 11..12 leg
  for (int j = 0; j < 10; ++j) {
    JointDef d;
    d.id = j;
    d.parent_link = j;
    d.child_link = j + 1;
    d.axis = Vec3::UnitZ();
    d.origin = j == 0 ? Vec3::Zero() : Vec3(0.1, 0, 0);
    d.limit_min = -0.8;
    d.limit_max = 0.8;
    m.joints.push_back(d);
  }
  {
    JointDef d;
    d.id = 10;
    d.parent_link = 0;
    d.child_link = 11;
    d.axis = Vec3::UnitZ();
    d.origin = Vec3(0, -0.5, 0);
    d.limit_min = -0.8;
    d.limit_max = 0.8;
    m.joints.push_back(d);
    d.id = 11;
    d.parent_link = 11;
    d.child_link = 12;
    d.origin = Vec3(0, -0.1, 0);
    m.joints.push_back(d);
  }
  // Ten chain muscles: muscle i runs base -> link i+1 (crosses joints 0..i).
  for (int i = 0; i < 10; ++i) {
    MusclePath p;
    p.id = i;
    double y = (i % 2 == 0) ? 0.04 + 0.002 * i : -0.04 - 0.002 * i;
    p.via_points.push_back({0, Vec3(-0.05, y, 0)});
    p.via_points.push_back({i + 1, Vec3(0.05, -y, 0)});
    m.muscles.push_back(p);
  }
  // Two leg muscles on the branch only.
  {
    MusclePath p;
    p.id = 10;
    p.via_points.push_back({0, Vec3(0.03, -0.45, 0)});
    p.via_points.push_back({11, Vec3(0.03, -0.02, 0)});
    m.muscles.push_back(p);
    MusclePath q;
    q.id = 11;
    q.via_points.push_back({11, Vec3(-0.03, -0.02, 0)});
    q.via_points.push_back({12, Vec3(-0.03, -0.02, 0)});
    m.muscles.push_back(q);
  }
  m.end_effectors.push_back({10, Vec3(0.1, 0, 0)});
  m.validate();
  return m;
}

// 3-joint chain with a monoarticular at joint 0 and two biarticulars
// (0-1 and 1-2): one-round vs fixpoint manual grouping differ here.
inline MusculoskeletalModel biarticular_chain() {
  return chain_model(3, {{0, 1, 0.03},    // m0: joint 0 only
                         {0, 2, -0.035},  // m1: joints 0,1
                         {1, 3, 0.03}});  // m2: joints 1,2
}

}  // namespace fixtures
