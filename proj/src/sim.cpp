#include "myo/sim.hpp"

#include <algorithm>
#include <cmath>

namespace myo {

Simulator::Simulator(const MusculoskeletalModel& model, SimParams params)
    : model_(model), params_(std::move(params)) {
  const int n = model_.joint_count();
  const int m = model_.muscle_count();
  if (params_.inertia.size() == 0) params_.inertia = VecX::Constant(n, 0.02);
  if (params_.damping.size() == 0) params_.damping = VecX::Constant(n, 0.05);
  require(params_.inertia.size() == n && (params_.inertia.array() > 0).all(),
          "inertia must be positive per joint");
  require(params_.damping.size() == n && (params_.damping.array() >= 0).all(),
          "damping must be non-negative per joint");
  require(params_.dt > 0.0 && params_.dt <= 0.01, "plant dt must be in (0, 0.01]");
  for (const auto& lm : params_.masses)
    require(lm.link >= 0 && lm.link < model_.num_links, "mass attached to missing link");
  for (const auto& c : params_.contacts)
    require(c.end_effector >= 0 && c.end_effector < static_cast<int>(model_.end_effectors.size()),
            "contact refers to a missing end effector");

  state_.theta = VecX::Zero(n);
  state_.theta_dot = VecX::Zero(n);
  state_.motor_pos = VecX::Zero(m);
  state_.delta_n = VecX::Zero(m);
  state_.thermal.assign(m, ThermalState{params_.thermal.c_a, params_.thermal.c_a});
  state_.ruptured.assign(m, 0);
  l_geo0_ = muscle_lengths(model_, state_.theta);
}

VecX Simulator::free_length() const { return l_geo0_ - state_.motor_pos; }

double Simulator::muscle_tension_from_extension(int i, double dn) const {
  if (state_.ruptured[i]) return 0.0;
  if (dn <= 0.0) return 0.0;
  const double kn = model_.muscles[i].k_n;
  return params_.paper_tension_law ? std::exp(kn * dn) : std::exp(kn * dn) - 1.0;
}

VecX Simulator::tensions() const {
  const int m = model_.muscle_count();
  VecX l_geo = muscle_lengths(model_, state_.theta);
  VecX free = free_length();
  VecX f(m);
  for (int i = 0; i < m; ++i) f[i] = muscle_tension_from_extension(i, l_geo[i] - free[i]);
  return f;
}

VecX Simulator::contact_forces() const {
  VecX fc(params_.contacts.size());
  for (size_t c = 0; c < params_.contacts.size(); ++c) {
    const auto& cm = params_.contacts[c];
    Vec3 p = forward_kinematics(model_, state_.theta, cm.end_effector);
    double pen = (cm.plane_point - p).dot(cm.plane_normal);
    fc[static_cast<int>(c)] = cm.stiffness * std::max(0.0, pen);
  }
  return fc;
}

VecX Simulator::gravity_torque(const Posture& theta) const {
  const int n = model_.joint_count();
  VecX tau = VecX::Zero(n);
  for (const auto& lm : params_.masses) {
    MatX J = link_point_jacobian(model_, theta, lm.link, lm.com);
    tau += J.transpose() * (lm.mass * params_.gravity);
  }
  return tau;
}

void Simulator::step(const std::vector<MuscleCommand>& commands) {
  const int n = model_.joint_count();
  const int m = model_.muscle_count();
  require(static_cast<int>(commands.size()) == m, "command count mismatch");

  VecX l_geo = muscle_lengths(model_, state_.theta);
  VecX free = free_length();
  VecX f(m);
  for (int i = 0; i < m; ++i) {
    state_.delta_n[i] = std::max(0.0, l_geo[i] - free[i]);
    f[i] = muscle_tension_from_extension(i, state_.delta_n[i]);
  }

  // Joint dynamics: muscle torque + gravity + contact - viscous damping.
  MatX G = muscle_jacobian(model_, state_.theta);
  VecX tau = -G.transpose() * f;
  tau += gravity_torque(state_.theta);
  for (const auto& cm : params_.contacts) {
    Vec3 p = forward_kinematics(model_, state_.theta, cm.end_effector);
    double pen = (cm.plane_point - p).dot(cm.plane_normal);
    if (pen > 0.0) {
      MatX J = point_jacobian(model_, state_.theta, cm.end_effector);
      tau += J.transpose() * (cm.stiffness * pen * cm.plane_normal);
    }
  }
  tau -= params_.damping.cwiseProduct(state_.theta_dot);

  // Semi-implicit Euler with hard joint stops.
  const double dt = params_.dt;
  state_.theta_dot += dt * tau.cwiseQuotient(params_.inertia);
  state_.theta += dt * state_.theta_dot;
  for (int j = 0; j < n; ++j) {
    const auto& jd = model_.joints[j];
    if (state_.theta[j] < jd.limit_min) {
      state_.theta[j] = jd.limit_min;
      state_.theta_dot[j] = std::max(0.0, state_.theta_dot[j]);
    } else if (state_.theta[j] > jd.limit_max) {
      state_.theta[j] = jd.limit_max;
      state_.theta_dot[j] = std::min(0.0, state_.theta_dot[j]);
    }
  }

  // Motor winding toward the commanded tension.
  VecX l_geo_new = muscle_lengths(model_, state_.theta);
  for (int i = 0; i < m; ++i) {
    const auto& mp = model_.muscles[i];
    if (!commands[i].current_enabled) {
      if (params_.actuator.backdrivable) {
        // Freely pay out whatever the pull demands; never reel in.
        state_.motor_pos[i] = std::min(state_.motor_pos[i], l_geo0_[i] - l_geo_new[i]);
      }
      continue;
    }
    const double f_ref = std::clamp(commands[i].f_ref, 0.0, params_.actuator.f_act_max);
    double wind_rate = params_.actuator.kp_tension * (f_ref - f[i]);
    wind_rate = std::clamp(wind_rate, -mp.ldot_max, -mp.ldot_min);
    state_.motor_pos[i] += wind_rate * dt;
  }

  // Thermal advance on the realized (start-of-step) tension.
  for (int i = 0; i < m; ++i)
    state_.thermal[i] = thermal_predict(state_.thermal[i], f[i], params_.thermal, dt);

  // Refresh extensions for observers.
  free = free_length();
  for (int i = 0; i < m; ++i) state_.delta_n[i] = std::max(0.0, l_geo_new[i] - free[i]);

  state_.time += dt;

  auto check_vec = [](const VecX& v, const char* name) {
    if (!v.allFinite()) throw SimDiverged(name);
  };
  check_vec(state_.theta, "theta");
  check_vec(state_.theta_dot, "theta_dot");
  check_vec(state_.motor_pos, "motor_pos");
  check_vec(state_.delta_n, "delta_n");
  for (const auto& th : state_.thermal)
    if (!std::isfinite(th.c1) || !std::isfinite(th.c2)) throw SimDiverged("thermal");
}

SensorFrame Simulator::read_sensors(const NoiseSpec& noise, std::mt19937_64& rng,
                                    bool theta_sensor, LengthChannel channel) const {
  const int m = model_.muscle_count();
  std::normal_distribution<double> g(0.0, 1.0);

  SensorFrame frame;
  frame.time = state_.time;
  VecX l_geo = muscle_lengths(model_, state_.theta);
  frame.l = channel == LengthChannel::MotorSide ? VecX(free_length()) : l_geo;
  frame.f = tensions();
  frame.c1.resize(m);
  for (int i = 0; i < m; ++i) frame.c1[i] = state_.thermal[i].c1;
  if (theta_sensor) frame.theta = state_.theta;
  frame.contacts = contact_forces();

  auto add_noise = [&](VecX& v, double sigma) {
    if (sigma <= 0.0) return;
    for (int i = 0; i < v.size(); ++i) v[i] += sigma * g(rng);
  };
  add_noise(frame.l, noise.sigma_l);
  add_noise(frame.f, noise.sigma_f);
  frame.f = frame.f.cwiseMax(0.0);
  add_noise(frame.c1, noise.sigma_c);
  if (frame.theta) add_noise(*frame.theta, noise.sigma_theta);
  add_noise(frame.contacts, noise.sigma_contact);
  return frame;
}

SensorFrame Simulator::read_sensors() const {
  std::mt19937_64 rng(0);
  return read_sensors(NoiseSpec{}, rng, true, LengthChannel::MotorSide);
}

Vec3 Simulator::marker_position(int end_effector, double sigma, std::mt19937_64& rng) const {
  Vec3 p = forward_kinematics(model_, state_.theta, end_effector);
  if (sigma > 0.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < 3; ++i) p[i] += sigma * g(rng);
  }
  return p;
}

void Simulator::rupture_muscle(int i) {
  require(i >= 0 && i < model_.muscle_count(), "rupture index out of range");
  state_.ruptured[i] = 1;
}

}  // namespace myo
