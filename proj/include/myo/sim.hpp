#pragma once

#include "myo/morphology.hpp"
#include "myo/reflex.hpp"
#include "myo/types.hpp"

#include <random>

namespace myo {

struct LinkMass {
  int link = -1;
  double mass = 0.0;  // kg
  Vec3 com = Vec3::Zero();
};

struct ActuatorParams {
  double pulley_radius = 0.01;   // m
  double f_act_max = 400.0;      // N, tension the current loop can command
  bool backdrivable = true;
  double kp_tension = 2e-3;      // m/s winding per N of tension error
};

// 1-D spring contact: an end effector pressing a plane.
struct ContactModel {
  int end_effector = 0;
  Vec3 plane_point = Vec3::Zero();
  Vec3 plane_normal = Vec3::UnitY();  // force pushes the effector along +normal
  double stiffness = 1000.0;          // N/m of penetration
};

struct SimParams {
  double dt = 1e-3;                    // s, plant step
  VecX inertia;                        // N, diagonal joint inertia (kg m^2)
  VecX damping;                        // N, viscous joint damping (N m s/rad)
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);
  std::vector<LinkMass> masses;
  ThermalParams thermal;
  ActuatorParams actuator;
  bool paper_tension_law = false;      // f = e^{k dn} instead of e^{k dn} - 1
  std::vector<ContactModel> contacts;
};

struct SimState {
  VecX theta;
  VecX theta_dot;
  VecX motor_pos;   // wound wire per muscle, m (shortens the free length)
  VecX delta_n;     // elastic-element extension, m (>= 0)
  std::vector<ThermalState> thermal;
  std::vector<uint8_t> ruptured;
  double time = 0.0;
};

struct NoiseSpec {
  double sigma_l = 0.0;
  double sigma_f = 0.0;
  double sigma_c = 0.0;
  double sigma_theta = 0.0;
  double sigma_contact = 0.0;
};

// Which length the l sensor reports. Motor-side mirrors hardware encoders:
// the free wire length paid out by the motor, blind to the elastic extension.
enum class LengthChannel { MotorSide, JointSide };

class Simulator {
 public:
  Simulator(const MusculoskeletalModel& model, SimParams params);

  // One plant step under per-muscle commands. Throws SimDiverged on
  // non-finite state.
  void step(const std::vector<MuscleCommand>& commands);

  SensorFrame read_sensors(const NoiseSpec& noise, std::mt19937_64& rng,
                           bool theta_sensor = true,
                           LengthChannel channel = LengthChannel::MotorSide) const;
  SensorFrame read_sensors() const;  // noiseless, theta on, motor-side

  Vec3 marker_position(int end_effector, double sigma, std::mt19937_64& rng) const;

  // Torque needed to hold the current posture against gravity (sign such
  // that adding it to the dynamics cancels the gravity term).
  VecX gravity_torque(const Posture& theta) const;

  void rupture_muscle(int i);

  const SimState& state() const { return state_; }
  SimState& state() { return state_; }
  const MusculoskeletalModel& model() const { return model_; }
  const SimParams& params() const { return params_; }

  // Tensions at the current state (what step() would see before integrating).
  VecX tensions() const;
  VecX contact_forces() const;
  double muscle_tension_from_extension(int i, double dn) const;

 private:
  VecX free_length() const;  // l_geo0 - motor_pos

  const MusculoskeletalModel& model_;
  SimParams params_;
  SimState state_;
  VecX l_geo0_;
};

}  // namespace myo
