#pragma once

#include "myo/allocation.hpp"
#include "myo/morphology.hpp"
#include "myo/types.hpp"

#include <optional>

namespace myo {

// Per-muscle controller state. Reflex offsets compose additively into one
// effective target length: l_eff = l_ref - dl_src + dl_mtc + dl_mrc.
struct MuscleCommandState {
  double l_ref = 0.0;       // m
  double k_msc = 0.0;       // N/m
  double f_bias = 0.0;      // N
  double delta_l_src = 0.0; // m, stretch-reflex contraction remaining
  double delta_l_mtc = 0.0; // m, thermal relaxation (>= 0)
  double delta_l_mrc = 0.0; // m, relaxation-control offset (>= 0)
  bool current_enabled = true;

  double effective_l_ref() const { return l_ref - delta_l_src + delta_l_mtc + delta_l_mrc; }
};

// f_ref = f_bias + max(0, k_msc * (l - l_eff))
double msc_tension(double l, const MuscleCommandState& cmd);

struct SrcParams {
  double c_src_prime = 0.5;   // trigger ratio C'_src
  double delta_l_src = 0.01;  // m, contraction on trigger
  double delta_t_src = 1.0;   // s, linear recovery time
};

// Trigger when f_now - f_prev > C'_src * f_prev, else linear decay to 0.
void src_step(double f_prev, double f_now, const SrcParams& params, MuscleCommandState& cmd,
              double dt);
bool src_triggered(double f_prev, double f_now, double c_src_prime);

// Antagonist inhibition: s = G (theta_ref - theta) / ||theta_ref - theta||;
// k_msc,i = k_ref,i if s_i < c_aic else 0. Degenerate direction keeps k_ref.
VecX aic_gains(const MusculoskeletalModel& model, const Posture& theta, const Posture& theta_ref,
               const VecX& k_ref, double c_aic, double epsilon = 1e-6);

struct ThermalState {
  double c1 = 25.0;  // degC motor core
  double c2 = 25.0;  // degC housing
};

struct ThermalParams {
  double C1 = 8.0;     // J/degC core capacity
  double C2 = 40.0;    // J/degC housing capacity
  double R1 = 1.5;     // degC/W core-housing resistance
  double R2 = 2.5;     // degC/W housing-ambient resistance
  double K = 2.0e-3;   // W/N^2 heating constant
  double c_a = 25.0;   // degC ambient
  double c1_max = 80.0;

  void check() const;
};

// One explicit-Euler step of the two-resistor motor temperature model.
ThermalState thermal_predict(const ThermalState& state, double f, const ThermalParams& params,
                             double dt);

struct ThermalLimitResult {
  VecX f_limit;               // per-step greatest admissible tension
  bool over_temperature = false;  // c1 already above c1_max at entry
};

// Greatest tension sequence (per-step bisection, tolerance 0.01 degC) whose
// rollout reaches but never exceeds c1_max, under box and smoothness bounds.
ThermalLimitResult thermal_tension_limit(const ThermalState& state, const ThermalParams& params,
                                         int horizon_steps, double dt, double f_min, double f_max,
                                         double smoothness, double f_prev = 0.0);

struct MtcGains {
  double d_gain = 1e-3;   // m/N, asymptotic relaxation per unit violation
  double dl_plus = 1e-4;  // m/N per step toward relaxation
  double dl_minus = 1e-4; // m/N per step toward recovery
};

void mtc_relax_step(double f, double f_limit, MuscleCommandState& cmd, const MtcGains& gains);

// Inhibition control: r = G thetadot / ||thetadot||; disable current where
// r_i / ldot_max,i > c_ic. Zero velocity leaves everything enabled.
std::vector<bool> ic_current_mask(const MusculoskeletalModel& model, const Posture& theta,
                                  const VecX& theta_dot, const VecX& ldot_max, double c_ic);

struct EcParams {
  double dt = 0.05;            // s, simulation interval
  double tolerance = 1e-3;     // rad, arrival threshold
  double max_time = 10.0;      // s, per-mask simulation budget
  VecX w3;                     // N, diagonal of W3 (defaults to ones)
};

struct EcPlan {
  std::vector<bool> mask;      // per muscle, false = pre-elongated (freed)
  int t_cost = 0;              // steps to arrival for the chosen mask
  bool timeout = false;        // no mask reached the target in time
  MatX elongation;             // steps x M, slack needed so freed muscles never bind
  int baseline_cost = 0;       // all-ones mask cost
};

// Exhaustive search over masks of the candidate set (size <= 12): for each
// mask simulate the masked velocity-bounded reach and keep the fastest.
// Ties prefer fewer masked muscles, then the lexicographically lowest mask.
EcPlan ec_plan(const MusculoskeletalModel& model, const Posture& theta_start,
               const Posture& theta_end, const std::vector<int>& candidate_muscles,
               const EcParams& params = {});

struct MrcParams {
  double dl_plus = 5e-4;    // m per tick of relaxation
  double dl_minus = 5e-3;   // m per tick of recovery
  double dl_max = 0.02;     // m cap on delta_l_mrc
  double f_taut = 5.0;      // N, below this a muscle is considered slack
  double dtheta_max = 0.1;  // rad, allowed posture drift
};

// One muscle-relaxation tick. Static mode relaxes the least-necessary taut
// muscle; moving mode reverts the most-necessary relaxed one. At most one
// update per tick.
void mrc_step(const MusculoskeletalModel& model, const Posture& theta, const Posture& theta_init,
              bool l_ref_moving, const VecX& f_meas, std::vector<MuscleCommandState>& cmds,
              const MrcParams& params, const VecX& tau_nec);

// ---------------------------------------------------------------------------
// Composed reflex stack: one 100 Hz tick in fixed order
// SRC -> AIC -> MTC -> IC -> MRC -> MSC.

struct SensorFrame {
  double time = 0.0;
  VecX l;        // muscle lengths (configured channel)
  VecX f;        // tensions
  VecX c1;       // core temperatures
  std::optional<VecX> theta;  // joint angles, only when the robot has encoders
  VecX contacts; // contact-force channels (may be empty)
};

struct ReflexConfig {
  bool src_enabled = false;
  SrcParams src;
  bool aic_enabled = false;
  double c_aic = 0.0;
  bool mtc_enabled = false;
  MtcGains mtc;
  ThermalParams thermal;
  int mtc_horizon = 20;
  double mtc_smoothness = 50.0;  // N per step
  bool ic_enabled = false;
  double c_ic = 0.0;
  bool mrc_enabled = false;
  MrcParams mrc;
  double tick_dt = 0.01;  // s (100 Hz)
};

struct MuscleCommand {
  double f_ref = 0.0;
  bool current_enabled = true;
};

// Deterministic reflex loop state; tick() is a pure function of the frame,
// the held command states and the config.
class ReflexStack {
 public:
  ReflexStack(const MusculoskeletalModel& model, ReflexConfig config);

  void reset(const VecX& l_ref, const VecX& k_msc, const VecX& f_bias);
  void set_l_ref(const VecX& l_ref);
  void set_theta_ref(const Posture& theta_ref);

  // theta: best joint-angle estimate for this tick; tau_nec: torque needed to
  // hold the posture (usually gravity compensation from the plant model).
  std::vector<MuscleCommand> tick(const SensorFrame& frame, const Posture& theta,
                                  const VecX& tau_nec);

  const std::vector<MuscleCommandState>& command_states() const { return cmds_; }
  std::vector<MuscleCommandState>& command_states() { return cmds_; }
  const std::vector<ThermalState>& thermal_states() const { return thermal_; }
  const VecX& last_f_limit() const { return f_limit_; }

 private:
  const MusculoskeletalModel& model_;
  ReflexConfig cfg_;
  std::vector<MuscleCommandState> cmds_;
  std::vector<ThermalState> thermal_;
  VecX k_ref_;
  VecX f_prev_;
  VecX f_limit_;
  Posture theta_ref_;
  Posture theta_prev_;
  Posture theta_init_;   // posture when l_ref last stopped moving
  bool have_prev_ = false;
  bool l_ref_moving_ = false;
  int ticks_since_ref_change_ = 0;
};

}  // namespace myo
