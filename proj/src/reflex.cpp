#include "myo/reflex.hpp"

#include "myo/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace myo {

double msc_tension(double l, const MuscleCommandState& cmd) {
  return cmd.f_bias + std::max(0.0, cmd.k_msc * (l - cmd.effective_l_ref()));
}

bool src_triggered(double f_prev, double f_now, double c_src_prime) {
  return f_now - f_prev > c_src_prime * f_prev;
}

void src_step(double f_prev, double f_now, const SrcParams& params, MuscleCommandState& cmd,
              double dt) {
  require(f_prev >= 0.0 && f_now >= 0.0, "tensions must be non-negative");
  require(dt > 0.0, "dt must be positive");
  if (src_triggered(f_prev, f_now, params.c_src_prime)) {
    cmd.delta_l_src = params.delta_l_src;
  } else {
    const double rate = params.delta_l_src / params.delta_t_src;
    cmd.delta_l_src = std::max(0.0, cmd.delta_l_src - rate * dt);
  }
}

VecX aic_gains(const MusculoskeletalModel& model, const Posture& theta, const Posture& theta_ref,
               const VecX& k_ref, double c_aic, double epsilon) {
  require(k_ref.size() == model.muscle_count(), "k_ref dimension mismatch");
  VecX diff = theta_ref - theta;
  const double norm = diff.norm();
  if (norm <= epsilon) return k_ref;  // no direction defined
  VecX s = muscle_jacobian(model, theta) * (diff / norm);
  VecX k = k_ref;
  for (int i = 0; i < k.size(); ++i)
    if (s[i] >= c_aic) k[i] = 0.0;
  return k;
}

void ThermalParams::check() const {
  require(C1 > 0 && C2 > 0 && R1 > 0 && R2 > 0 && K > 0, "thermal constants must be positive");
}

ThermalState thermal_predict(const ThermalState& state, double f, const ThermalParams& p,
                             double dt) {
  require(dt > 0.0 && dt <= 1.0, "thermal dt must be in (0, 1]");
  const double c1dot = (p.K / p.C1) * f * f - (state.c1 - state.c2) / (p.R1 * p.C1);
  const double c2dot = (state.c1 - state.c2) / (p.R1 * p.C2) - (state.c2 - p.c_a) / (p.R2 * p.C2);
  return {state.c1 + dt * c1dot, state.c2 + dt * c2dot};
}

ThermalLimitResult thermal_tension_limit(const ThermalState& state, const ThermalParams& params,
                                         int horizon_steps, double dt, double f_min, double f_max,
                                         double smoothness, double f_prev) {
  require(horizon_steps >= 1, "horizon must be at least one step");
  ThermalLimitResult out;
  out.f_limit = VecX::Constant(horizon_steps, f_min);
  if (state.c1 > params.c1_max) {
    out.over_temperature = true;
    return out;
  }

  ThermalState cur = state;
  double prev = f_prev;
  for (int t = 0; t < horizon_steps; ++t) {
    double lo = std::max(f_min, prev - smoothness);
    double hi = std::min(f_max, prev + smoothness);
    if (lo > hi) lo = hi;  // smoothness band fell outside the box

    auto peak_c1 = [&](double f) { return thermal_predict(cur, f, params, dt).c1; };

    double f_pick;
    if (peak_c1(hi) <= params.c1_max) {
      f_pick = hi;
    } else if (peak_c1(lo) > params.c1_max) {
      f_pick = lo;  // cannot stay under the cap, take the least-heating choice
    } else {
      double a = lo, b = hi;
      while (peak_c1(b) - peak_c1(a) > 0.01) {
        double mid = 0.5 * (a + b);
        (peak_c1(mid) <= params.c1_max ? a : b) = mid;
      }
      f_pick = a;  // safe end of the bracket
    }
    out.f_limit[t] = f_pick;
    cur = thermal_predict(cur, f_pick, params, dt);
    prev = f_pick;
  }
  return out;
}

void mtc_relax_step(double f, double f_limit, MuscleCommandState& cmd, const MtcGains& gains) {
  require(gains.d_gain > 0 && gains.dl_plus > 0 && gains.dl_minus > 0, "MTC gains must be positive");
  const double d = std::abs(f - f_limit);
  if (f > f_limit) {
    cmd.delta_l_mtc += std::min(gains.d_gain * d - cmd.delta_l_mtc, gains.dl_plus * d);
  } else {
    cmd.delta_l_mtc += std::max(0.0 - cmd.delta_l_mtc, -gains.dl_minus * d);
  }
  cmd.delta_l_mtc = std::max(0.0, cmd.delta_l_mtc);
}

std::vector<bool> ic_current_mask(const MusculoskeletalModel& model, const Posture& theta,
                                  const VecX& theta_dot, const VecX& ldot_max, double c_ic) {
  require(ldot_max.size() == model.muscle_count(), "ldot_max dimension mismatch");
  std::vector<bool> enabled(model.muscle_count(), true);
  const double norm = theta_dot.norm();
  if (norm <= 1e-9) return enabled;
  VecX r = muscle_jacobian(model, theta) * (theta_dot / norm);
  for (int i = 0; i < model.muscle_count(); ++i)
    if (r[i] / ldot_max[i] > c_ic) enabled[i] = false;
  return enabled;
}

namespace {

struct EcSimResult {
  int steps = 0;
  bool arrived = false;
  std::vector<Posture> path;
};

// Iterate the masked, velocity-bounded reach toward theta_end. Masked (freed)
// muscles carry no velocity constraint.
EcSimResult ec_simulate(const MusculoskeletalModel& model, const Posture& theta_start,
                        const Posture& theta_end, const std::vector<bool>& mask,
                        const EcParams& params) {
  const int n = model.joint_count();
  const int max_steps = static_cast<int>(std::ceil(params.max_time / params.dt));
  VecX w3 = params.w3.size() == n ? params.w3 : VecX::Ones(n);

  EcSimResult res;
  Posture theta = theta_start;
  res.path.push_back(theta);
  for (int step = 0; step < max_steps; ++step) {
    if ((theta_end - theta).lpNorm<Eigen::Infinity>() < params.tolerance) {
      res.arrived = true;
      res.steps = step;
      return res;
    }
    MatX G = muscle_jacobian(model, theta);
    qp::Problem q;
    q.H = 2.0 * MatX(w3.asDiagonal());
    q.g = -2.0 * (w3.asDiagonal() * (theta_end - theta));
    int rows = 0;
    for (int i = 0; i < model.muscle_count(); ++i)
      if (mask[i]) rows += 2;
    q.A_in.resize(rows, n);
    q.b_in.resize(rows);
    int r = 0;
    for (int i = 0; i < model.muscle_count(); ++i) {
      if (!mask[i]) continue;
      q.A_in.row(r) = G.row(i);
      q.b_in[r] = model.muscles[i].ldot_max * params.dt;
      ++r;
      q.A_in.row(r) = -G.row(i);
      q.b_in[r] = -model.muscles[i].ldot_min * params.dt;
      ++r;
    }
    auto sol = qp::solve(q, VecX::Zero(n));
    if (sol.x.lpNorm<Eigen::Infinity>() < 1e-12) break;  // wedged, no progress possible
    theta = model.clamp_to_limits(theta + sol.x);
    res.path.push_back(theta);
  }
  res.steps = static_cast<int>(res.path.size()) - 1;
  res.arrived = (theta_end - theta).lpNorm<Eigen::Infinity>() < params.tolerance;
  return res;
}

MatX ec_elongation_profile(const MusculoskeletalModel& model, const EcSimResult& sim,
                           const std::vector<bool>& mask, double dt) {
  const int m = model.muscle_count();
  const int steps = static_cast<int>(sim.path.size());
  MatX prof = MatX::Zero(steps, m);
  if (steps == 0) return prof;
  VecX l0 = muscle_lengths(model, sim.path.front());
  for (int t = 0; t < steps; ++t) {
    VecX lt = muscle_lengths(model, sim.path[t]);
    for (int i = 0; i < m; ++i) {
      if (mask[i]) continue;  // only freed muscles need pre-elongation
      double deficit = (lt[i] - l0[i]) - model.muscles[i].ldot_max * dt * t;
      prof(t, i) = std::max(0.0, deficit);
    }
  }
  return prof;
}

}  // namespace

EcPlan ec_plan(const MusculoskeletalModel& model, const Posture& theta_start,
               const Posture& theta_end, const std::vector<int>& candidate_muscles,
               const EcParams& params) {
  require(candidate_muscles.size() <= 12, "candidate set capped at 12 muscles (2^12 enumeration)");
  for (int c : candidate_muscles)
    require(c >= 0 && c < model.muscle_count(), "candidate muscle index out of range");

  const int m = model.muscle_count();
  const int k = static_cast<int>(candidate_muscles.size());
  const int timeout_cost = std::numeric_limits<int>::max();

  EcPlan best;
  int best_cost = timeout_cost;
  int best_progress_cost = timeout_cost;
  double best_progress = std::numeric_limits<double>::infinity();
  std::vector<bool> best_mask;
  EcSimResult best_sim;

  int baseline = 0;
  for (unsigned subset = 0; subset < (1u << k); ++subset) {
    std::vector<bool> mask(m, true);
    int masked_count = 0;
    for (int c = 0; c < k; ++c) {
      if (subset & (1u << c)) {
        mask[candidate_muscles[c]] = false;
        ++masked_count;
      }
    }
    EcSimResult sim = ec_simulate(model, theta_start, theta_end, mask, params);
    if (subset == 0) baseline = sim.arrived ? sim.steps : timeout_cost;

    if (sim.arrived) {
      bool better;
      if (best_cost == timeout_cost || sim.steps < best_cost) {
        better = true;
      } else if (sim.steps > best_cost) {
        better = false;
      } else {
        int prev_masked = static_cast<int>(std::count(best_mask.begin(), best_mask.end(), false));
        better = masked_count != prev_masked ? masked_count < prev_masked : mask < best_mask;
      }
      if (better) {
        best_cost = sim.steps;
        best_mask = mask;
        best_sim = sim;
      }
    } else {
      double progress = (theta_end - sim.path.back()).norm();
      if (best_cost == timeout_cost && progress < best_progress) {
        best_progress = progress;
        best_progress_cost = sim.steps;
        best_mask = mask;
        best_sim = sim;
      }
    }
  }

  best.baseline_cost = baseline;
  if (best_cost < timeout_cost) {
    best.t_cost = best_cost;
    best.timeout = false;
  } else {
    best.t_cost = best_progress_cost;
    best.timeout = true;
  }
  best.mask = best_mask;
  best.elongation = ec_elongation_profile(model, best_sim, best_mask, params.dt);
  return best;
}

void mrc_step(const MusculoskeletalModel& model, const Posture& theta, const Posture& theta_init,
              bool l_ref_moving, const VecX& f_meas, std::vector<MuscleCommandState>& cmds,
              const MrcParams& params, const VecX& tau_nec) {
  const int m = model.muscle_count();
  require(static_cast<int>(cmds.size()) == m, "command state count mismatch");
  require(f_meas.size() == m, "f_meas dimension mismatch");

  // f_nec: tensions needed to hold tau_nec, from the relaxed allocation.
  MatX G = muscle_jacobian(model, theta);
  VecX f_min(m), f_max(m);
  for (int i = 0; i < m; ++i) {
    f_min[i] = model.muscles[i].f_min;
    f_max[i] = model.muscles[i].f_max;
  }
  AllocationProblem ap = AllocationProblem::with_defaults(G, tau_nec, f_min, f_max);
  VecX f_nec = allocate_relaxed(ap).f;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);

  if (!l_ref_moving) {
    if ((theta - theta_init).norm() > params.dtheta_max) return;  // drift guard
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f_nec[a] < f_nec[b]; });
    for (int i : order) {
      if (f_meas[i] <= params.f_taut) continue;
      if (cmds[i].delta_l_mrc + params.dl_plus > params.dl_max) continue;
      cmds[i].delta_l_mrc = std::min(cmds[i].delta_l_mrc + params.dl_plus, params.dl_max);
      return;  // one relaxation per tick
    }
  } else {
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return f_nec[a] > f_nec[b]; });
    for (int i : order) {
      if (cmds[i].delta_l_mrc <= 0.0) continue;
      cmds[i].delta_l_mrc = std::max(cmds[i].delta_l_mrc - params.dl_minus, 0.0);
      return;
    }
  }
}

// ---------------------------------------------------------------------------

ReflexStack::ReflexStack(const MusculoskeletalModel& model, ReflexConfig config)
    : model_(model), cfg_(std::move(config)) {
  const int m = model_.muscle_count();
  cmds_.resize(m);
  thermal_.assign(m, ThermalState{cfg_.thermal.c_a, cfg_.thermal.c_a});
  k_ref_ = VecX::Zero(m);
  f_prev_ = VecX::Zero(m);
  f_limit_ = VecX::Constant(m, std::numeric_limits<double>::infinity());
  theta_ref_ = VecX::Zero(model_.joint_count());
  theta_prev_ = VecX::Zero(model_.joint_count());
  theta_init_ = VecX::Zero(model_.joint_count());
}

void ReflexStack::reset(const VecX& l_ref, const VecX& k_msc, const VecX& f_bias) {
  const int m = model_.muscle_count();
  require(l_ref.size() == m && k_msc.size() == m && f_bias.size() == m,
          "reset vector dimension mismatch");
  for (int i = 0; i < m; ++i) {
    cmds_[i] = MuscleCommandState{};
    cmds_[i].l_ref = l_ref[i];
    cmds_[i].k_msc = k_msc[i];
    cmds_[i].f_bias = f_bias[i];
  }
  k_ref_ = k_msc;
  have_prev_ = false;
  l_ref_moving_ = false;
  ticks_since_ref_change_ = 0;
}

void ReflexStack::set_l_ref(const VecX& l_ref) {
  require(l_ref.size() == model_.muscle_count(), "l_ref dimension mismatch");
  bool changed = false;
  for (int i = 0; i < l_ref.size(); ++i) {
    if (cmds_[i].l_ref != l_ref[i]) changed = true;
    cmds_[i].l_ref = l_ref[i];
  }
  if (changed) {
    l_ref_moving_ = true;
    ticks_since_ref_change_ = 0;
  }
}

void ReflexStack::set_theta_ref(const Posture& theta_ref) {
  require(theta_ref.size() == model_.joint_count(), "theta_ref dimension mismatch");
  theta_ref_ = theta_ref;
}

std::vector<MuscleCommand> ReflexStack::tick(const SensorFrame& frame, const Posture& theta,
                                             const VecX& tau_nec) {
  const int m = model_.muscle_count();
  require(frame.l.size() == m && frame.f.size() == m, "sensor frame dimension mismatch");

  // Settle detection: l_ref counts as static after a quiet tick.
  if (l_ref_moving_) {
    if (++ticks_since_ref_change_ > 1) {
      l_ref_moving_ = false;
      theta_init_ = theta;
    }
  }

  // SRC
  if (cfg_.src_enabled && have_prev_) {
    for (int i = 0; i < m; ++i) src_step(f_prev_[i], frame.f[i], cfg_.src, cmds_[i], cfg_.tick_dt);
  }

  // AIC
  if (cfg_.aic_enabled) {
    VecX k = aic_gains(model_, theta, theta_ref_, k_ref_, cfg_.c_aic);
    for (int i = 0; i < m; ++i) cmds_[i].k_msc = k[i];
  }

  // MTC: advance the thermal estimate on measured tension, then relax.
  if (cfg_.mtc_enabled) {
    for (int i = 0; i < m; ++i) {
      thermal_[i] = thermal_predict(thermal_[i], frame.f[i], cfg_.thermal, cfg_.tick_dt);
      auto lim = thermal_tension_limit(thermal_[i], cfg_.thermal, cfg_.mtc_horizon, cfg_.tick_dt,
                                       model_.muscles[i].f_min, model_.muscles[i].f_max,
                                       cfg_.mtc_smoothness, frame.f[i]);
      f_limit_[i] = lim.over_temperature ? model_.muscles[i].f_min : lim.f_limit[0];
      mtc_relax_step(frame.f[i], f_limit_[i], cmds_[i], cfg_.mtc);
    }
  }

  // IC
  if (cfg_.ic_enabled && have_prev_) {
    VecX theta_dot = (theta - theta_prev_) / cfg_.tick_dt;
    VecX ldot_max(m);
    for (int i = 0; i < m; ++i) ldot_max[i] = model_.muscles[i].ldot_max;
    auto enabled = ic_current_mask(model_, theta, theta_dot, ldot_max, cfg_.c_ic);
    for (int i = 0; i < m; ++i) cmds_[i].current_enabled = enabled[i];
  } else {
    for (int i = 0; i < m; ++i) cmds_[i].current_enabled = true;
  }

  // MRC
  if (cfg_.mrc_enabled) {
    mrc_step(model_, theta, theta_init_, l_ref_moving_, frame.f, cmds_, cfg_.mrc, tau_nec);
  }

  // MSC
  std::vector<MuscleCommand> out(m);
  for (int i = 0; i < m; ++i) {
    out[i].f_ref = msc_tension(frame.l[i], cmds_[i]);
    out[i].current_enabled = cmds_[i].current_enabled;
  }

  f_prev_ = frame.f;
  theta_prev_ = theta;
  have_prev_ = true;
  return out;
}

}  // namespace myo
