#include "myo/scenario.hpp"

#include "myo/adaptation.hpp"
#include "myo/estimation.hpp"
#include "myo/io.hpp"
#include "myo/reflex.hpp"
#include "myo/schema.hpp"
#include "myo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace myo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

VecX vecx_from(const json& j, int expect, const std::string& where) {
  if (j.is_number()) return VecX::Constant(expect, j.get<double>());
  require(j.is_array() && static_cast<int>(j.size()) == expect,
          where + " must be a number or an array of length " + std::to_string(expect));
  VecX v(expect);
  for (int i = 0; i < expect; ++i) v[i] = j[i].get<double>();
  return v;
}

struct TimelineEvent {
  double t = 0.0;
  std::string action;
  json value;
  int muscle = -1;
};

ThermalParams thermal_from(const json& j) {
  reject_unknown_keys(j, {"C1", "C2", "R1", "R2", "K", "c_a", "c1_max"}, "sim.thermal");
  ThermalParams p;
  p.C1 = j.value("C1", p.C1);
  p.C2 = j.value("C2", p.C2);
  p.R1 = j.value("R1", p.R1);
  p.R2 = j.value("R2", p.R2);
  p.K = j.value("K", p.K);
  p.c_a = j.value("c_a", p.c_a);
  p.c1_max = j.value("c1_max", p.c1_max);
  p.check();
  return p;
}

}  // namespace

void apply_override(json& root, const std::string& dotted_key, const std::string& value) {
  json* node = &root;
  size_t start = 0;
  while (true) {
    size_t dot = dotted_key.find('.', start);
    std::string key = dotted_key.substr(start, dot == std::string::npos ? dot : dot - start);
    require(!key.empty(), "empty key segment in override " + dotted_key);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

ScenarioResult run_scenario(const json& config, const std::string& base_dir,
                            const std::string& out_dir) {
  reject_unknown_keys(config,
                      {"name", "morphology", "duration", "seed", "sim", "sensors", "reflex",
                       "estimation", "schema", "timeline", "telemetry", "summary"},
                      "scenario");

  // --- model -----------------------------------------------------------
  MusculoskeletalModel model;
  require(config.contains("morphology"), "scenario needs a morphology");
  if (config.at("morphology").is_string()) {
    fs::path p = config.at("morphology").get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    model = load_morphology(p.string());
  } else {
    model = morphology_from_json(config.at("morphology"));
  }
  const int n = model.joint_count();
  const int m = model.muscle_count();

  // --- sim params ------------------------------------------------------
  SimParams sp;
  if (config.contains("sim")) {
    const json& sj = config.at("sim");
    reject_unknown_keys(sj,
                        {"dt", "gravity", "inertia", "damping", "masses", "thermal", "actuator",
                         "paper_tension_law", "contacts"},
                        "sim");
    sp.dt = sj.value("dt", sp.dt);
    if (sj.contains("gravity")) {
      auto g = sj.at("gravity");
      require(g.is_array() && g.size() == 3, "sim.gravity must be a 3-vector");
      sp.gravity = Vec3(g[0].get<double>(), g[1].get<double>(), g[2].get<double>());
    }
    if (sj.contains("inertia")) sp.inertia = vecx_from(sj.at("inertia"), n, "sim.inertia");
    if (sj.contains("damping")) sp.damping = vecx_from(sj.at("damping"), n, "sim.damping");
    for (const auto& mj : sj.value("masses", json::array())) {
      reject_unknown_keys(mj, {"link", "mass", "com"}, "sim.masses");
      LinkMass lm;
      lm.link = mj.at("link").get<int>();
      lm.mass = mj.at("mass").get<double>();
      auto c = mj.value("com", json::array({0.0, 0.0, 0.0}));
      lm.com = Vec3(c[0].get<double>(), c[1].get<double>(), c[2].get<double>());
      sp.masses.push_back(lm);
    }
    if (sj.contains("thermal")) sp.thermal = thermal_from(sj.at("thermal"));
    if (sj.contains("actuator")) {
      const json& aj = sj.at("actuator");
      reject_unknown_keys(aj, {"pulley_radius", "f_act_max", "backdrivable", "kp_tension"},
                          "sim.actuator");
      sp.actuator.pulley_radius = aj.value("pulley_radius", sp.actuator.pulley_radius);
      sp.actuator.f_act_max = aj.value("f_act_max", sp.actuator.f_act_max);
      sp.actuator.backdrivable = aj.value("backdrivable", sp.actuator.backdrivable);
      sp.actuator.kp_tension = aj.value("kp_tension", sp.actuator.kp_tension);
    }
    sp.paper_tension_law = sj.value("paper_tension_law", false);
    for (const auto& cj : sj.value("contacts", json::array())) {
      reject_unknown_keys(cj, {"end_effector", "plane_point", "plane_normal", "stiffness"},
                          "sim.contacts");
      ContactModel cm;
      cm.end_effector = cj.value("end_effector", 0);
      auto pp = cj.value("plane_point", json::array({0.0, 0.0, 0.0}));
      cm.plane_point = Vec3(pp[0].get<double>(), pp[1].get<double>(), pp[2].get<double>());
      auto pn = cj.value("plane_normal", json::array({0.0, 1.0, 0.0}));
      cm.plane_normal = Vec3(pn[0].get<double>(), pn[1].get<double>(), pn[2].get<double>());
      cm.stiffness = cj.value("stiffness", 1000.0);
      sp.contacts.push_back(cm);
    }
  }

  // --- sensors ---------------------------------------------------------
  NoiseSpec noise;
  bool theta_sensor = true;
  LengthChannel channel = LengthChannel::MotorSide;
  if (config.contains("sensors")) {
    const json& nj = config.at("sensors");
    reject_unknown_keys(nj, {"length_channel", "theta", "noise"}, "sensors");
    std::string ch = nj.value("length_channel", "motor");
    require(ch == "motor" || ch == "joint", "sensors.length_channel must be motor or joint");
    channel = ch == "motor" ? LengthChannel::MotorSide : LengthChannel::JointSide;
    theta_sensor = nj.value("theta", true);
    if (nj.contains("noise")) {
      const json& nn = nj.at("noise");
      reject_unknown_keys(nn, {"l", "f", "c", "theta", "contact"}, "sensors.noise");
      noise.sigma_l = nn.value("l", 0.0);
      noise.sigma_f = nn.value("f", 0.0);
      noise.sigma_c = nn.value("c", 0.0);
      noise.sigma_theta = nn.value("theta", 0.0);
      noise.sigma_contact = nn.value("contact", 0.0);
    }
  }

  // --- reflex ----------------------------------------------------------
  ReflexConfig rc;
  rc.thermal = sp.thermal;
  VecX k_msc0 = VecX::Constant(m, 200.0);
  VecX f_bias0 = VecX::Constant(m, 5.0);
  if (config.contains("reflex")) {
    const json& rj = config.at("reflex");
    reject_unknown_keys(rj, {"tick_dt", "k_msc", "f_bias", "src", "aic", "mtc", "ic", "mrc"},
                        "reflex");
    rc.tick_dt = rj.value("tick_dt", rc.tick_dt);
    if (rj.contains("k_msc")) k_msc0 = vecx_from(rj.at("k_msc"), m, "reflex.k_msc");
    if (rj.contains("f_bias")) f_bias0 = vecx_from(rj.at("f_bias"), m, "reflex.f_bias");
    if (rj.contains("src")) {
      const json& sj = rj.at("src");
      reject_unknown_keys(sj, {"enabled", "c_src_prime", "delta_l", "delta_t"}, "reflex.src");
      rc.src_enabled = sj.value("enabled", false);
      rc.src.c_src_prime = sj.value("c_src_prime", rc.src.c_src_prime);
      rc.src.delta_l_src = sj.value("delta_l", rc.src.delta_l_src);
      rc.src.delta_t_src = sj.value("delta_t", rc.src.delta_t_src);
    }
    if (rj.contains("aic")) {
      const json& aj = rj.at("aic");
      reject_unknown_keys(aj, {"enabled", "c_aic"}, "reflex.aic");
      rc.aic_enabled = aj.value("enabled", false);
      rc.c_aic = aj.value("c_aic", 0.0);
    }
    if (rj.contains("mtc")) {
      const json& mj = rj.at("mtc");
      reject_unknown_keys(mj, {"enabled", "d_gain", "dl_plus", "dl_minus", "horizon", "smoothness"},
                          "reflex.mtc");
      rc.mtc_enabled = mj.value("enabled", false);
      rc.mtc.d_gain = mj.value("d_gain", rc.mtc.d_gain);
      rc.mtc.dl_plus = mj.value("dl_plus", rc.mtc.dl_plus);
      rc.mtc.dl_minus = mj.value("dl_minus", rc.mtc.dl_minus);
      rc.mtc_horizon = mj.value("horizon", rc.mtc_horizon);
      rc.mtc_smoothness = mj.value("smoothness", rc.mtc_smoothness);
    }
    if (rj.contains("ic")) {
      const json& ij = rj.at("ic");
      reject_unknown_keys(ij, {"enabled", "c_ic"}, "reflex.ic");
      rc.ic_enabled = ij.value("enabled", false);
      rc.c_ic = ij.value("c_ic", 0.0);
    }
    if (rj.contains("mrc")) {
      const json& mj = rj.at("mrc");
      reject_unknown_keys(mj,
                          {"enabled", "dl_plus", "dl_minus", "dl_max", "f_taut", "dtheta_max"},
                          "reflex.mrc");
      rc.mrc_enabled = mj.value("enabled", false);
      rc.mrc.dl_plus = mj.value("dl_plus", rc.mrc.dl_plus);
      rc.mrc.dl_minus = mj.value("dl_minus", rc.mrc.dl_minus);
      rc.mrc.dl_max = mj.value("dl_max", rc.mrc.dl_max);
      rc.mrc.f_taut = mj.value("f_taut", rc.mrc.f_taut);
      rc.mrc.dtheta_max = mj.value("dtheta_max", rc.mrc.dtheta_max);
    }
  }

  // --- estimation ------------------------------------------------------
  bool ekf_enabled = false;
  double ekf_q = 1e-6, ekf_r = 1e-6, vision_period = 0.0, marker_sigma = 0.0;
  int vision_ee = 0;
  if (config.contains("estimation")) {
    const json& ej = config.at("estimation");
    reject_unknown_keys(ej, {"enabled", "q", "r", "vision_period", "marker_sigma", "end_effector"},
                        "estimation");
    ekf_enabled = ej.value("enabled", false);
    ekf_q = ej.value("q", ekf_q);
    ekf_r = ej.value("r", ekf_r);
    vision_period = ej.value("vision_period", 0.0);
    marker_sigma = ej.value("marker_sigma", 0.0);
    vision_ee = ej.value("end_effector", 0);
  }
  require(theta_sensor || ekf_enabled, "scenario needs a theta sensor or EKF estimation");

  // --- schema / anomaly -------------------------------------------------
  bool anomaly_enabled = false;
  MaskedAutoencoder net;
  AdaptationState adapt;
  double schema_tick_dt = 0.1;
  double k_sigma = 5.0;
  int consecutive = 10;
  if (config.contains("schema")) {
    const json& hj = config.at("schema");
    reject_unknown_keys(hj, {"net", "stats", "k_sigma", "consecutive", "tick_dt"}, "schema");
    fs::path np = hj.at("net").get<std::string>();
    if (np.is_relative()) np = fs::path(base_dir) / np;
    net = load_network(np.string());
    fs::path stp = hj.at("stats").get<std::string>();
    if (stp.is_relative()) stp = fs::path(base_dir) / stp;
    adapt = AdaptationState::fresh(m);
    adapt.stats = load_residual_stats(stp.string());
    k_sigma = hj.value("k_sigma", 5.0);
    consecutive = hj.value("consecutive", 10);
    schema_tick_dt = hj.value("tick_dt", 0.1);
    anomaly_enabled = true;
  }

  // --- timeline ----------------------------------------------------------
  std::vector<TimelineEvent> timeline;
  for (const auto& tj : config.value("timeline", json::array())) {
    reject_unknown_keys(tj, {"t", "action", "value", "muscle"}, "timeline event");
    TimelineEvent ev;
    ev.t = tj.at("t").get<double>();
    ev.action = tj.at("action").get<std::string>();
    if (tj.contains("value")) ev.value = tj.at("value");
    ev.muscle = tj.value("muscle", -1);
    const bool known = ev.action == "set_l_ref" || ev.action == "set_theta_ref" ||
                       ev.action == "set_k_msc" || ev.action == "set_f_bias" ||
                       ev.action == "rupture";
    require(known, "unknown timeline action: " + ev.action);
    timeline.push_back(ev);
  }
  std::stable_sort(timeline.begin(), timeline.end(),
                   [](const TimelineEvent& a, const TimelineEvent& b) { return a.t < b.t; });

  // --- run ---------------------------------------------------------------
  const double duration = config.value("duration", 1.0);
  const std::uint64_t seed = config.value("seed", 0ull);
  std::mt19937_64 rng(seed);

  Simulator sim(model, sp);
  ReflexStack stack(model, rc);
  VecX l0 = sim.read_sensors(NoiseSpec{}, rng, true, channel).l;
  stack.reset(l0, k_msc0, f_bias0);

  EkfState ekf;
  ekf.theta = VecX::Zero(n);
  ekf.P = 1e-4 * MatX::Identity(n, n);
  EkfParams ekf_params = EkfParams::diagonal(n, m, ekf_q, ekf_r);
  VecX prev_l = l0;

  fs::create_directories(out_dir);
  const std::string tel_name = config.value("telemetry", std::string("telemetry.csv"));
  const std::string sum_name = config.value("summary", std::string("summary.json"));
  ScenarioResult result;
  result.telemetry_path = (fs::path(out_dir) / tel_name).string();
  result.summary_path = (fs::path(out_dir) / sum_name).string();

  std::ofstream tel(result.telemetry_path);
  require(tel.good(), "cannot open telemetry for writing: " + result.telemetry_path);
  {
    std::string h = "tick,time";
    for (int j = 0; j < n; ++j) h += ",theta_ref_" + std::to_string(j);
    for (int j = 0; j < n; ++j) h += ",theta_" + std::to_string(j);
    for (int j = 0; j < n; ++j) h += ",theta_est_" + std::to_string(j);
    h += ",trace_P";
    for (int i = 0; i < m; ++i) h += ",l_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",f_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",f_ref_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",k_msc_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",dl_src_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",dl_mtc_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",dl_mrc_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",c1_" + std::to_string(i);
    for (int i = 0; i < m; ++i) h += ",cur_" + std::to_string(i);
    for (int c = 0; c < static_cast<int>(sp.contacts.size()); ++c)
      h += ",contact_" + std::to_string(c);
    h += ",anomaly";
    tel << h << "\n";
  }

  const int plant_per_reflex = std::max(1, static_cast<int>(std::llround(rc.tick_dt / sp.dt)));
  const int reflex_per_schema =
      std::max(1, static_cast<int>(std::llround(schema_tick_dt / rc.tick_dt)));
  const long long total_steps = std::llround(duration / sp.dt);

  Posture theta_ref = VecX::Zero(n);
  bool have_theta_ref = false;
  size_t next_event = 0;
  std::vector<MuscleCommand> commands(m);
  for (int i = 0; i < m; ++i) commands[i].f_ref = f_bias0[i];

  json summary;
  summary["name"] = config.value("name", std::string("scenario"));
  summary["seed"] = seed;
  double max_c1 = -1e300;
  double track_sq = 0.0;
  long long track_count = 0;
  double sum_f_first = -1.0, sum_f_final = 0.0, sum_f_max = 0.0;
  json rupture_log = json::array();
  std::vector<long long> injected_at(m, -1);
  double last_vision = 0.0;
  long long reflex_ticks = 0;
  double anomaly_value = 0.0;

  for (long long step = 0; step <= total_steps; ++step) {
    const double now = step * sp.dt;
    while (next_event < timeline.size() && timeline[next_event].t <= now + 1e-12) {
      const auto& ev = timeline[next_event];
      if (ev.action == "set_l_ref") {
        stack.set_l_ref(vecx_from(ev.value, m, "set_l_ref value"));
      } else if (ev.action == "set_theta_ref") {
        theta_ref = vecx_from(ev.value, n, "set_theta_ref value");
        have_theta_ref = true;
        stack.set_theta_ref(theta_ref);
        stack.set_l_ref(muscle_lengths(model, model.clamp_to_limits(theta_ref)));
      } else if (ev.action == "set_k_msc") {
        VecX k = vecx_from(ev.value, m, "set_k_msc value");
        for (int i = 0; i < m; ++i) stack.command_states()[i].k_msc = k[i];
      } else if (ev.action == "set_f_bias") {
        VecX fb = vecx_from(ev.value, m, "set_f_bias value");
        for (int i = 0; i < m; ++i) stack.command_states()[i].f_bias = fb[i];
      } else if (ev.action == "rupture") {
        require(ev.muscle >= 0 && ev.muscle < m, "rupture muscle index out of range");
        sim.rupture_muscle(ev.muscle);
        injected_at[ev.muscle] = reflex_ticks;
      }
      ++next_event;
    }

    if (step % plant_per_reflex == 0) {
      SensorFrame frame = sim.read_sensors(noise, rng, theta_sensor, channel);

      Posture theta_ctrl;
      if (ekf_enabled) {
        ekf = ekf_predict(ekf, frame.l - prev_l, model, ekf_params);
        ekf = ekf_update(ekf, frame.l, model, ekf_params).state;
        if (vision_period > 0.0 && now - last_vision >= vision_period - 1e-12 &&
            !model.end_effectors.empty()) {
          Vec3 marker = sim.marker_position(vision_ee, marker_sigma, rng);
          ekf.theta = vision_correct(ekf.theta, marker, model, vision_ee).theta;
          last_vision = now;
        }
        theta_ctrl = ekf.theta;
      } else {
        theta_ctrl = *frame.theta;
      }
      prev_l = frame.l;

      VecX tau_nec = sim.gravity_torque(theta_ctrl);
      commands = stack.tick(frame, theta_ctrl, tau_nec);

      if (anomaly_enabled && reflex_ticks % reflex_per_schema == 0) {
        VecX x(net.input_dim());
        x << theta_ctrl, frame.f, frame.l;
        AnomalyScore score = masked_anomaly_score(net, x, adapt.rupture);
        anomaly_value = score.aggregate;
        auto events = detect_rupture(adapt, score.per_muscle, k_sigma, consecutive);
        for (const auto& ev : events) {
          json e;
          e["muscle"] = ev.muscle;
          e["tick"] = reflex_ticks;
          e["residual"] = ev.residual;
          e["threshold"] = ev.threshold;
          if (injected_at[ev.muscle] >= 0)
            e["latency_ticks"] = reflex_ticks - injected_at[ev.muscle];
          rupture_log.push_back(e);
        }
      }

      // Telemetry row.
      const auto& cs = stack.command_states();
      std::string row = std::to_string(reflex_ticks) + "," + format_double(now);
      for (int j = 0; j < n; ++j) row += "," + format_double(have_theta_ref ? theta_ref[j] : 0.0);
      for (int j = 0; j < n; ++j) row += "," + format_double(sim.state().theta[j]);
      for (int j = 0; j < n; ++j) row += "," + format_double(theta_ctrl[j]);
      row += "," + format_double(ekf_enabled ? ekf.P.trace() : 0.0);
      for (int i = 0; i < m; ++i) row += "," + format_double(frame.l[i]);
      for (int i = 0; i < m; ++i) row += "," + format_double(frame.f[i]);
      for (int i = 0; i < m; ++i) row += "," + format_double(commands[i].f_ref);
      for (int i = 0; i < m; ++i) row += "," + format_double(cs[i].k_msc);
      for (int i = 0; i < m; ++i) row += "," + format_double(cs[i].delta_l_src);
      for (int i = 0; i < m; ++i) row += "," + format_double(cs[i].delta_l_mtc);
      for (int i = 0; i < m; ++i) row += "," + format_double(cs[i].delta_l_mrc);
      for (int i = 0; i < m; ++i) row += "," + format_double(frame.c1[i]);
      for (int i = 0; i < m; ++i) row += "," + std::string(commands[i].current_enabled ? "1" : "0");
      for (int c = 0; c < frame.contacts.size(); ++c)
        row += "," + format_double(frame.contacts[c]);
      row += "," + format_double(anomaly_value);
      tel << row << "\n";

      for (int i = 0; i < m; ++i) max_c1 = std::max(max_c1, sim.state().thermal[i].c1);
      if (have_theta_ref) {
        track_sq += (sim.state().theta - theta_ref).squaredNorm();
        track_count += n;
      }
      const double sum_f = frame.f.sum();
      if (sum_f_first < 0.0) sum_f_first = sum_f;
      sum_f_final = sum_f;
      sum_f_max = std::max(sum_f_max, sum_f);
      ++reflex_ticks;
    }

    if (step < total_steps) sim.step(commands);
  }

  summary["ticks"] = reflex_ticks;
  summary["duration"] = duration;
  summary["tracking_rmse"] = track_count > 0 ? std::sqrt(track_sq / track_count) : 0.0;
  summary["max_c1"] = max_c1;
  summary["c1_max_param"] = sp.thermal.c1_max;
  summary["sum_tension_first"] = sum_f_first < 0.0 ? 0.0 : sum_f_first;
  summary["sum_tension_final"] = sum_f_final;
  summary["sum_tension_max"] = sum_f_max;
  summary["rupture_events"] = rupture_log;
  summary["diverged"] = false;

  std::ofstream sf(result.summary_path);
  require(sf.good(), "cannot open summary for writing: " + result.summary_path);
  sf << summary.dump(2) << "\n";
  result.summary = summary;
  return result;
}

ScenarioResult run_scenario_file(const std::string& scenario_path, const std::string& out_dir) {
  std::ifstream in(scenario_path);
  require(in.good(), "cannot open scenario file: " + scenario_path);
  json config = json::parse(in);
  return run_scenario(config, fs::path(scenario_path).parent_path().string(), out_dir);
}

}  // namespace myo
