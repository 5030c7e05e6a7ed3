#include "myo/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace myo {

int RuptureMask::count_ruptured() const {
  int n = 0;
  for (int i = 0; i < healthy.size(); ++i)
    if (healthy[i] < 0.5) ++n;
  return n;
}

ResidualStats calibrate_residuals(const MaskedAutoencoder& net, const Dataset& data) {
  require(data.size() > 1, "calibration needs at least two samples");
  const int m = net.out_layout.width("f");
  MatX residuals(data.size(), m);
  for (int r = 0; r < data.size(); ++r)
    residuals.row(r) = anomaly_score(net, data.x_in.row(r).transpose()).per_muscle.transpose();

  ResidualStats stats;
  stats.mean = residuals.colwise().mean();
  VecX var =
      (residuals.rowwise() - stats.mean.transpose()).array().square().colwise().mean();
  stats.std = var.array().sqrt().max(1e-12).matrix();
  stats.calibrated = true;
  return stats;
}

std::vector<RuptureEvent> detect_rupture(AdaptationState& state, const VecX& per_muscle_residual,
                                         double k_sigma, int consecutive_ticks) {
  require(state.stats.calibrated, "residual statistics are not calibrated");
  const int m = static_cast<int>(per_muscle_residual.size());
  require(state.stats.mean.size() == m, "residual dimension mismatch");

  std::vector<RuptureEvent> events;
  for (int i = 0; i < m; ++i) {
    if (!state.rupture.is_healthy(i)) continue;  // sticky
    const double threshold = state.stats.mean[i] + k_sigma * state.stats.std[i];
    if (per_muscle_residual[i] > threshold) {
      if (++state.streak[i] >= consecutive_ticks) {
        state.rupture.healthy[i] = 0.0;
        events.push_back({i, per_muscle_residual[i], threshold});
      }
    } else {
      state.streak[i] = 0;
    }
  }
  return events;
}

void check_controllable(const MusculoskeletalModel& model, const RuptureMask& mask,
                        double eps_arm) {
  auto postures = sample_postures(model, 16);
  for (int j = 0; j < model.joint_count(); ++j) {
    bool movable = false;
    for (const auto& theta : postures) {
      MatX G = muscle_jacobian(model, theta);
      for (int i = 0; i < model.muscle_count() && !movable; ++i)
        if (mask.is_healthy(i) && std::abs(G(i, j)) > eps_arm) movable = true;
      if (movable) break;
    }
    require(movable, "joint " + std::to_string(j) + " has no healthy muscle");
  }
}

namespace {

// Replace ruptured muscles' f/l entries by their training means so the
// standardized values are exactly zero. All-healthy masks are a no-op.
VecX zero_ruptured_inputs(const MaskedAutoencoder& net, const VecX& x, const RuptureMask& mask) {
  if (mask.count_ruptured() == 0) return x;
  VecX out = x;
  const int fo = net.in_layout.offset("f");
  const int lo = net.in_layout.offset("l");
  for (int i = 0; i < mask.healthy.size(); ++i) {
    if (mask.is_healthy(i)) continue;
    out[fo + i] = net.in_mean[fo + i];
    out[lo + i] = net.in_mean[lo + i];
  }
  return out;
}

}  // namespace

InferResult masked_infer(const MaskedAutoencoder& net, const VecX& knowns, const VecX& m,
                         const RuptureMask& mask) {
  return infer(net, zero_ruptured_inputs(net, knowns, mask), m);
}

AnomalyScore masked_anomaly_score(const MaskedAutoencoder& net, const VecX& x,
                                  const RuptureMask& mask) {
  return anomaly_score(net, zero_ruptured_inputs(net, x, mask), mask.healthy);
}

LatentControlResult masked_latent_control(const MaskedAutoencoder& net,
                                          const MusculoskeletalModel& model, const VecX& current,
                                          const VecX& theta_ref,
                                          const LatentControlWeights& weights, int iters,
                                          const RuptureMask& mask, double delta_l_slack) {
  VecX objective_mask;
  if (mask.count_ruptured() > 0) {
    objective_mask = VecX::Ones(net.output_dim());
    const int fo = net.out_layout.offset("f");
    const int lo = net.out_layout.offset("l");
    for (int i = 0; i < mask.healthy.size(); ++i) {
      if (mask.is_healthy(i)) continue;
      objective_mask[fo + i] = 0.0;
      objective_mask[lo + i] = 0.0;
    }
  }
  LatentControlResult res = latent_control(net, zero_ruptured_inputs(net, current, mask),
                                           theta_ref, weights, iters, objective_mask);
  if (mask.count_ruptured() > 0) {
    // Command slack on ruptured muscles: longest reachable length + margin.
    auto postures = sample_postures(model, 64);
    VecX longest = VecX::Zero(model.muscle_count());
    for (const auto& theta : postures)
      longest = longest.cwiseMax(muscle_lengths(model, theta));
    for (int i = 0; i < mask.healthy.size(); ++i)
      if (!mask.is_healthy(i)) res.l_command[i] = longest[i] + delta_l_slack;
  }
  return res;
}

MaskedAutoencoder grow_static_net(const MaskedAutoencoder& net, double init_scale,
                                  std::uint64_t seed) {
  const int n = net.in_layout.width("theta");
  const int m = net.in_layout.width("f");
  require(net.in_layout.count() == 3 && net.out_layout.count() == 3,
          "grow_static_net expects the (theta, f, l) static layout");

  MaskedAutoencoder out = net;
  out.in_layout = static_layout(n, m + 1);
  out.out_layout = out.in_layout;

  // Old raw index -> new raw index (theta | f | l).
  auto map_index = [&](int old_idx) {
    if (old_idx < n + m) return old_idx;        // theta and f block
    return old_idx + 1;                          // l block shifts by one
  };
  const int old_in = net.input_dim();
  const int old_out = net.output_dim();
  const int new_in = out.in_layout.dim();
  const int new_out = out.out_layout.dim();
  const int n_slices = 3;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-init_scale, init_scale);

  // Input layer: columns follow raw inputs then the mask entries.
  {
    const MatX& W0 = net.W[0];
    MatX W0n(W0.rows(), new_in + n_slices);
    for (int r = 0; r < W0.rows(); ++r)
      for (int c = 0; c < W0n.cols(); ++c) W0n(r, c) = u(rng);
    for (int c = 0; c < old_in; ++c) W0n.col(map_index(c)) = W0.col(c);
    for (int k = 0; k < n_slices; ++k) W0n.col(new_in + k) = W0.col(old_in + k);
    out.W[0] = W0n;
    out.layer_dims[0] = new_in + n_slices;
  }
  // Output layer: rows follow raw outputs.
  {
    const size_t L = net.W.size() - 1;
    const MatX& WL = net.W[L];
    MatX WLn(new_out, WL.cols());
    VecX bLn(new_out);
    for (int r = 0; r < new_out; ++r) {
      for (int c = 0; c < WL.cols(); ++c) WLn(r, c) = u(rng);
      bLn[r] = 0.0;
    }
    for (int r = 0; r < old_out; ++r) {
      WLn.row(map_index(r)) = WL.row(r);
      bLn[map_index(r)] = net.b[L][r];
    }
    out.W[L] = WLn;
    out.b[L] = bLn;
    out.layer_dims.back() = new_out;
  }
  // Normalization stats: copy old dims, neutral for the new ones until
  // retraining data provides them.
  auto grow_stats = [&](const VecX& old_v, double neutral, int old_dim, int new_dim) {
    VecX v = VecX::Constant(new_dim, neutral);
    for (int i = 0; i < old_dim; ++i) v[map_index(i)] = old_v[i];
    return v;
  };
  out.in_mean = grow_stats(net.in_mean, 0.0, old_in, new_in);
  out.in_std = grow_stats(net.in_std, 1.0, old_in, new_in);
  out.out_mean = grow_stats(net.out_mean, 0.0, old_out, new_out);
  out.out_std = grow_stats(net.out_std, 1.0, old_out, new_out);
  return out;
}

MaskedAutoencoder add_muscle(const MaskedAutoencoder& net, const Dataset& retrain_data,
                             const AddMuscleHyper& hyper) {
  MaskedAutoencoder grown = grow_static_net(net, hyper.init_scale, hyper.seed);
  require(retrain_data.x_in.cols() == grown.input_dim(),
          "retrain data must include the new muscle's columns");

  // Stats for the new dims only; old dims keep their stored statistics so the
  // copied weights keep meaning.
  const int n = net.in_layout.width("theta");
  const int m_old = net.in_layout.width("f");
  const int f_new = n + m_old;            // new muscle's f column
  const int l_new = grown.input_dim() - 1;  // new muscle's l column (last)
  for (int idx : {f_new, l_new}) {
    double mean = retrain_data.x_in.col(idx).mean();
    double var = (retrain_data.x_in.col(idx).array() - mean).square().mean();
    grown.in_mean[idx] = mean;
    grown.in_std[idx] = std::max(std::sqrt(var), 1e-8);
    grown.out_mean[idx] = mean;
    grown.out_std[idx] = grown.in_std[idx];
  }

  // Phase 1: train only parameters that touch the new dimensions.
  std::vector<MatX> w_train(grown.W.size());
  std::vector<VecX> b_train(grown.b.size());
  for (size_t l = 0; l < grown.W.size(); ++l) {
    w_train[l] = MatX::Zero(grown.W[l].rows(), grown.W[l].cols());
    b_train[l] = VecX::Zero(grown.b[l].size());
  }
  w_train[0].col(f_new).setOnes();
  w_train[0].col(l_new).setOnes();
  const size_t L = grown.W.size() - 1;
  w_train[L].row(f_new).setOnes();
  w_train[L].row(l_new).setOnes();
  b_train[L][f_new] = 1.0;
  b_train[L][l_new] = 1.0;

  train_masked_sgd(grown, retrain_data, hyper.phase1, &w_train, &b_train, false);

  // Phase 2: fine-tune everything at a tenth of the rate.
  TrainHyper fine = hyper.phase2;
  fine.lr *= 0.1;
  train_masked_sgd(grown, retrain_data, fine, nullptr, nullptr, false);
  return grown;
}

}  // namespace myo
