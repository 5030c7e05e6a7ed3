#pragma once

#include "myo/morphology.hpp"
#include "myo/schema.hpp"
#include "myo/types.hpp"

namespace myo {

struct RuptureMask {
  VecX healthy;  // per muscle, 1 = healthy, 0 = ruptured

  static RuptureMask all_healthy(int m) { return {VecX::Ones(m)}; }
  bool is_healthy(int i) const { return healthy[i] > 0.5; }
  int count_ruptured() const;
};

struct ResidualStats {
  VecX mean;  // per-muscle training reconstruction residual mean
  VecX std;   // and standard deviation
  bool calibrated = false;
};

// Per-muscle residual statistics over a (healthy) dataset.
ResidualStats calibrate_residuals(const MaskedAutoencoder& net, const Dataset& data);

struct AdaptationState {
  RuptureMask rupture;
  ResidualStats stats;
  std::vector<int> added_muscles;
  std::vector<int> streak;  // consecutive over-threshold ticks per muscle

  static AdaptationState fresh(int m) {
    AdaptationState s;
    s.rupture = RuptureMask::all_healthy(m);
    s.streak.assign(m, 0);
    return s;
  }
};

struct RuptureEvent {
  int muscle = -1;
  double residual = 0.0;
  double threshold = 0.0;
};

// Flag muscles whose residual exceeds mean + k_sigma * std for
// `consecutive_ticks` ticks in a row. Flags are sticky. Returns newly
// flagged muscles this tick.
std::vector<RuptureEvent> detect_rupture(AdaptationState& state, const VecX& per_muscle_residual,
                                         double k_sigma = 5.0, int consecutive_ticks = 10);

// Rupture-aware wrappers: ruptured muscles' f and l entries are zeroed on
// input (standardized space) and removed from objectives/aggregates.

// Throws if some joint is left without any healthy muscle.
void check_controllable(const MusculoskeletalModel& model, const RuptureMask& mask,
                        double eps_arm = 1e-4);

InferResult masked_infer(const MaskedAutoencoder& net, const VecX& knowns, const VecX& m,
                         const RuptureMask& mask);

AnomalyScore masked_anomaly_score(const MaskedAutoencoder& net, const VecX& x,
                                  const RuptureMask& mask);

// Ruptured muscles are pinned to a slack command: longest reachable length
// plus delta_l_slack.
LatentControlResult masked_latent_control(const MaskedAutoencoder& net,
                                          const MusculoskeletalModel& model, const VecX& current,
                                          const VecX& theta_ref,
                                          const LatentControlWeights& weights, int iters,
                                          const RuptureMask& mask, double delta_l_slack = 0.05);

struct AddMuscleHyper {
  TrainHyper phase1;          // only new parameters train
  TrainHyper phase2;          // full fine-tune; lr is scaled by 0.1 internally
  double init_scale = 1e-3;   // new rows/columns
  std::uint64_t seed = 7;
};

// Grow a static-schema network from M to M+1 muscles: weights touching old
// slices are copied exactly, new rows/columns start near zero, then retrain
// (freeze-then-finetune) on data that includes the new muscle's columns.
MaskedAutoencoder add_muscle(const MaskedAutoencoder& net, const Dataset& retrain_data,
                             const AddMuscleHyper& hyper);

// Layout growth only (no retraining); useful for the frozen-copy checks.
MaskedAutoencoder grow_static_net(const MaskedAutoencoder& net, double init_scale,
                                  std::uint64_t seed);

}  // namespace myo
