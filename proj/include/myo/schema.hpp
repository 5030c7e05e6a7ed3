#pragma once

#include "myo/types.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace myo {

// Named contiguous slices of a sensor vector, e.g. theta:[0,N) f:[N,N+M).
struct SliceLayout {
  std::vector<std::pair<std::string, int>> slices;  // (name, width)

  int dim() const;
  int count() const { return static_cast<int>(slices.size()); }
  int offset(int slice) const;
  int offset(const std::string& name) const;
  int width(const std::string& name) const;
  int index_of(const std::string& name) const;  // -1 if absent
};

// Masked autoencoder: tanh MLP whose input is the standardized sensor vector
// with masked slices zeroed and the mask vector appended. The latent z is the
// activation of the middle hidden layer.
struct MaskedAutoencoder {
  SliceLayout in_layout;
  SliceLayout out_layout;
  std::vector<int> layer_dims;  // [in_dim + n_slices, hidden..., out_dim]
  std::vector<MatX> W;
  std::vector<VecX> b;
  int latent_layer = 0;  // z = activations after this many layers

  VecX in_mean, in_std;   // per raw input dimension
  VecX out_mean, out_std;

  std::vector<VecX> mask_set;  // each of size in_layout.count()

  int input_dim() const { return in_layout.dim(); }
  int output_dim() const { return out_layout.dim(); }
  int latent_dim() const { return layer_dims[latent_layer]; }

  VecX standardize_in(const VecX& x) const;
  VecX unstandardize_out(const VecX& y) const;
  VecX standardize_out(const VecX& y) const;

  bool mask_in_set(const VecX& m) const;
};

// Fresh network: hidden = {64,64,64} tanh, identity output, weights from a
// seeded uniform Glorot-style init, unit normalization stats.
MaskedAutoencoder make_autoencoder(const SliceLayout& in_layout, const SliceLayout& out_layout,
                                   const std::vector<int>& hidden, std::uint64_t seed);

// Static body-schema layout (theta | f | l) with its three-mask set.
SliceLayout static_layout(int n_joints, int n_muscles);
std::vector<VecX> static_mask_set();

// Dynamic body-schema layouts (theta,f,l,f_contact,delta_l_ref) -> next state.
SliceLayout dynamic_in_layout(int n_joints, int n_muscles, int n_contacts);
SliceLayout dynamic_out_layout(int n_joints, int n_muscles, int n_contacts);
std::vector<VecX> dynamic_mask_set();

struct ForwardResult {
  VecX z;
  VecX x_out;  // physical units
};

// Deterministic forward pass; masked input slices are zeroed (standardized
// space) and m is appended.
ForwardResult forward_masked(const MaskedAutoencoder& net, const VecX& x_in, const VecX& m);

struct InferResult {
  VecX x;            // full estimate, physical units
  bool mask_known = true;  // false: mask not in the trained mask set
};

// knowns: full-size raw vector; only unmasked slices are read.
InferResult infer(const MaskedAutoencoder& net, const VecX& knowns, const VecX& m);

struct TrainHyper {
  int epochs = 100;
  int batch = 32;
  double lr = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  bool randomize_masks = true;  // draw from mask_set per batch; else all-ones
};

struct TrainReport {
  double final_loss = 0.0;
  bool diverged = false;
};

struct Dataset {
  MatX x_in;   // rows = samples
  MatX x_out;  // same row count; equal to x_in for the static schema
  int size() const { return static_cast<int>(x_in.rows()); }
};

// Minibatch momentum SGD on MSE of the full standardized x_out, one mask per
// batch drawn uniformly from the mask set. Normalization stats are computed
// from the dataset on entry. Throws on non-finite loss after reporting.
TrainReport train(MaskedAutoencoder& net, const Dataset& data, const TrainHyper& hyper);

// Mean squared reconstruction error over a dataset with a fixed mask.
double evaluate(const MaskedAutoencoder& net, const Dataset& data, const VecX& m);

struct LatentControlResult {
  VecX l_command;     // decoded l slice, physical units
  VecX x;             // full decoded vector
  double objective = 0.0;
  bool stalled = false;  // no descent possible at the first iterate
  int iterations = 0;
};

struct LatentControlWeights {
  double w_theta = 1.0;
  double w_f = 1e-4;
};

// Gradient descent on z (initialized by encoding `current` with all-ones
// mask) minimizing w_theta ||theta_ref - theta(z)||^2 + w_f ||f(z)||^2 with
// backtracking line search. `objective_mask`: per-output-dim 0/1 weights (for
// rupture masking); empty = all ones.
LatentControlResult latent_control(const MaskedAutoencoder& net, const VecX& current,
                                   const VecX& theta_ref, const LatentControlWeights& weights,
                                   int iters, const VecX& objective_mask = VecX());

struct AnomalyScore {
  VecX per_muscle;     // mean squared standardized residual over each muscle's dims
  double aggregate = 0.0;  // root mean squared residual over scored dims
};

// Reconstruction-error anomaly score with the all-ones mask. `healthy`:
// per-muscle 0/1; unhealthy muscles are excluded from the aggregate (their
// per-muscle entries are still reported). Empty = all healthy.
AnomalyScore anomaly_score(const MaskedAutoencoder& net, const VecX& x,
                           const VecX& healthy = VecX());

// One-step prediction with the dynamic schema (all-ones mask).
VecX dynamic_predict(const MaskedAutoencoder& net_dyn, const VecX& x_t, const VecX& delta_l_ref);

struct DynamicControlResult {
  MatX delta_l_ref;   // horizon x M
  double objective = 0.0;
  bool stalled = false;
  int iterations = 0;
};

// Receding-horizon input optimization: gradient descent over the delta_l_ref
// sequence through the chained one-step model, minimizing the squared
// distance of the target slice to `target` at every step. Inputs clamped to
// |delta_l_ref| <= dl_cap.
DynamicControlResult dynamic_control(const MaskedAutoencoder& net_dyn, const VecX& x0,
                                     const std::string& target_slice, const VecX& target,
                                     int horizon, int iters, double dl_cap);

// Ring buffer for online updates.
class SampleBuffer {
 public:
  explicit SampleBuffer(int capacity, int in_dim, int out_dim);
  void push(const VecX& x_in, const VecX& x_out);
  int size() const { return size_; }
  int capacity() const { return capacity_; }
  const MatX& in() const { return in_; }
  const MatX& out() const { return out_; }

 private:
  int capacity_, size_ = 0, head_ = 0;
  MatX in_, out_;
};

struct OnlineUpdateResult {
  bool skipped = false;  // non-finite loss, weights untouched
  double loss = 0.0;
};

// Append the sample, then run `steps` minibatch updates sampled uniformly
// from the buffer at learning rate `rate` (0 leaves weights unchanged).
OnlineUpdateResult online_update(MaskedAutoencoder& net, SampleBuffer& buffer, const VecX& x_in,
                                 const VecX& x_out, double rate, int steps, std::mt19937_64& rng);

// Serialization (versioned JSON).
void save_network(const MaskedAutoencoder& net, const std::string& path);
MaskedAutoencoder load_network(const std::string& path);

// --- internals shared with training/optimization code and tests ------------

struct ForwardCache {
  std::vector<VecX> pre;   // pre-activations per layer
  std::vector<VecX> post;  // activations per layer (post[0] = input)
};

VecX net_forward(const MaskedAutoencoder& net, const VecX& input, ForwardCache* cache);
// Gradient of scalar loss wrt all parameters given dL/d(output).
void net_backward_params(const MaskedAutoencoder& net, const ForwardCache& cache,
                         const VecX& dl_dout, std::vector<MatX>& dW, std::vector<VecX>& db);
// dL/d(input) given dL/d(output).
VecX net_backward_input(const MaskedAutoencoder& net, const ForwardCache& cache,
                        const VecX& dl_dout);
// Decoder-only forward/backward (from latent z).
VecX net_decode(const MaskedAutoencoder& net, const VecX& z, ForwardCache* cache);
VecX net_decode_backward_z(const MaskedAutoencoder& net, const ForwardCache& cache,
                           const VecX& dl_dout);
// Assemble the standardized network input for (x_in, m).
VecX masked_input(const MaskedAutoencoder& net, const VecX& x_in, const VecX& m);

// Training core with optional per-parameter freeze masks (1 = trainable) and
// control over normalization-stat refresh; used by muscle-addition retraining.
TrainReport train_masked_sgd(MaskedAutoencoder& net, const Dataset& data, const TrainHyper& hyper,
                             const std::vector<MatX>* w_train, const std::vector<VecX>* b_train,
                             bool refresh_stats);

}  // namespace myo
