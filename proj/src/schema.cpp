#include "myo/schema.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace myo {

using nlohmann::json;

int SliceLayout::dim() const {
  int d = 0;
  for (const auto& s : slices) d += s.second;
  return d;
}

int SliceLayout::offset(int slice) const {
  require(slice >= 0 && slice < count(), "slice index out of range");
  int off = 0;
  for (int i = 0; i < slice; ++i) off += slices[i].second;
  return off;
}

int SliceLayout::index_of(const std::string& name) const {
  for (int i = 0; i < count(); ++i)
    if (slices[i].first == name) return i;
  return -1;
}

int SliceLayout::offset(const std::string& name) const {
  int i = index_of(name);
  require(i >= 0, "unknown slice: " + name);
  return offset(i);
}

int SliceLayout::width(const std::string& name) const {
  int i = index_of(name);
  require(i >= 0, "unknown slice: " + name);
  return slices[i].second;
}

VecX MaskedAutoencoder::standardize_in(const VecX& x) const {
  return (x - in_mean).cwiseQuotient(in_std);
}
VecX MaskedAutoencoder::unstandardize_out(const VecX& y) const {
  return y.cwiseProduct(out_std) + out_mean;
}
VecX MaskedAutoencoder::standardize_out(const VecX& y) const {
  return (y - out_mean).cwiseQuotient(out_std);
}

bool MaskedAutoencoder::mask_in_set(const VecX& m) const {
  for (const auto& cand : mask_set)
    if (cand.size() == m.size() && (cand - m).lpNorm<Eigen::Infinity>() < 0.5) return true;
  return false;
}

MaskedAutoencoder make_autoencoder(const SliceLayout& in_layout, const SliceLayout& out_layout,
                                   const std::vector<int>& hidden, std::uint64_t seed) {
  MaskedAutoencoder net;
  net.in_layout = in_layout;
  net.out_layout = out_layout;
  net.layer_dims.push_back(in_layout.dim() + in_layout.count());
  for (int h : hidden) net.layer_dims.push_back(h);
  net.layer_dims.push_back(out_layout.dim());
  net.latent_layer = std::max(1, static_cast<int>(hidden.size() + 1) / 2);

  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < net.layer_dims.size(); ++l) {
    const int rows = net.layer_dims[l + 1];
    const int cols = net.layer_dims[l];
    const double scale = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> u(-scale, scale);
    MatX W(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) W(r, c) = u(rng);
    net.W.push_back(W);
    net.b.push_back(VecX::Zero(rows));
  }
  net.in_mean = VecX::Zero(in_layout.dim());
  net.in_std = VecX::Ones(in_layout.dim());
  net.out_mean = VecX::Zero(out_layout.dim());
  net.out_std = VecX::Ones(out_layout.dim());
  return net;
}

SliceLayout static_layout(int n_joints, int n_muscles) {
  return SliceLayout{{{"theta", n_joints}, {"f", n_muscles}, {"l", n_muscles}}};
}

std::vector<VecX> static_mask_set() {
  std::vector<VecX> ms;
  VecX a(3), b(3), c(3);
  a << 1, 1, 0;
  b << 1, 0, 1;
  c << 0, 1, 1;
  ms.push_back(a);
  ms.push_back(b);
  ms.push_back(c);
  return ms;
}

SliceLayout dynamic_in_layout(int n_joints, int n_muscles, int n_contacts) {
  return SliceLayout{{{"theta", n_joints},
                      {"f", n_muscles},
                      {"l", n_muscles},
                      {"f_contact", n_contacts},
                      {"delta_l_ref", n_muscles}}};
}

SliceLayout dynamic_out_layout(int n_joints, int n_muscles, int n_contacts) {
  return SliceLayout{
      {{"theta", n_joints}, {"f", n_muscles}, {"l", n_muscles}, {"f_contact", n_contacts}}};
}

std::vector<VecX> dynamic_mask_set() {
  std::vector<VecX> ms;
  VecX a = VecX::Ones(5);
  VecX b = VecX::Zero(5);
  b[4] = 1;  // control input always visible
  ms.push_back(a);
  ms.push_back(b);
  return ms;
}

VecX masked_input(const MaskedAutoencoder& net, const VecX& x_in, const VecX& m) {
  require(x_in.size() == net.input_dim(), "x_in dimension mismatch");
  require(m.size() == net.in_layout.count(), "mask dimension mismatch");
  VecX std_x = net.standardize_in(x_in);
  for (int s = 0; s < net.in_layout.count(); ++s) {
    if (m[s] < 0.5)
      std_x.segment(net.in_layout.offset(s), net.in_layout.slices[s].second).setZero();
  }
  VecX input(std_x.size() + m.size());
  input << std_x, m;
  return input;
}

static VecX tanh_vec(const VecX& v) { return v.array().tanh().matrix(); }

VecX net_forward(const MaskedAutoencoder& net, const VecX& input, ForwardCache* cache) {
  require(input.size() == net.layer_dims[0], "network input dimension mismatch");
  VecX a = input;
  if (cache) {
    cache->pre.clear();
    cache->post.clear();
    cache->post.push_back(a);
  }
  const int L = static_cast<int>(net.W.size());
  for (int l = 0; l < L; ++l) {
    VecX pre = net.W[l] * a + net.b[l];
    a = (l + 1 < L) ? tanh_vec(pre) : pre;  // identity output layer
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(a);
    }
  }
  return a;
}

void net_backward_params(const MaskedAutoencoder& net, const ForwardCache& cache,
                         const VecX& dl_dout, std::vector<MatX>& dW, std::vector<VecX>& db) {
  const int L = static_cast<int>(net.W.size());
  dW.resize(L);
  db.resize(L);
  VecX delta = dl_dout;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) {
      // through tanh at layer l's output
      delta = delta.cwiseProduct(VecX(1.0 - cache.post[l + 1].array().square()));
    }
    dW[l] = delta * cache.post[l].transpose();
    db[l] = delta;
    if (l > 0) delta = net.W[l].transpose() * delta;
  }
}

VecX net_backward_input(const MaskedAutoencoder& net, const ForwardCache& cache,
                        const VecX& dl_dout) {
  const int L = static_cast<int>(net.W.size());
  VecX delta = dl_dout;
  for (int l = L - 1; l >= 0; --l) {
    if (l < L - 1) delta = delta.cwiseProduct(VecX(1.0 - cache.post[l + 1].array().square()));
    delta = net.W[l].transpose() * delta;
  }
  return delta;
}

VecX net_decode(const MaskedAutoencoder& net, const VecX& z, ForwardCache* cache) {
  require(z.size() == net.latent_dim(), "latent dimension mismatch");
  VecX a = z;
  if (cache) {
    cache->pre.clear();
    cache->post.clear();
    cache->post.push_back(a);
  }
  const int L = static_cast<int>(net.W.size());
  for (int l = net.latent_layer; l < L; ++l) {
    VecX pre = net.W[l] * a + net.b[l];
    a = (l + 1 < L) ? tanh_vec(pre) : pre;
    if (cache) {
      cache->pre.push_back(pre);
      cache->post.push_back(a);
    }
  }
  return a;
}

VecX net_decode_backward_z(const MaskedAutoencoder& net, const ForwardCache& cache,
                           const VecX& dl_dout) {
  const int L = static_cast<int>(net.W.size());
  VecX delta = dl_dout;
  int idx = static_cast<int>(cache.post.size()) - 1;
  for (int l = L - 1; l >= net.latent_layer; --l, --idx) {
    if (l < L - 1) delta = delta.cwiseProduct(VecX(1.0 - cache.post[idx].array().square()));
    delta = net.W[l].transpose() * delta;
  }
  return delta;
}

ForwardResult forward_masked(const MaskedAutoencoder& net, const VecX& x_in, const VecX& m) {
  ForwardCache cache;
  VecX out = net_forward(net, masked_input(net, x_in, m), &cache);
  ForwardResult res;
  res.z = cache.post[net.latent_layer];
  res.x_out = net.unstandardize_out(out);
  return res;
}

InferResult infer(const MaskedAutoencoder& net, const VecX& knowns, const VecX& m) {
  InferResult res;
  res.mask_known = net.mask_in_set(m);
  res.x = forward_masked(net, knowns, m).x_out;
  return res;
}

namespace {

void compute_stats(const MatX& data, VecX& mean, VecX& stdev) {
  mean = data.colwise().mean();
  VecX var = (data.rowwise() - mean.transpose()).array().square().colwise().mean();
  stdev = var.array().sqrt().max(1e-8).matrix();
}

struct SgdState {
  std::vector<MatX> vW;
  std::vector<VecX> vb;
};

// One minibatch step; returns batch loss. Optional per-parameter freeze masks
// (1 = trainable) support the muscle-addition retraining phases.
double sgd_batch(MaskedAutoencoder& net, const MatX& xin, const MatX& xout,
                 const std::vector<int>& rows, const VecX& m, double lr, double momentum,
                 SgdState& sgd, const std::vector<MatX>* w_train = nullptr,
                 const std::vector<VecX>* b_train = nullptr) {
  const int L = static_cast<int>(net.W.size());
  std::vector<MatX> gW(L);
  std::vector<VecX> gb(L);
  for (int l = 0; l < L; ++l) {
    gW[l] = MatX::Zero(net.W[l].rows(), net.W[l].cols());
    gb[l] = VecX::Zero(net.b[l].size());
  }
  double loss = 0.0;
  ForwardCache cache;
  std::vector<MatX> dW;
  std::vector<VecX> db;
  for (int r : rows) {
    VecX input = masked_input(net, xin.row(r).transpose(), m);
    VecX out = net_forward(net, input, &cache);
    VecX target = net.standardize_out(xout.row(r).transpose());
    VecX err = out - target;
    loss += err.squaredNorm() / err.size();
    VecX dl_dout = 2.0 * err / err.size();
    net_backward_params(net, cache, dl_dout, dW, db);
    for (int l = 0; l < L; ++l) {
      gW[l] += dW[l];
      gb[l] += db[l];
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  loss *= inv;
  if (!std::isfinite(loss)) return loss;

  if (sgd.vW.empty()) {
    sgd.vW.resize(L);
    sgd.vb.resize(L);
    for (int l = 0; l < L; ++l) {
      sgd.vW[l] = MatX::Zero(net.W[l].rows(), net.W[l].cols());
      sgd.vb[l] = VecX::Zero(net.b[l].size());
    }
  }
  for (int l = 0; l < L; ++l) {
    MatX gw = gW[l] * inv;
    VecX gbl = gb[l] * inv;
    if (w_train) gw = gw.cwiseProduct((*w_train)[l]);
    if (b_train) gbl = gbl.cwiseProduct((*b_train)[l]);
    sgd.vW[l] = momentum * sgd.vW[l] - lr * gw;
    sgd.vb[l] = momentum * sgd.vb[l] - lr * gbl;
    net.W[l] += sgd.vW[l];
    net.b[l] += sgd.vb[l];
  }
  return loss;
}

}  // namespace

TrainReport train_masked_sgd(MaskedAutoencoder& net, const Dataset& data, const TrainHyper& hyper,
                             const std::vector<MatX>* w_train, const std::vector<VecX>* b_train,
                             bool refresh_stats) {
  require(data.size() > 0, "dataset is empty");
  require(data.x_in.cols() == net.input_dim(), "dataset input dimension mismatch");
  require(data.x_out.cols() == net.output_dim(), "dataset output dimension mismatch");
  require(!net.mask_set.empty(), "network has no mask set");

  if (refresh_stats) {
    compute_stats(data.x_in, net.in_mean, net.in_std);
    compute_stats(data.x_out, net.out_mean, net.out_std);
  }

  std::mt19937_64 rng(hyper.seed);
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  SgdState sgd;
  TrainReport report;

  VecX all_ones = VecX::Ones(net.in_layout.count());
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < data.size(); start += hyper.batch) {
      int end = std::min(start + hyper.batch, data.size());
      std::vector<int> rows(order.begin() + start, order.begin() + end);
      const VecX& m = hyper.randomize_masks
                          ? net.mask_set[rng() % net.mask_set.size()]
                          : all_ones;
      double loss = sgd_batch(net, data.x_in, data.x_out, rows, m, hyper.lr, hyper.momentum, sgd,
                              w_train, b_train);
      if (!std::isfinite(loss)) {
        report.diverged = true;
        report.final_loss = loss;
        throw InvalidInput("training loss became non-finite at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss;
      ++batches;
    }
    report.final_loss = epoch_loss / std::max(1, batches);
  }
  return report;
}

TrainReport train(MaskedAutoencoder& net, const Dataset& data, const TrainHyper& hyper) {
  return train_masked_sgd(net, data, hyper, nullptr, nullptr, true);
}

double evaluate(const MaskedAutoencoder& net, const Dataset& data, const VecX& m) {
  double loss = 0.0;
  for (int r = 0; r < data.size(); ++r) {
    VecX out = net_forward(net, masked_input(net, data.x_in.row(r).transpose(), m), nullptr);
    VecX target = net.standardize_out(data.x_out.row(r).transpose());
    loss += (out - target).squaredNorm() / target.size();
  }
  return loss / std::max(1, data.size());
}

LatentControlResult latent_control(const MaskedAutoencoder& net, const VecX& current,
                                   const VecX& theta_ref, const LatentControlWeights& weights,
                                   int iters, const VecX& objective_mask) {
  require(iters >= 1, "latent_control needs at least one iteration");
  const int to = net.out_layout.offset("theta");
  const int tw = net.out_layout.width("theta");
  const int fo = net.out_layout.offset("f");
  const int fw = net.out_layout.width("f");
  const int lo = net.out_layout.offset("l");
  const int lw = net.out_layout.width("l");
  require(theta_ref.size() == tw, "theta_ref dimension mismatch");
  VecX omask = objective_mask.size() == net.output_dim() ? objective_mask
                                                         : VecX::Ones(net.output_dim());

  VecX all_ones = VecX::Ones(net.in_layout.count());
  ForwardCache enc_cache;
  net_forward(net, masked_input(net, current, all_ones), &enc_cache);
  VecX z = enc_cache.post[net.latent_layer];

  auto eval = [&](const VecX& zz, VecX* phys_out) {
    VecX out = net_decode(net, zz, nullptr);
    VecX phys = net.unstandardize_out(out);
    if (phys_out) *phys_out = phys;
    double j = 0.0;
    for (int i = 0; i < tw; ++i) {
      double e = theta_ref[i] - phys[to + i];
      j += weights.w_theta * omask[to + i] * e * e;
    }
    for (int i = 0; i < fw; ++i) {
      double v = phys[fo + i];
      j += weights.w_f * omask[fo + i] * v * v;
    }
    return j;
  };

  LatentControlResult res;
  double obj = eval(z, nullptr);
  double step = 0.1;
  for (int it = 0; it < iters; ++it) {
    res.iterations = it + 1;
    ForwardCache cache;
    VecX out = net_decode(net, z, &cache);
    VecX phys = net.unstandardize_out(out);
    VecX dl_dout = VecX::Zero(net.output_dim());
    for (int i = 0; i < tw; ++i)
      dl_dout[to + i] = -2.0 * weights.w_theta * omask[to + i] * (theta_ref[i] - phys[to + i]);
    for (int i = 0; i < fw; ++i)
      dl_dout[fo + i] = 2.0 * weights.w_f * omask[fo + i] * phys[fo + i];
    // chain through unstandardization: d(phys)/d(std out) = out_std
    dl_dout = dl_dout.cwiseProduct(net.out_std);
    VecX grad = net_decode_backward_z(net, cache, dl_dout);

    bool accepted = false;
    for (int half = 0; half < 20; ++half) {
      VecX zc = z - step * grad;
      double oc = eval(zc, nullptr);
      if (oc < obj) {
        z = zc;
        obj = oc;
        accepted = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (it == 0) res.stalled = true;
      break;
    }
  }
  VecX phys;
  res.objective = eval(z, &phys);
  res.x = phys;
  res.l_command = phys.segment(lo, lw);
  return res;
}

AnomalyScore anomaly_score(const MaskedAutoencoder& net, const VecX& x, const VecX& healthy) {
  require(x.size() == net.input_dim(), "x dimension mismatch");
  require(net.input_dim() == net.output_dim(), "anomaly scoring expects an autoencoding layout");
  VecX all_ones = VecX::Ones(net.in_layout.count());
  VecX out = net_forward(net, masked_input(net, x, all_ones), nullptr);
  VecX resid = out - net.standardize_out(x);

  const int fo = net.out_layout.offset("f");
  const int fw = net.out_layout.width("f");
  const int lo = net.out_layout.offset("l");
  const int m = fw;
  VecX h = healthy.size() == m ? healthy : VecX::Ones(m);

  AnomalyScore score;
  score.per_muscle = VecX::Zero(m);
  for (int i = 0; i < m; ++i) {
    double r = resid[fo + i] * resid[fo + i] + resid[lo + i] * resid[lo + i];
    score.per_muscle[i] = r / 2.0;
  }
  double total = 0.0;
  int count = 0;
  for (int d = 0; d < resid.size(); ++d) {
    bool in_f = d >= fo && d < fo + fw;
    bool in_l = d >= lo && d < lo + fw;
    int muscle = in_f ? d - fo : (in_l ? d - lo : -1);
    if (muscle >= 0 && h[muscle] < 0.5) continue;
    total += resid[d] * resid[d];
    ++count;
  }
  score.aggregate = count > 0 ? std::sqrt(total / count) : 0.0;
  return score;
}

VecX dynamic_predict(const MaskedAutoencoder& net_dyn, const VecX& x_t, const VecX& delta_l_ref) {
  const int dlo = net_dyn.in_layout.offset("delta_l_ref");
  const int dlw = net_dyn.in_layout.width("delta_l_ref");
  require(delta_l_ref.size() == dlw, "delta_l_ref dimension mismatch");
  require(x_t.size() == net_dyn.input_dim() - dlw, "x_t dimension mismatch");
  VecX x_in(net_dyn.input_dim());
  x_in << x_t, delta_l_ref;
  require(dlo == x_t.size(), "delta_l_ref slice must be last in the input layout");
  VecX all_ones = VecX::Ones(net_dyn.in_layout.count());
  return forward_masked(net_dyn, x_in, all_ones).x_out;
}

DynamicControlResult dynamic_control(const MaskedAutoencoder& net_dyn, const VecX& x0,
                                     const std::string& target_slice, const VecX& target,
                                     int horizon, int iters, double dl_cap) {
  require(horizon >= 1, "horizon must be at least 1");
  require(iters >= 1, "iters must be at least 1");
  const int dlw = net_dyn.in_layout.width("delta_l_ref");
  const int so = net_dyn.out_layout.offset(target_slice);
  const int sw = net_dyn.out_layout.width(target_slice);
  require(target.size() == sw, "target dimension mismatch");
  require(net_dyn.input_dim() - dlw == net_dyn.output_dim(),
          "dynamic layout must chain: out dims feed back as state");

  VecX all_ones = VecX::Ones(net_dyn.in_layout.count());

  auto rollout = [&](const MatX& u, std::vector<ForwardCache>* caches, double* obj) {
    VecX x = x0;
    if (obj) *obj = 0.0;
    for (int t = 0; t < horizon; ++t) {
      VecX x_in(net_dyn.input_dim());
      x_in << x, u.row(t).transpose();
      ForwardCache local;
      ForwardCache* c = caches ? &(*caches)[t] : &local;
      VecX out = net_forward(net_dyn, masked_input(net_dyn, x_in, all_ones), c);
      x = net_dyn.unstandardize_out(out);
      if (obj) {
        VecX err = target - x.segment(so, sw);
        *obj += err.squaredNorm();
      }
    }
    return x;
  };

  DynamicControlResult res;
  MatX u = MatX::Zero(horizon, dlw);
  double obj;
  rollout(u, nullptr, &obj);

  double step = 1e-3;
  for (int it = 0; it < iters; ++it) {
    res.iterations = it + 1;
    // BPTT: forward with caches, then walk backward accumulating dJ/du_t.
    std::vector<ForwardCache> caches(horizon);
    std::vector<VecX> states(horizon + 1);
    states[0] = x0;
    double cur = 0.0;
    for (int t = 0; t < horizon; ++t) {
      VecX x_in(net_dyn.input_dim());
      x_in << states[t], u.row(t).transpose();
      VecX out = net_forward(net_dyn, masked_input(net_dyn, x_in, all_ones), &caches[t]);
      states[t + 1] = net_dyn.unstandardize_out(out);
      VecX err = target - states[t + 1].segment(so, sw);
      cur += err.squaredNorm();
    }

    MatX grad = MatX::Zero(horizon, dlw);
    VecX dx_next = VecX::Zero(net_dyn.output_dim());  // dJ/d(state_{t+1}) physical
    for (int t = horizon - 1; t >= 0; --t) {
      VecX dl_dphys = dx_next;
      VecX err = target - states[t + 1].segment(so, sw);
      dl_dphys.segment(so, sw) -= 2.0 * err;
      VecX dl_dout = dl_dphys.cwiseProduct(net_dyn.out_std);
      VecX din = net_backward_input(net_dyn, caches[t], dl_dout);
      // din covers [standardized x | standardized u | mask]; unchain stds.
      const int xd = net_dyn.output_dim();
      VecX din_raw = din.head(xd + dlw).cwiseQuotient(net_dyn.in_std);
      grad.row(t) = din_raw.tail(dlw).transpose();
      dx_next = din_raw.head(xd);
    }

    bool accepted = false;
    for (int half = 0; half < 20; ++half) {
      MatX uc = (u - step * grad).cwiseMax(-dl_cap).cwiseMin(dl_cap);
      double oc;
      rollout(uc, nullptr, &oc);
      if (oc < cur) {
        u = uc;
        obj = oc;
        accepted = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (it == 0) res.stalled = true;
      break;
    }
  }
  res.delta_l_ref = u;
  res.objective = obj;
  if (res.stalled) res.delta_l_ref.setZero();
  return res;
}

SampleBuffer::SampleBuffer(int capacity, int in_dim, int out_dim)
    : capacity_(capacity), in_(capacity, in_dim), out_(capacity, out_dim) {
  require(capacity > 0, "buffer capacity must be positive");
}

void SampleBuffer::push(const VecX& x_in, const VecX& x_out) {
  in_.row(head_) = x_in.transpose();
  out_.row(head_) = x_out.transpose();
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

OnlineUpdateResult online_update(MaskedAutoencoder& net, SampleBuffer& buffer, const VecX& x_in,
                                 const VecX& x_out, double rate, int steps, std::mt19937_64& rng) {
  buffer.push(x_in, x_out);
  OnlineUpdateResult res;
  if (rate == 0.0 || steps <= 0) return res;

  MaskedAutoencoder backup = net;
  SgdState sgd;
  const int batch = std::min(32, buffer.size());
  for (int s = 0; s < steps; ++s) {
    std::vector<int> rows(batch);
    for (int i = 0; i < batch; ++i) rows[i] = static_cast<int>(rng() % buffer.size());
    const VecX& m = net.mask_set[rng() % net.mask_set.size()];
    res.loss = sgd_batch(net, buffer.in(), buffer.out(), rows, m, rate, 0.9, sgd);
    if (!std::isfinite(res.loss)) {
      net = backup;
      res.skipped = true;
      return res;
    }
  }
  return res;
}

// --- serialization ----------------------------------------------------------

namespace {
json layout_to_json(const SliceLayout& l) {
  json arr = json::array();
  for (const auto& s : l.slices) arr.push_back({{"name", s.first}, {"width", s.second}});
  return arr;
}
SliceLayout layout_from_json(const json& arr) {
  SliceLayout l;
  for (const auto& s : arr) l.slices.emplace_back(s.at("name").get<std::string>(), s.at("width").get<int>());
  return l;
}
json vec_to_json(const VecX& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
VecX vec_from_json(const json& a) {
  VecX v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}
json mat_to_json(const MatX& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}
MatX mat_from_json(const json& rows) {
  const int nr = static_cast<int>(rows.size());
  const int nc = nr > 0 ? static_cast<int>(rows[0].size()) : 0;
  MatX m(nr, nc);
  for (int r = 0; r < nr; ++r) m.row(r) = vec_from_json(rows[r]).transpose();
  return m;
}
}  // namespace

void save_network(const MaskedAutoencoder& net, const std::string& path) {
  json j;
  j["format"] = "myo-net";
  j["version"] = 1;
  j["in_layout"] = layout_to_json(net.in_layout);
  j["out_layout"] = layout_to_json(net.out_layout);
  j["layer_dims"] = net.layer_dims;
  j["latent_layer"] = net.latent_layer;
  j["in_mean"] = vec_to_json(net.in_mean);
  j["in_std"] = vec_to_json(net.in_std);
  j["out_mean"] = vec_to_json(net.out_mean);
  j["out_std"] = vec_to_json(net.out_std);
  json masks = json::array();
  for (const auto& m : net.mask_set) masks.push_back(vec_to_json(m));
  j["mask_set"] = masks;
  json ws = json::array(), bs = json::array();
  for (const auto& w : net.W) ws.push_back(mat_to_json(w));
  for (const auto& b : net.b) bs.push_back(vec_to_json(b));
  j["W"] = ws;
  j["b"] = bs;
  std::ofstream out(path);
  require(out.good(), "cannot open network file for writing: " + path);
  out << j.dump();
}

MaskedAutoencoder load_network(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open network file: " + path);
  json j = json::parse(in);
  require(j.value("format", "") == "myo-net", "not a network file: " + path);
  require(j.value("version", 0) == 1, "unsupported network file version");
  MaskedAutoencoder net;
  net.in_layout = layout_from_json(j.at("in_layout"));
  net.out_layout = layout_from_json(j.at("out_layout"));
  net.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  net.latent_layer = j.at("latent_layer").get<int>();
  net.in_mean = vec_from_json(j.at("in_mean"));
  net.in_std = vec_from_json(j.at("in_std"));
  net.out_mean = vec_from_json(j.at("out_mean"));
  net.out_std = vec_from_json(j.at("out_std"));
  for (const auto& m : j.at("mask_set")) net.mask_set.push_back(vec_from_json(m));
  for (const auto& w : j.at("W")) net.W.push_back(mat_from_json(w));
  for (const auto& b : j.at("b")) net.b.push_back(vec_from_json(b));
  return net;
}

}  // namespace myo
