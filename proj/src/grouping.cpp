#include "myo/grouping.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace myo {

using nlohmann::json;

void MuscleGraph::check() const {
  require(w.rows() == w.cols(), "graph weight matrix must be square");
  require(w.allFinite(), "graph weights must be finite");
  require((w - w.transpose()).lpNorm<Eigen::Infinity>() < 1e-12, "graph must be symmetric");
  require(w.diagonal().lpNorm<Eigen::Infinity>() == 0.0, "graph diagonal must be zero");
  require((w.array() >= 0.0).all(), "graph weights must be non-negative");
}

void GroupAssignment::check(const MusculoskeletalModel& model, double eps_arm) const {
  std::vector<int> seen(model.muscle_count(), 0);
  for (const auto& g : groups)
    for (int i : g.muscles) {
      require(i >= 0 && i < model.muscle_count(), "muscle index out of range");
      ++seen[i];
    }
  for (int i = 0; i < model.muscle_count(); ++i)
    require(seen[i] == 1, "muscle sets must be disjoint and cover all muscles");

  auto postures = sample_postures(model, 32);
  std::vector<MatX> Gs;
  for (const auto& t : postures) Gs.push_back(muscle_jacobian(model, t));
  for (const auto& g : groups) {
    for (int j : g.joints) {
      bool movable = false;
      for (const auto& G : Gs) {
        for (int i : g.muscles)
          if (std::abs(G(i, j)) > eps_arm) {
            movable = true;
            break;
          }
        if (movable) break;
      }
      require(movable, "group joint " + std::to_string(j) + " not movable by its muscles");
    }
  }
}

namespace {

// max over sampled postures of |G_ij|
MatX max_abs_jacobian(const MusculoskeletalModel& model, int samples) {
  MatX acc = MatX::Zero(model.muscle_count(), model.joint_count());
  for (const auto& theta : sample_postures(model, samples))
    acc = acc.cwiseMax(muscle_jacobian(model, theta).cwiseAbs());
  return acc;
}

}  // namespace

GroupAssignment manual_group(const MusculoskeletalModel& model,
                             const std::vector<int>& target_joints, double eps_arm, bool fixpoint,
                             int posture_samples) {
  for (int j : target_joints)
    require(j >= 0 && j < model.joint_count(), "target joint out of range");
  require(!target_joints.empty(), "target joint set is empty");

  MatX arm = max_abs_jacobian(model, posture_samples);

  std::set<int> joints(target_joints.begin(), target_joints.end());
  std::set<int> muscles;
  while (true) {
    std::set<int> new_muscles;
    for (int i = 0; i < model.muscle_count(); ++i)
      for (int j : joints)
        if (arm(i, j) > eps_arm) new_muscles.insert(i);
    std::set<int> new_joints = joints;
    for (int i : new_muscles)
      for (int j = 0; j < model.joint_count(); ++j)
        if (arm(i, j) > eps_arm) new_joints.insert(j);
    bool stable = new_muscles == muscles && new_joints == joints;
    muscles = std::move(new_muscles);
    joints = std::move(new_joints);
    if (!fixpoint || stable) break;
  }
  require(!muscles.empty(), "target joints are unactuated");

  GroupAssignment out;
  MuscleGroup g;
  g.joints.assign(joints.begin(), joints.end());
  g.muscles.assign(muscles.begin(), muscles.end());
  out.groups.push_back(std::move(g));
  return out;
}

FunctionalGraphResult functional_graph(const MaskedAutoencoder& net) {
  const int m = net.in_layout.width("f");
  const int fo = net.in_layout.offset("f");
  const int lo = net.in_layout.offset("l");
  const MatX& W0 = net.W[0];

  FunctionalGraphResult res;
  res.graph.w = MatX::Zero(m, m);
  // Stack each muscle's f and l input columns into one feature vector.
  MatX feats(2 * W0.rows(), m);
  for (int i = 0; i < m; ++i) {
    feats.col(i).head(W0.rows()) = W0.col(fo + i);
    feats.col(i).tail(W0.rows()) = W0.col(lo + i);
  }
  if (feats.norm() == 0.0) {
    res.untrained = true;
    return res;
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double ni = feats.col(i).norm(), nj = feats.col(j).norm();
      double c = (ni > 0 && nj > 0) ? std::abs(feats.col(i).dot(feats.col(j)) / (ni * nj)) : 0.0;
      res.graph.w(i, j) = res.graph.w(j, i) = c;
    }
  }
  return res;
}

MuscleGraph spatial_graph(const MusculoskeletalModel& model, double sigma_s) {
  const int m = model.muscle_count();
  Posture zero = VecX::Zero(model.joint_count());
  auto tf = link_transforms(model, zero);

  std::vector<std::vector<Vec3>> points(m);
  for (int i = 0; i < m; ++i)
    for (const auto& vp : model.muscles[i].via_points)
      points[i].push_back(tf[vp.link] * vp.offset);

  MuscleGraph g;
  g.w = MatX::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& a : points[i])
        for (const auto& b : points[j]) d = std::min(d, (a - b).norm());
      g.w(i, j) = g.w(j, i) = std::exp(-d / sigma_s);
    }
  }
  return g;
}

MuscleGraph blend_graphs(const MuscleGraph& functional, const MuscleGraph& spatial, double alpha,
                         double beta) {
  require(functional.w.rows() == spatial.w.rows(), "graph size mismatch");
  MuscleGraph g;
  g.w = alpha * functional.w + beta * spatial.w;
  return g;
}

namespace {

// Fiedler vector of the Laplacian of the induced subgraph, sign-canonicalized
// so the largest-|v| entry is positive (ties: lowest index).
VecX fiedler_vector(const MatX& w) {
  const int n = static_cast<int>(w.rows());
  MatX L = MatX(w.rowwise().sum().asDiagonal()) - w;
  Eigen::SelfAdjointEigenSolver<MatX> es(L);
  VecX v = es.eigenvectors().col(std::min(1, n - 1));
  int arg = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(v[i]) > std::abs(v[arg]) + 1e-15) arg = i;
  if (v[arg] < 0.0) v = -v;
  return v;
}

void bisect(const MatX& w, const std::vector<int>& nodes, int k, int balance_tol,
            std::vector<int>& out, int next_label) {
  const int n = static_cast<int>(nodes.size());
  if (k <= 1) {
    for (int id : nodes) out[id] = next_label;
    return;
  }
  const int k_left = k / 2;
  const int k_right = k - k_left;

  MatX sub(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) sub(a, b) = w(nodes[a], nodes[b]);

  VecX v = fiedler_vector(sub);
  // Order nodes by Fiedler value, ties by node index.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (v[a] != v[b]) return v[a] < v[b];
    return nodes[a] < nodes[b];
  });
  // Sign split position, then clamp to the balance window around the target.
  int split = 0;
  while (split < n && v[order[split]] < 0.0) ++split;
  const int target = static_cast<int>(std::round(static_cast<double>(n) * k_left / k));
  const int lo = std::max(1, target - balance_tol);
  const int hi = std::min(n - 1, target + balance_tol);
  split = std::clamp(split, lo, hi);

  std::vector<int> left, right;
  for (int a = 0; a < n; ++a)
    (a < split ? left : right).push_back(nodes[order[a]]);
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  bisect(w, left, k_left, balance_tol, out, next_label);
  bisect(w, right, k_right, balance_tol, out, next_label + k_left);
}

}  // namespace

std::vector<int> partition_graph(const MuscleGraph& graph, int k, int balance_tol) {
  graph.check();
  const int m = graph.size();
  require(k >= 2, "k must be at least 2");
  require(k <= m, "cannot split into more groups than muscles");

  std::vector<int> nodes(m);
  std::iota(nodes.begin(), nodes.end(), 0);
  std::vector<int> out(m, -1);
  bisect(graph.w, nodes, k, balance_tol, out, 0);
  return out;
}

GroupAssignment assignment_from_partition(const MusculoskeletalModel& model,
                                          const std::vector<int>& part, int k, double eps_arm,
                                          int posture_samples) {
  require(static_cast<int>(part.size()) == model.muscle_count(), "partition size mismatch");
  MatX arm = max_abs_jacobian(model, posture_samples);
  GroupAssignment out;
  out.groups.resize(k);
  for (int i = 0; i < model.muscle_count(); ++i) {
    require(part[i] >= 0 && part[i] < k, "partition label out of range");
    out.groups[part[i]].muscles.push_back(i);
  }
  for (auto& g : out.groups) {
    std::set<int> joints;
    for (int i : g.muscles)
      for (int j = 0; j < model.joint_count(); ++j)
        if (arm(i, j) > eps_arm) joints.insert(j);
    g.joints.assign(joints.begin(), joints.end());
  }
  return out;
}

void save_assignment(const GroupAssignment& a, const std::string& path) {
  json j = json::array();
  for (const auto& g : a.groups) j.push_back({{"joints", g.joints}, {"muscles", g.muscles}});
  std::ofstream out(path);
  require(out.good(), "cannot open assignment file for writing: " + path);
  out << json{{"format", "myo-groups"}, {"groups", j}}.dump(2);
}

GroupAssignment load_assignment(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open assignment file: " + path);
  json j = json::parse(in);
  require(j.value("format", "") == "myo-groups", "not a group assignment file");
  GroupAssignment a;
  for (const auto& g : j.at("groups")) {
    MuscleGroup mg;
    mg.joints = g.at("joints").get<std::vector<int>>();
    mg.muscles = g.at("muscles").get<std::vector<int>>();
    a.groups.push_back(std::move(mg));
  }
  return a;
}

}  // namespace myo
