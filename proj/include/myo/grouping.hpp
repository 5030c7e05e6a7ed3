#pragma once

#include "myo/morphology.hpp"
#include "myo/schema.hpp"
#include "myo/types.hpp"

namespace myo {

// Symmetric nonnegative muscle-affinity graph with zero diagonal.
struct MuscleGraph {
  MatX w;

  int size() const { return static_cast<int>(w.rows()); }
  void check() const;
};

struct MuscleGroup {
  std::vector<int> joints;
  std::vector<int> muscles;
};

struct GroupAssignment {
  std::vector<MuscleGroup> groups;

  // Muscle sets must be disjoint and cover all muscles; every group's joints
  // must be movable by its muscles.
  void check(const MusculoskeletalModel& model, double eps_arm = 1e-4) const;
};

// One-round expansion (the default): muscles able to move the target joints,
// then the joints those muscles can move. fixpoint=true repeats until stable.
GroupAssignment manual_group(const MusculoskeletalModel& model,
                             const std::vector<int>& target_joints, double eps_arm = 1e-4,
                             bool fixpoint = false, int posture_samples = 32);

// Functional affinity from the static schema: |cosine| between the first-layer
// input-weight columns of the two muscles (f and l columns stacked).
// An untrained all-zero net yields an all-zero graph (flagged).
struct FunctionalGraphResult {
  MuscleGraph graph;
  bool untrained = false;
};
FunctionalGraphResult functional_graph(const MaskedAutoencoder& net);

// Spatial affinity exp(-d/sigma) with d the minimum distance between the two
// muscles' via-point sets at the zero posture.
MuscleGraph spatial_graph(const MusculoskeletalModel& model, double sigma_s = 0.1);

MuscleGraph blend_graphs(const MuscleGraph& functional, const MuscleGraph& spatial,
                         double alpha = 0.5, double beta = 0.5);

// Recursive spectral bisection (Fiedler sign split, balance enforced, ties
// broken by node index). Returns per-muscle group ids in [0, k).
std::vector<int> partition_graph(const MuscleGraph& graph, int k, int balance_tol = 1);

// Partition plus joint closure per group.
GroupAssignment assignment_from_partition(const MusculoskeletalModel& model,
                                          const std::vector<int>& part, int k,
                                          double eps_arm = 1e-4, int posture_samples = 32);

void save_assignment(const GroupAssignment& a, const std::string& path);
GroupAssignment load_assignment(const std::string& path);

}  // namespace myo
