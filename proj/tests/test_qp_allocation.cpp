#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include "myo/allocation.hpp"
#include "myo/morphology.hpp"
#include "myo/qp.hpp"

#include <random>

using namespace myo;

namespace {

AllocationProblem antagonist_problem(double tau, double f_min = 5.0, double f_max = 200.0) {
  // 1 joint, 2 muscles, arms -0.02 / +0.02
  MatX G(2, 1);
  G << -0.02, 0.02;
  AllocationProblem p = AllocationProblem::with_defaults(G, VecX::Constant(1, tau),
                                                         VecX::Constant(2, f_min),
                                                         VecX::Constant(2, f_max));
  return p;
}

struct RandomProblem {
  AllocationProblem p;
  bool constructed_feasible = false;
};

RandomProblem random_problem(std::mt19937_64& rng, bool make_feasible) {
  std::uniform_int_distribution<int> um(2, 4);
  std::uniform_real_distribution<double> uarm(-0.05, 0.05);
  std::uniform_real_distribution<double> uf(0.0, 3.0);
  std::uniform_real_distribution<double> uw(0.5, 2.0);

  const int m = um(rng);
  const int n = std::uniform_int_distribution<int>(1, m - 1)(rng);
  MatX G(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = uarm(rng);

  VecX f_min(m), f_max(m), w1(m);
  for (int i = 0; i < m; ++i) {
    f_min[i] = uf(rng);
    f_max[i] = f_min[i] + 20.0 + 10.0 * uf(rng);
    w1[i] = uw(rng);
  }

  RandomProblem out;
  if (make_feasible) {
    // tau realized by a strictly interior tension vector
    VecX f0(m);
    for (int i = 0; i < m; ++i)
      f0[i] = f_min[i] + (0.2 + 0.6 * uf(rng) / 3.0) * (f_max[i] - f_min[i]);
    out.p.tau = -G.transpose() * f0;
    out.constructed_feasible = true;
  } else {
    // torque far beyond what the box can produce
    VecX worst = VecX::Zero(n);
    for (int j = 0; j < n; ++j) {
      double reach = 0.0;
      for (int i = 0; i < m; ++i) reach += std::abs(G(i, j)) * f_max[i];
      worst[j] = 3.0 * reach + 1.0;
    }
    out.p.tau = worst;
  }
  out.p.G = G;
  out.p.f_min = f_min;
  out.p.f_max = f_max;
  out.p.w1 = w1;
  out.p.w2 = VecX::Constant(n, 1e4);
  return out;
}

}  // namespace

TEST_CASE("qp core: unconstrained minimum inside the box") {
  qp::Problem q;
  q.H = 2.0 * MatX::Identity(2, 2);
  q.g = VecX::Constant(2, -2.0);  // min at (1, 1)
  qp::append_box(q, VecX::Zero(2), VecX::Constant(2, 5.0));
  auto r = qp::solve(q, VecX::Zero(2));
  CHECK(r.optimal);
  CHECK((r.x - VecX::Ones(2)).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(r.kkt_residual < 1e-8);
}

TEST_CASE("qp core: active bounds and multiplier release") {
  qp::Problem q;
  q.H = 2.0 * MatX::Identity(2, 2);
  VecX target(2);
  target << 4.0, -3.0;  // min at (4, -3), box clips to (2, 0)
  q.g = -2.0 * target;
  qp::append_box(q, VecX::Zero(2), VecX::Constant(2, 2.0));
  auto r = qp::solve(q, VecX::Ones(2));
  CHECK(r.optimal);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("qp core: equality-constrained minimum") {
  // min x^2 + y^2 s.t. x + y = 2 -> (1, 1)
  qp::Problem q;
  q.H = 2.0 * MatX::Identity(2, 2);
  q.g = VecX::Zero(2);
  q.A_eq = MatX::Ones(1, 2);
  q.b_eq = VecX::Constant(1, 2.0);
  qp::append_box(q, VecX::Constant(2, -10.0), VecX::Constant(2, 10.0));
  auto r = qp::solve(q, VecX::Ones(2));
  CHECK(r.optimal);
  CHECK((r.x - VecX::Ones(2)).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("allocate_exact: zero torque with zero lower bound gives zero tension") {
  auto p = antagonist_problem(0.0, 0.0);
  auto r = allocate_exact(p);
  CHECK(r.feasible);
  CHECK(r.f.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("allocate_exact: antagonist fixture matches the 1-D nullspace grid oracle") {
  auto p = antagonist_problem(1.0, 5.0);
  auto r = allocate_exact(p);
  CHECK(r.feasible);
  CHECK(r.torque_residual <= 1e-8);
  CHECK(r.kkt_residual <= 1e-8);
  auto oracle = oracles::exact_oracle(p.G, p.tau, p.f_min, p.f_max, p.w1);
  REQUIRE(oracle.feasible);
  CHECK((r.f - oracle.f).lpNorm<Eigen::Infinity>() < 1e-3);
  // hand value: f1 - f2 = 50 with f2 clipped at f_min -> (55, 5)
  CHECK(r.f[0] == doctest::Approx(55.0).epsilon(1e-6));
  CHECK(r.f[1] == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("allocate_exact: torque beyond the box reports infeasible") {
  auto p = antagonist_problem(10.0);  // needs ~500 N against f_max 200
  auto r = allocate_exact(p);
  CHECK(!r.feasible);
}

TEST_CASE("allocate_relaxed: W2 = 0 degenerates to the box projection of zero") {
  auto p = antagonist_problem(1.0);
  p.w2.setZero();
  auto r = allocate_relaxed(p);
  CHECK((r.f - p.f_min).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("allocate_relaxed: penalty limit approaches the exact solution") {
  // The gap closes like 1/W2 (hand algebra on this fixture: f1 = 1.1/0.02 /
  // (1 + 2/(4e-4 W2)), so W2 = 1e6 still leaves 0.137 N); W2 = 1e12 lands
  // well inside 1e-3 N.
  auto p = antagonist_problem(1.0);
  p.w2 = VecX::Constant(1, 1e6);
  auto exact = allocate_exact(p);
  auto relaxed6 = allocate_relaxed(p);
  CHECK((exact.f - relaxed6.f).lpNorm<Eigen::Infinity>() ==
        doctest::Approx(0.137).epsilon(0.05));
  p.w2 = VecX::Constant(1, 1e12);
  auto relaxed12 = allocate_relaxed(p);
  CHECK((exact.f - relaxed12.f).lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("allocate_relaxed: infeasible torque minimizes the residual to the box image") {
  auto p = antagonist_problem(10.0);  // max torque = 0.02 * 200 = 4
  auto r = allocate_relaxed(p);
  auto oracle = oracles::relaxed_oracle(p.G, p.tau, p.f_min, p.f_max, p.w1, p.w2);
  CHECK((r.f - oracle.f).lpNorm<Eigen::Infinity>() < 1e-3);
  // torque error cannot fall below distance from the box image
  double best_err = 10.0 - 0.02 * 200.0 + 0.02 * 5.0;  // extensor at max, flexor at min
  CHECK(std::abs((p.G.transpose() * r.f + p.tau)[0]) ==
        doctest::Approx(best_err).epsilon(1e-2));
}

TEST_CASE("allocate_exact: W1 scaling leaves the argmin unchanged") {
  auto p = antagonist_problem(1.5);
  auto base = allocate_exact(p);
  p.w1 *= 37.5;
  auto scaled = allocate_exact(p);
  CHECK((base.f - scaled.f).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("allocation: dimension mismatches are rejected") {
  auto p = antagonist_problem(1.0);
  p.tau = VecX::Zero(2);
  CHECK_THROWS_AS(allocate_exact(p), InvalidInput);
  auto q = antagonist_problem(1.0);
  q.w1 = VecX::Ones(3);
  CHECK_THROWS_AS(allocate_relaxed(q), InvalidInput);
}

TEST_CASE("random 2-4 muscle problems match the brute-force oracles") {
  std::mt19937_64 rng(2024);
  int feasible_checked = 0, infeasible_checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    bool make_feasible = trial % 3 != 2;
    auto rp = random_problem(rng, make_feasible);
    auto exact = allocate_exact(rp.p);
    if (make_feasible) {
      CHECK(exact.feasible);
      CHECK(exact.torque_residual <= 1e-8);
      auto oracle = oracles::exact_oracle(rp.p.G, rp.p.tau, rp.p.f_min, rp.p.f_max, rp.p.w1);
      REQUIRE(oracle.feasible);
      CHECK((exact.f - oracle.f).lpNorm<Eigen::Infinity>() < 1e-3);
      ++feasible_checked;
    } else {
      CHECK(!exact.feasible);
      ++infeasible_checked;
    }
    auto relaxed = allocate_relaxed(rp.p);
    auto oracle = oracles::relaxed_oracle(rp.p.G, rp.p.tau, rp.p.f_min, rp.p.f_max, rp.p.w1,
                                          rp.p.w2);
    CHECK((relaxed.f - oracle.f).lpNorm<Eigen::Infinity>() < 1e-3);
    CHECK(relaxed.kkt_residual < 1e-8);
  }
  CHECK(feasible_checked > 30);
  CHECK(infeasible_checked > 10);
}

TEST_CASE("solutions satisfy first-order optimality") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    auto rp = random_problem(rng, true);
    auto exact = allocate_exact(rp.p);
    CHECK(exact.kkt_residual <= 1e-8);
    auto relaxed = allocate_relaxed(rp.p);
    CHECK(relaxed.kkt_residual <= 1e-8);
  }
}
