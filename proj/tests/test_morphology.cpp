#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include "myo/morphology.hpp"

#include <random>

using namespace myo;

TEST_CASE("muscle_lengths: zero posture equals world-point distance") {
  auto m = fixtures::pin_antagonist();
  VecX l = muscle_lengths(m, VecX::Zero(1));
  // flexor runs from (-0.3, 0.02) on the base to (0, 0.02) on the child
  CHECK(l[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(l[1] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("muscle_lengths: matches hand-rotated chord geometry at theta=0.1") {
  auto m = fixtures::pin_antagonist(0.02, 0.3);
  double theta = 0.1;
  VecX l = muscle_lengths(m, VecX::Constant(1, theta));
  // Independent 2-D rotation of the child attachment (0, +-r).
  auto chord = [&](double y) {
    double cx = -std::sin(theta) * y;
    double cy = std::cos(theta) * y;
    double ax = -0.3, ay = y;
    return std::hypot(cx - ax, cy - ay);
  };
  CHECK(l[0] == doctest::Approx(chord(0.02)).epsilon(1e-12));
  CHECK(l[1] == doctest::Approx(chord(-0.02)).epsilon(1e-12));
}

TEST_CASE("muscle_lengths: bitwise deterministic") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << 0.37, -0.81;
  VecX a = muscle_lengths(m, theta);
  VecX b = muscle_lengths(m, theta);
  for (int i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("muscle_lengths: rejects non-finite posture") {
  auto m = fixtures::pin_antagonist();
  VecX bad(1);
  bad << std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(muscle_lengths(m, bad), InvalidInput);
}

TEST_CASE("muscle_jacobian: decoupled joint column is zero") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << 0.4, 0.6;
  MatX G = muscle_jacobian(m, theta);
  // elbow muscles (2,3) have both via points on links rigid wrt the shoulder
  CHECK(std::abs(G(2, 0)) < 1e-8);
  CHECK(std::abs(G(3, 0)) < 1e-8);
  // and nonzero elbow columns
  CHECK(std::abs(G(2, 1)) > 1e-3);
}

TEST_CASE("muscle_jacobian: moment arm equals the fixture's r at zero") {
  double r = 0.02;
  auto m = fixtures::pin_antagonist(r);
  MatX G = muscle_jacobian(m, VecX::Zero(1));
  CHECK(G(0, 0) == doctest::Approx(-r).epsilon(1e-6));
  CHECK(G(1, 0) == doctest::Approx(r).epsilon(1e-6));
}

TEST_CASE("muscle_jacobian: first-order Taylor consistency") {
  auto m = fixtures::planar_two_link();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    VecX theta(2);
    theta << u(rng), u(rng);
    VecX dtheta(2);
    dtheta << 1e-4 * u(rng), 1e-4 * u(rng);
    MatX G = muscle_jacobian(m, theta);
    VecX pred = muscle_lengths(m, theta) + G * dtheta;
    VecX act = muscle_lengths(m, theta + dtheta);
    CHECK((act - pred).lpNorm<Eigen::Infinity>() < 1e-7);
  }
}

TEST_CASE("tensions_to_torque: zero tension, antagonist symmetry, single muscle") {
  double r = 0.02;
  auto m = fixtures::pin_antagonist(r);
  CHECK(tensions_to_torque(m, VecX::Zero(1), VecX::Zero(2)).lpNorm<Eigen::Infinity>() == 0.0);

  VecX both = VecX::Constant(2, 17.0);
  CHECK(std::abs(tensions_to_torque(m, VecX::Zero(1), both)[0]) < 1e-9);

  VecX single(2);
  single << 10.0, 0.0;
  VecX tau = tensions_to_torque(m, VecX::Zero(1), single);
  CHECK(std::abs(tau[0]) == doctest::Approx(r * 10.0).epsilon(1e-6));

  VecX negative(2);
  negative << -1.0, 0.0;
  CHECK_THROWS_AS(tensions_to_torque(m, VecX::Zero(1), negative), InvalidInput);
}

TEST_CASE("tensions_to_torque: linear in f") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << 0.3, -0.5;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  VecX f1(4), f2(4);
  for (int i = 0; i < 4; ++i) {
    f1[i] = u(rng);
    f2[i] = u(rng);
  }
  double a = 0.7, b = 1.9;
  VecX lhs = tensions_to_torque(m, theta, a * f1 + b * f2);
  VecX rhs = a * tensions_to_torque(m, theta, f1) + b * tensions_to_torque(m, theta, f2);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("forward_kinematics: zero posture and planar textbook form") {
  double L1 = 0.3, L2 = 0.25;
  auto m = fixtures::planar_two_link(L1, L2);
  Vec3 p0 = forward_kinematics(m, VecX::Zero(2), 0);
  CHECK(p0.isApprox(Vec3(L1 + L2, 0, 0), 1e-12));

  VecX theta(2);
  theta << 0.7, -0.4;
  Vec3 p = forward_kinematics(m, theta, 0);
  Vec3 want = oracles::planar_fk(L1, L2, theta[0], theta[1]);
  CHECK((p - want).norm() < 1e-12);

  CHECK_THROWS_AS(forward_kinematics(m, theta, 3), InvalidInput);
}

TEST_CASE("point_jacobian: Taylor consistency") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << 0.5, 0.3;
  VecX dtheta(2);
  dtheta << 1e-4, -1e-4;
  MatX J = point_jacobian(m, theta, 0);
  Vec3 pred = forward_kinematics(m, theta, 0) + J * dtheta;
  Vec3 act = forward_kinematics(m, theta + dtheta, 0);
  CHECK((act - pred).norm() < 1e-7);
}

TEST_CASE("solve_ik: already-solved input returned unchanged") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << 0.6, -0.8;
  Vec3 target = forward_kinematics(m, theta, 0);
  IkResult r = solve_ik(m, target, theta, 0);
  CHECK(r.converged);
  CHECK((r.theta - theta).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("solve_ik: reachable targets match a closed-form branch") {
  double L1 = 0.3, L2 = 0.25;
  auto m = fixtures::planar_two_link(L1, L2);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uq(-1.2, 1.2);
  for (int trial = 0; trial < 10; ++trial) {
    VecX truth(2);
    truth << uq(rng), uq(rng);
    Vec3 target = oracles::planar_fk(L1, L2, truth[0], truth[1]);
    VecX init(2);
    init << truth[0] + 0.2, truth[1] - 0.2;
    IkResult r = solve_ik(m, target, init, 0);
    CHECK(r.converged);
    CHECK(r.residual < 1e-5);
    auto sols = oracles::planar_ik(L1, L2, target[0], target[1]);
    REQUIRE(!sols.empty());
    double best = 1e300;
    for (const auto& s : sols)
      best = std::min(best, (Eigen::Vector2d(r.theta[0], r.theta[1]) - s).norm());
    CHECK(best < 1e-3);
  }
}

TEST_CASE("solve_ik: unreachable target reports failure at the workspace boundary") {
  double L1 = 0.3, L2 = 0.25;
  auto m = fixtures::planar_two_link(L1, L2);
  Vec3 target(0.9, 0.3, 0.0);  // beyond L1+L2 = 0.55
  IkResult r = solve_ik(m, target, VecX::Zero(2), 0);
  CHECK(!r.converged);
  const double boundary = target.norm() - (L1 + L2);
  CHECK(std::abs(r.residual - boundary) < 1e-4);
}

TEST_CASE("solve_ik: idempotent on solved inputs") {
  auto m = fixtures::planar_two_link();
  VecX theta(2);
  theta << -0.4, 0.9;
  Vec3 target = forward_kinematics(m, theta, 0);
  IkResult once = solve_ik(m, target, theta, 0);
  IkResult twice = solve_ik(m, target, once.theta, 0);
  CHECK((twice.theta - once.theta).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("jacobian consistency over random in-limit postures") {
  for (auto model : {fixtures::pin_antagonist(), fixtures::planar_two_link()}) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int n = model.joint_count();
    for (int trial = 0; trial < 100; ++trial) {
      VecX theta(n), dtheta(n);
      for (int j = 0; j < n; ++j) {
        const auto& jd = model.joints[j];
        theta[j] = jd.limit_min + u01(rng) * (jd.limit_max - jd.limit_min);
        dtheta[j] = (u01(rng) * 2.0 - 1.0) * 1e-4;
      }
      MatX G = muscle_jacobian(model, theta);
      VecX err = muscle_lengths(model, theta + dtheta) - muscle_lengths(model, theta) - G * dtheta;
      CHECK(err.lpNorm<Eigen::Infinity>() <= 1e-7);
    }
  }
}

TEST_CASE("model validation catches broken invariants") {
  auto m = fixtures::pin_antagonist();
  auto bad_axis = m;
  bad_axis.joints[0].axis = Vec3(0, 0, 2);
  CHECK_THROWS_AS(bad_axis.validate(), InvalidInput);

  auto bad_limits = m;
  bad_limits.joints[0].limit_min = 1.0;
  bad_limits.joints[0].limit_max = -1.0;
  CHECK_THROWS_AS(bad_limits.validate(), InvalidInput);

  auto zero_seg = m;
  zero_seg.muscles[0].via_points[0] = {1, Vec3(0, 0.02, 0)};
  CHECK_THROWS_AS(zero_seg.validate(), InvalidInput);

  auto bad_link = m;
  bad_link.muscles[0].via_points[0].link = 7;
  CHECK_THROWS_AS(bad_link.validate(), InvalidInput);

  // fewer muscles than joints only warns
  auto warn = fixtures::planar_two_link();
  warn.muscles.resize(1);
  CHECK(!warn.validate().empty());
}
