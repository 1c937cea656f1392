#include <cmath>
#include <random>

#include <doctest.h>

#include "glio/pose_graph.hpp"

using namespace glio;

namespace {

NavState state_at(double stamp, const Eigen::Vector3d& t = {0, 0, 0}) {
  NavState s;
  s.stamp = stamp;
  s.pose.translation = t;
  return s;
}

Matrix6d diag6(double trans, double rot) {
  Vector6d d;
  d << trans, trans, trans, rot, rot, rot;
  return d.asDiagonal();
}

}  // namespace

TEST_CASE("add_state_node contracts") {
  PoseGraph g;
  const NodeId first = g.add_state_node(state_at(0.0));
  CHECK(first == 0);
  CHECK(g.node(first).fixed);  // gauge anchor

  CHECK_THROWS_AS(g.add_state_node(state_at(0.0)), std::invalid_argument);

  const NodeId second = g.add_state_node(state_at(0.1));
  CHECK(second == 1);
  CHECK(!g.node(second).fixed);
}

TEST_CASE("window freeze state machine") {
  GraphConfig cfg;
  cfg.window_size = 5;
  PoseGraph g(cfg);
  for (int k = 0; k <= 5; ++k) {
    g.add_state_node(state_at(0.1 * (k + 1)));
  }
  // After window_size + 1 insertions the oldest active node is frozen.
  CHECK(g.node_count() == 6);
  CHECK(g.active_begin() == 1);
  CHECK(g.node(1).fixed);
  CHECK(!g.node(2).fixed);

  g.add_state_node(state_at(0.7));
  CHECK(g.active_begin() == 2);
  CHECK(g.node(2).fixed);
}

TEST_CASE("add_factor contracts and GPS gating") {
  PoseGraph g;
  g.add_state_node(state_at(0.0));
  g.add_state_node(state_at(0.1, {1.0, 0.0, 0.0}));

  // Unknown node id.
  GpsFactor bad;
  bad.i = 99;
  CHECK_THROWS_AS(g.add_factor(bad), std::invalid_argument);

  // GPS exactly at the node translation: accepted.
  GpsFactor at_node;
  at_node.i = 1;
  at_node.position = {1.0, 0.0, 0.0};
  at_node.information = Eigen::Vector3d(0.25, 0.25, 0.025).asDiagonal();
  CHECK(g.add_factor(at_node).has_value());

  // 50 m off a well-constrained node is gated.
  GpsFactor far = at_node;
  far.position = {51.0, 0.0, 0.0};
  CHECK(!g.add_factor(far).has_value());
  CHECK(g.gps_rejections().back().reason == "chi-square-gate");

  // Invalid quality.
  GpsFactor invalid = at_node;
  invalid.fix_quality = 0;
  CHECK(!g.add_factor(invalid).has_value());
  CHECK(g.gps_rejections().back().reason == "invalid-quality");

  // Preintegration between non-adjacent nodes is accepted.
  g.add_state_node(state_at(0.2));
  PreintegrationFactor p;
  p.i = 0;
  p.j = 2;
  p.preint.duration = 0.2;
  CHECK(g.add_factor(p).has_value());
}

TEST_CASE("single free node with one GPS factor converges to the fix") {
  PoseGraph g;
  g.add_state_node(state_at(0.0));
  g.add_state_node(state_at(0.1));

  GpsFactor f;
  f.i = 1;
  f.position = {2.0, -1.0, 0.5};
  f.information = Eigen::Matrix3d::Identity();
  REQUIRE(g.add_factor(f).has_value());

  const OptimizeReport rep = g.optimize_window(SolverConfig{});
  CHECK(rep.converged);
  CHECK(rep.final_cost <= rep.initial_cost);
  CHECK((g.node(1).state.pose.translation - Eigen::Vector3d(2.0, -1.0, 0.5))
            .norm() < 1e-9);
}

TEST_CASE("1-D two-node chain matches the closed-form normal equations") {
  // Odometry dx = 10 between two free nodes, GPS at 0 and 9. The GPS pair
  // carries twice the odometry information; the stated optimum
  // (x0, x1) = (-0.25, 9.25) is the exact solution of those normal
  // equations, which the oracle below reproduces.
  const double w_odom = 1.0;
  const double w_gps = 2.0;

  // Closed-form oracle: minimize w_o (x1-x0-10)^2 + w_g x0^2 + w_g (x1-9)^2.
  // Stationarity gives H x = rhs with the blocks below.
  Eigen::Matrix2d h;
  h << w_odom + w_gps, -w_odom, -w_odom, w_odom + w_gps;
  Eigen::Vector2d rhs;
  rhs << -w_odom * 10.0, w_odom * 10.0 + w_gps * 9.0;
  const Eigen::Vector2d expect = h.ldlt().solve(rhs);
  CHECK(expect(0) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(expect(1) == doctest::Approx(9.25).epsilon(1e-12));

  std::vector<StateNode> nodes;
  nodes.push_back({0, state_at(0.0), false});
  nodes.push_back({1, state_at(1.0), false});
  std::vector<Factor> factors;
  LidarOdometryFactor odom;
  odom.i = 0;
  odom.j = 1;
  odom.relative_pose.translation = {10.0, 0.0, 0.0};
  odom.information = diag6(w_odom, w_odom);
  factors.emplace_back(odom);
  GpsFactor g0;
  g0.i = 0;
  g0.position = {0.0, 0.0, 0.0};
  g0.information = (Eigen::Vector3d::Constant(w_gps)).asDiagonal();
  factors.emplace_back(g0);
  GpsFactor g1;
  g1.i = 1;
  g1.position = {9.0, 0.0, 0.0};
  g1.information = (Eigen::Vector3d::Constant(w_gps)).asDiagonal();
  factors.emplace_back(g1);

  PoseGraph graph = PoseGraph::from_parts(GraphConfig{}, std::move(nodes),
                                          std::move(factors), std::nullopt);
  const std::vector<NodeId> free_ids = {0, 1};
  SolverConfig cfg;
  cfg.max_iterations = 50;
  const OptimizeReport rep = graph.optimize_nodes(free_ids, cfg);
  CHECK(rep.converged);
  CHECK(std::abs(graph.node(0).state.pose.translation.x() - expect(0)) < 1e-9);
  CHECK(std::abs(graph.node(1).state.pose.translation.x() - expect(1)) < 1e-9);
  CHECK(std::abs(graph.node(0).state.pose.translation.y()) < 1e-9);
}

TEST_CASE("optimization recovers ground truth through all factor types") {
  // States on a short arc with velocities; factors generated from the truth;
  // initial values perturbed. Reaching machine-zero cost validates residuals
  // and Jacobians together.
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::vector<NavState> truth;
  for (int k = 0; k < 4; ++k) {
    NavState s;
    s.stamp = 0.1 * k;
    s.pose.rotation = rot_exp({0.02 * k, -0.01 * k, 0.3 * k});
    s.pose.translation = {1.0 * k, 0.2 * k * k, 0.1 * k};
    s.velocity = {1.0, 0.4 * k, 0.1};
    truth.push_back(s);
  }
  const GravityVector gravity{{0.0, 0.0, -9.81}};

  std::vector<StateNode> nodes;
  for (int k = 0; k < 4; ++k) {
    NavState init = truth[k];
    if (k > 0) {
      init.pose.translation += Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.2;
      init.pose.rotation =
          init.pose.rotation * rot_exp(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.05);
      init.velocity += Eigen::Vector3d(u(rng), u(rng), u(rng)) * 0.2;
    }
    nodes.push_back({k, init, k == 0});
  }

  std::vector<Factor> factors;
  for (int k = 0; k + 1 < 4; ++k) {
    // Preintegration deltas consistent with the truth pair by construction.
    const NavState& a = truth[k];
    const NavState& b = truth[k + 1];
    const double dt = b.stamp - a.stamp;
    PreintegrationFactor f;
    f.i = k;
    f.j = k + 1;
    f.preint.duration = dt;
    f.preint.delta_rotation = a.pose.rotation.inverse() * b.pose.rotation;
    f.preint.delta_velocity =
        a.pose.rotation.inverse() * (b.velocity - a.velocity - gravity.v * dt);
    f.preint.delta_position =
        a.pose.rotation.inverse() *
        (b.pose.translation - a.pose.translation - a.velocity * dt -
         0.5 * gravity.v * dt * dt);
    f.preint.information = Eigen::Matrix<double, 9, 9>::Identity() * 100.0;
    factors.emplace_back(f);

    LidarOdometryFactor l;
    l.i = k;
    l.j = k + 1;
    l.relative_pose = a.pose.inverse() * b.pose;
    l.information = diag6(100.0, 400.0);
    factors.emplace_back(l);
  }
  GpsFactor gps;
  gps.i = 3;
  gps.position = {truth[3].pose.translation.x(), truth[3].pose.translation.y(),
                  truth[3].pose.translation.z()};
  gps.information = Eigen::Matrix3d::Identity();
  factors.emplace_back(gps);
  LoopClosureFactor loop;
  loop.i = 0;
  loop.j = 3;
  loop.relative_pose = truth[0].pose.inverse() * truth[3].pose;
  loop.information = diag6(100.0, 400.0);
  factors.emplace_back(loop);

  GraphConfig gc;
  gc.gravity = gravity;
  PoseGraph graph = PoseGraph::from_parts(gc, std::move(nodes),
                                          std::move(factors), std::nullopt);
  SolverConfig cfg;
  cfg.max_iterations = 100;
  const OptimizeReport rep = graph.optimize_window(cfg);
  CHECK(rep.converged);
  CHECK(rep.final_cost < 1e-14);
  for (int k = 1; k < 4; ++k) {
    CHECK((graph.node(k).state.pose.translation - truth[k].pose.translation)
              .norm() < 1e-6);
    CHECK(graph.node(k).state.pose.rotation.angle_to(truth[k].pose.rotation) <
          1e-6);
    CHECK((graph.node(k).state.velocity - truth[k].velocity).norm() < 1e-6);
  }
}

TEST_CASE("optimize_window never increases cost and reports sane iterations") {
  PoseGraph g;
  g.add_state_node(state_at(0.0));
  g.add_state_node(state_at(0.1, {0.5, 0.0, 0.0}));
  GpsFactor f;
  f.i = 1;
  f.position = {1.0, 1.0, 0.0};
  f.information = Eigen::Matrix3d::Identity();
  g.add_factor(f);
  SolverConfig cfg;
  const OptimizeReport rep = g.optimize_window(cfg);
  CHECK(rep.final_cost <= rep.initial_cost);
  CHECK(rep.iterations <= cfg.max_iterations);
}

TEST_CASE("factor removal and re-adding yields the identical optimum") {
  auto build = [](bool cycle) {
    PoseGraph g;
    g.add_state_node(state_at(0.0));
    g.add_state_node(state_at(0.1, {0.3, 0.1, 0.0}));
    LidarOdometryFactor odom;
    odom.i = 0;
    odom.j = 1;
    odom.relative_pose.translation = {1.0, 0.0, 0.0};
    odom.information = diag6(100.0, 400.0);
    g.add_factor(odom);
    GpsFactor f;
    f.i = 1;
    f.position = {1.2, 0.0, 0.0};
    f.information = Eigen::Matrix3d::Identity();
    if (cycle) {
      const auto id = g.add_factor(f);
      g.remove_factor(*id);
    }
    g.add_factor(f);
    return g;
  };
  PoseGraph a = build(false);
  PoseGraph b = build(true);
  a.optimize_window(SolverConfig{});
  b.optimize_window(SolverConfig{});
  CHECK((a.node(1).state.pose.translation - b.node(1).state.pose.translation)
            .norm() == 0.0);
}

TEST_CASE("detect_loop_candidates") {
  GraphConfig cfg;
  cfg.window_size = 10;
  PoseGraph straight(cfg);
  for (int k = 0; k < 60; ++k) {
    straight.add_state_node(state_at(0.1 * (k + 1), {1.0 * k, 0.0, 0.0}));
  }
  CHECK(straight.detect_loop_candidates(59, 5.0, 10).empty());

  // A loop returning near the start.
  PoseGraph loop(cfg);
  const double radius = 30.0;
  for (int k = 0; k < 80; ++k) {
    const double angle = 2.0 * 3.14159265358979323846 * k / 79.0;
    loop.add_state_node(state_at(
        0.1 * (k + 1),
        {radius * std::sin(angle), radius * (1.0 - std::cos(angle)), 0.0}));
  }
  const auto candidates = loop.detect_loop_candidates(79, 5.0, 20);
  REQUIRE(!candidates.empty());
  CHECK(candidates.front() == 0);
}

TEST_CASE("merge_sessions") {
  // A small fully optimized session merged with itself via identity links.
  auto build = [] {
    PoseGraph g;
    g.add_state_node(state_at(0.0));
    g.add_state_node(state_at(0.1, {1.0, 0.0, 0.0}));
    g.add_state_node(state_at(0.2, {2.0, 0.0, 0.0}));
    LidarOdometryFactor odom;
    odom.information = diag6(100.0, 400.0);
    odom.relative_pose.translation = {1.0, 0.0, 0.0};
    odom.i = 0;
    odom.j = 1;
    g.add_factor(odom);
    odom.i = 1;
    odom.j = 2;
    g.add_factor(odom);
    SolverConfig cfg;
    cfg.max_iterations = 50;
    g.optimize_window(cfg);
    return g;
  };
  const PoseGraph session = build();

  std::vector<PoseGraph::SessionLink> links;
  for (NodeId k = 0; k < 3; ++k) {
    PoseGraph::SessionLink link;
    link.old_node = k;
    link.new_node = k;
    link.relative_pose = Se3Pose::identity();
    link.information = diag6(100.0, 400.0);
    links.push_back(link);
  }
  const PoseGraph merged =
      PoseGraph::merge_sessions(session, session, links, PoseGraph::MergeConfig{});
  REQUIRE(merged.node_count() == 6);
  for (NodeId k = 0; k < 3; ++k) {
    CHECK((merged.node(k + 3).state.pose.translation -
           session.node(k).state.pose.translation)
              .norm() < 1e-9);
  }

  // No links is an error.
  CHECK_THROWS_AS(
      PoseGraph::merge_sessions(session, session, {}, PoseGraph::MergeConfig{}),
      std::invalid_argument);

  // Anchors more than the limit apart refuse to merge.
  PoseGraph far_a = build();
  PoseGraph far_b = build();
  far_a.anchor() = GeoLla::from_degrees(47.0, 8.0, 400.0);
  far_b.anchor() = GeoLla::from_degrees(47.1, 8.0, 400.0);  // ~11 km north
  CHECK_THROWS_AS(PoseGraph::merge_sessions(far_a, far_b, links, PoseGraph::MergeConfig{}),
                  AnchorMismatchError);
}

TEST_CASE("fused trajectory beats odometry-only on a drifting chain") {
  // Odometry with a consistent heading bias accumulates error; sparse GPS
  // keeps the fused version near the truth.
  const int n = 100;
  std::vector<Eigen::Vector3d> truth;
  for (int k = 0; k < n; ++k) truth.push_back({1.0 * k, 0.0, 0.0});

  auto run = [&](bool with_gps) {
    PoseGraph g;
    SolverConfig solver;
    const Rotation drift = rot_exp({0.0, 0.0, 0.004});  // per-step yaw bias
    for (int k = 0; k < n; ++k) {
      if (k == 0) {
        g.add_state_node(state_at(0.1, truth[0]));
        continue;
      }
      const StateNode& prev = g.nodes().back();
      Se3Pose rel;
      rel.translation = {1.0, 0.0, 0.0};
      rel.rotation = drift;
      NavState init;
      init.stamp = 0.1 * (k + 1);
      init.pose = prev.state.pose * rel;
      const NodeId id = g.add_state_node(init);
      LidarOdometryFactor odom;
      odom.i = id - 1;
      odom.j = id;
      odom.relative_pose = rel;
      odom.information = diag6(100.0, 400.0);
      g.add_factor(odom);
      if (with_gps && k % 10 == 0) {
        GpsFactor f;
        f.i = id;
        f.position = {truth[k].x(), truth[k].y(), truth[k].z()};
        f.information = Eigen::Vector3d(0.25, 0.25, 0.025).asDiagonal();
        g.add_factor(f);
      }
      g.optimize_window(solver);
    }
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += (g.node(k).state.pose.translation - truth[k]).norm();
    }
    return sum / n;
  };

  const double fused = run(true);
  const double odom_only = run(false);
  CHECK(fused < odom_only);
}
