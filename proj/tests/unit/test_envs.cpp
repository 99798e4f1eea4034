#include <gtest/gtest.h>

#include <cmath>

#include "procurl/envs.hpp"
#include "procurl/errors.hpp"

using namespace procurl;

TEST(Bandit, PsiAreUnitNorm) {
  Rng rng(1);
  for (const auto& scheme : {PsiScheme::orthogonal(), PsiScheme::random_unit(), PsiScheme::clustered(3, 0.2)}) {
    const Bandit b = make_bandit(6, 6, scheme, rng);
    for (const auto& c : b.spec.contexts) EXPECT_NEAR(b.spec.psi(c.id).norm(), 1.0, 1e-12);
  }
}

TEST(Bandit, OrthogonalNeedsEnoughDimensions) {
  Rng rng(1);
  EXPECT_THROW(make_bandit(3, 4, PsiScheme::orthogonal(), rng), ConfigError);
  const Bandit b = make_bandit(4, 4, PsiScheme::orthogonal(), rng);
  EXPECT_DOUBLE_EQ(b.spec.psi(0).dot(b.spec.psi(3)), 0.0);
}

TEST(Bandit, DeterministicGivenSeed) {
  Rng a(9), b(9);
  const Bandit x = make_bandit(5, 7, PsiScheme::clustered(2, 0.3), a);
  const Bandit y = make_bandit(5, 7, PsiScheme::clustered(2, 0.3), b);
  EXPECT_EQ(x.spec.contexts, y.spec.contexts);
  EXPECT_EQ(x.spec.optimal_action, y.spec.optimal_action);
}

TEST(Bandit, FeatureDifferenceIsPsi) {
  Rng rng(2);
  const Bandit b = make_bandit(3, 4, PsiScheme::random_unit(), rng);
  std::vector<SparseEntry> f;
  for (const auto& c : b.spec.contexts) {
    const int opt = b.spec.optimal_action[c.id];
    b.features->features(0, c, 1 - opt, f);
    EXPECT_TRUE(f.empty());
    b.features->features(0, c, opt, f);
    Eigen::VectorXd dense = Eigen::VectorXd::Zero(3);
    for (const auto& e : f) dense[e.index] = e.value;
    EXPECT_LT((dense - b.spec.psi(c.id)).norm(), 1e-15);
  }
}

TEST(GateGrid, AllGatesCount) {
  // widths 1,3,...,11 on an 11-wide grid: 11 + 9 + 7 + 5 + 3 + 1.
  EXPECT_EQ(GateGridSpec::all_gates(11).size(), 36u);
  EXPECT_EQ(GateGridSpec::all_gates(5).size(), 9u);
}

TEST(GateGrid, SpecValidation) {
  GateGridSpec s;
  s.wall_row = 0;
  EXPECT_THROW(GateGrid{s}, ConfigError);
  s = GateGridSpec{};
  s.contexts = {{0, 3}};
  EXPECT_THROW(GateGrid{s}, ConfigError);
  s.contexts = {{1, 2}};
  EXPECT_THROW(GateGrid{s}, ConfigError);
  s = GateGridSpec{};
  s.slip = 1.0;
  EXPECT_THROW(GateGrid{s}, ConfigError);
}

TEST(GateGrid, WallCrashGoalExitAndEdges) {
  GateGridSpec s;
  s.grid_size = 5;
  s.wall_row = 2;
  s.contexts = {{4, 1}};
  GateGrid g(s);
  const Context c{0, {2.0, 1.0}};
  std::vector<Outcome> out;
  g.transition(c, g.cell(1, 0), GateGrid::Down, out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].state, g.done_state());
  g.transition(c, g.cell(1, 4), GateGrid::Down, out);
  EXPECT_EQ(out[0].state, g.cell(2, 4));
  g.transition(c, g.cell(0, 0), GateGrid::Up, out);
  EXPECT_EQ(out[0].state, g.cell(0, 0));
  g.transition(c, g.goal_state(), GateGrid::Left, out);
  EXPECT_EQ(out[0].state, g.done_state());
  EXPECT_EQ(g.reward(c, g.goal_state(), GateGrid::Up), 1.0);
  EXPECT_EQ(g.reward(c, g.cell(3, 3), GateGrid::Up), 0.0);
}

TEST(GateGrid, SlipSpreadsMassOverAllMoves) {
  GateGridSpec s;
  s.slip = 0.4;
  GateGrid g(s);
  const Context c = g.task_space()[0];
  std::vector<Outcome> out;
  g.transition(c, g.cell(2, 5), GateGrid::Right, out);
  double right = 0.0, total = 0.0;
  for (const auto& o : out) {
    total += o.prob;
    if (o.state == g.cell(2, 6)) right = o.prob;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(right, 0.6 + 0.1, 1e-15);
}

TEST(GateGrid, TaskSpaceFeatures) {
  GateGrid g(GateGridSpec{});
  const auto ts = g.task_space();
  ASSERT_EQ(ts.size(), 36u);
  EXPECT_EQ(ts[0].features, (std::vector<double>{-5.0, 1.0}));
  EXPECT_EQ(ts.back().features, (std::vector<double>{0.0, 11.0}));
}

TEST(GateRelativeFeatures, SharedBlockAlignsWithGate) {
  GateGrid g(GateGridSpec{});
  GateRelativeFeatureMap phi(g);
  const auto ts = g.task_space();
  std::vector<SparseEntry> a, b;
  // Same offset from the gate in two contexts shares the relative coordinate.
  phi.features(g.cell(4, 3), ts[3], GateGrid::Down, a);
  phi.features(g.cell(4, 7), ts[7], GateGrid::Down, b);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NE(a[0].index, b[0].index);
  EXPECT_EQ(a[1].index, b[1].index);
  phi.features(g.done_state(), ts[0], 0, a);
  EXPECT_TRUE(a.empty());
  for (State s = 0; s < g.num_states() - 1; ++s) {
    for (Action act = 0; act < 4; ++act) {
      phi.features(s, ts[5], act, a);
      for (const auto& e : a) ASSERT_LT(e.index, phi.dimension());
    }
  }
}

TEST(TargetLibrary, NamedTargets) {
  GateGrid g(GateGridSpec{});
  const auto lib = target_spec_library(g);
  const auto ts = g.task_space();
  const auto& pm = lib.at("point-mass");
  EXPECT_EQ(ts[static_cast<std::size_t>(pm.components[0][0])].features, (std::vector<double>{5.0, 1.0}));
  const auto modes = lib.at("two-mode").modes(ts);
  ASSERT_EQ(modes.size(), 2u);
  EXPECT_EQ(modes[0].features, (std::vector<double>{-5.0, 1.0}));
  EXPECT_EQ(modes[1].features, (std::vector<double>{5.0, 1.0}));
}
