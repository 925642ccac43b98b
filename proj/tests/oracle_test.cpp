#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "rcndl/oracle.hpp"

using namespace rcndl;
using fixtures::prepare;

namespace {

std::vector<ConstraintSet> marginals(std::initializer_list<std::pair<const char*, double>> items) {
  std::vector<ConstraintSet> out;
  for (auto [v, p] : items) {
    out.push_back({MarginalConstraint{Scope{v}, {1 - p, p}}, {}, {}});
  }
  return out;
}

}  // namespace

TEST(Oracle, ForkJointMarginals) {
  const auto net = prepare(fixtures::kFork);
  const auto joint = expand_full_joint(net);
  EXPECT_EQ(joint.size(), 8U);
  const auto ab = marginalize(joint, Scope{"A", "B"});
  const double expected[] = {0.24, 0.06, 0.42, 0.28};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(ab[j], expected[j], 1e-12);
}

TEST(Oracle, CancerJoint) {
  const auto net = prepare(fixtures::kCancer);
  const auto joint = expand_full_joint(net);
  EXPECT_EQ(joint.size(), 32U);
  EXPECT_NEAR(joint_marginal(joint, VariableId("A")), 0.2, 1e-12);
  EXPECT_NEAR(joint_marginal(joint, VariableId("B")), 0.32, 1e-12);
  EXPECT_NEAR(joint_marginal(joint, VariableId("C")), 0.08, 1e-12);
  EXPECT_NEAR(joint_marginal(joint, VariableId("D")), 0.32, 1e-12);
  EXPECT_NEAR(joint_marginal(joint, VariableId("E")), 0.616, 1e-12);
}

TEST(Oracle, RoundTripEveryClause) {
  for (const char* text : {fixtures::kFork, fixtures::kCancer}) {
    const auto net = prepare(text);
    const auto joint = expand_full_joint(net);
    const auto product = product_form_joint(net);
    for (std::size_t j = 0; j < joint.size(); ++j) {
      EXPECT_NEAR(joint[j], product[j], 1e-12);
    }
    for (const auto& node : net.nodes()) {
      const auto m = marginalize(joint, node.table.scope());
      for (std::size_t j = 0; j < m.size(); ++j) {
        EXPECT_NEAR(m[j], node.table[j], 1e-12) << node.label();
      }
    }
  }
}

TEST(Oracle, SingleClause) {
  const auto net = prepare("?- A, B : [0.1, 0.2, 0.3, 0.4].");
  const auto joint = expand_full_joint(net);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(joint[j], 0.1 * (j + 1), 1e-15);
}

TEST(Oracle, SizeGuard) {
  const auto net = prepare(fixtures::kCancer);
  try {
    expand_full_joint(net, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::size_limit);
  }
}

// Exact minimum cross entropy values, frozen from a separate numpy
// iterative-scaling run on the same joints.
TEST(Oracle, FrozenMceValues) {
  const auto joint = expand_full_joint(prepare(fixtures::kFork));
  const VariableId a("A");
  struct Row { double b, c, pa; };
  const Row rows[] = {{0.33, 0.95, 0.2743318}, {1.0, 0.15, 0.8666268},
                      {0.15, 0.67, 0.4330433}, {0.27, 0.05, 0.8710930},
                      {0.65, 0.85, 0.3945126}, {0.95, 0.85, 0.4474206}};
  for (const auto& r : rows) {
    const auto post = oracle_mce(joint, marginals({{"B", r.b}, {"C", r.c}}));
    EXPECT_NEAR(joint_marginal(post, a), r.pa, 5e-8) << r.b << " " << r.c;
  }
  const auto cancer = expand_full_joint(prepare(fixtures::kCancer));
  const auto post = oracle_mce(cancer, marginals({{"D", 0.75}, {"E", 0.10}}));
  EXPECT_NEAR(joint_marginal(post, a), 0.3360101, 5e-8);
  const auto bayes = oracle_mce(cancer, marginals({{"D", 0.0}, {"E", 1.0}}));
  EXPECT_NEAR(joint_marginal(bayes, a), 0.0972763, 5e-8);
}

TEST(Oracle, SatisfiedConstraintsLeaveJointUnchanged) {
  const auto joint = expand_full_joint(prepare(fixtures::kFork));
  const auto post = oracle_mce(joint, marginals({{"B", 0.34}, {"C", 0.31}}));
  for (std::size_t j = 0; j < joint.size(); ++j) EXPECT_NEAR(post[j], joint[j], 1e-12);
}

TEST(Oracle, MinimalAmongPerturbedFeasible) {
  const auto joint = expand_full_joint(prepare(fixtures::kFork));
  const auto cs = marginals({{"B", 0.33}, {"C", 0.95}});
  const auto post = oracle_mce(joint, cs);
  for (const auto& c : cs) {
    for (double g : constraint_gradient(post, c)) EXPECT_LE(std::abs(g), 1e-12);
  }
  const double best = cross_entropy(post, joint);
  // Directions that keep P(B) and P(C) fixed: +e on two states and -e on two
  // others with the same B and C values.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 1000) {
    std::vector<double> q(post.probs().begin(), post.probs().end());
    // state = A B C; pair states differing only in A.
    for (int bc = 0; bc < 4; ++bc) {
      const double e = 0.05 * u(rng);
      q[bc] += e;
      q[4 + bc] -= e;
    }
    if (std::any_of(q.begin(), q.end(), [](double x) { return x < 0.0; })) continue;
    const JointTable other(joint.scope(), q);
    EXPECT_GE(cross_entropy(other, joint), best - 1e-12);
    ++checked;
  }
}

TEST(Oracle, ConditionalAndLinearConstraints) {
  const auto joint = expand_full_joint(prepare(fixtures::kFork));
  std::vector<ConstraintSet> cs;
  cs.push_back({ConditionalConstraint{VariableId("B"), {{VariableId("A"), true}}, 0.9}, {}, {}});
  cs.push_back({LinearConstraint{Scope{"C"}, {{0.0, 1.0}}, {0.5}}, {}, {}});
  const auto post = oracle_mce(joint, cs);
  const auto ab = marginalize(post, Scope{"A", "B"});
  EXPECT_NEAR(ab[3] / (ab[2] + ab[3]), 0.9, 1e-10);
  EXPECT_NEAR(joint_marginal(post, VariableId("C")), 0.5, 1e-10);
}

TEST(Oracle, DecompositionIdentityOnPriorAndFork) {
  const auto prior = prepare(fixtures::kFork);
  auto [zero_full, zero_sum] = ce_decomposition_check(prior, prior);
  EXPECT_NEAR(zero_full, 0.0, 1e-15);
  EXPECT_NEAR(zero_sum, 0.0, 1e-15);
  auto [post, trace] = run_reasoning(prior, fixtures::evidence("P(B) = 0.33; P(C) = 0.95"));
  auto [full, sum] = ce_decomposition_check(prior, post);
  EXPECT_GT(full, 0.0);
  EXPECT_NEAR(full, sum, 1e-9);
}
