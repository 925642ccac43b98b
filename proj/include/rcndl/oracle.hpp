#pragma once

// Brute-force reference computations over the full joint of a small network.

#include <cstddef>
#include <utility>
#include <vector>

#include "rcndl/engine.hpp"
#include "rcndl/preprocessor.hpp"

namespace rcndl {

using FullJoint = JointTable;

inline constexpr std::size_t kOracleMaxVariables = 25;

// The distribution the network represents: product of every node table
// divided by the separator marginals of its links, over the network
// variables in declaration order.
FullJoint expand_full_joint(const PreparedNetwork& net,
                            std::size_t max_vars = kOracleMaxVariables);

// Root clique tables times P(body | head) of every rule.
FullJoint product_form_joint(const PreparedNetwork& net,
                             std::size_t max_vars = kOracleMaxVariables);

struct OracleResult {
  FullJoint joint;
  std::size_t cycles = 0;
  double max_violation = 0.0;
};

// Cycles the constraints in the given order over the full joint (Jeffrey's
// rule, the exact conditional tilt, or a dual solve) until every gradient
// component is within tol.
OracleResult oracle_mce_run(const FullJoint& joint,
                            const std::vector<ConstraintSet>& constraints,
                            double tol = 1e-12, std::size_t max_cycles = 100000,
                            const LecOptions& lec = {});
FullJoint oracle_mce(const FullJoint& joint,
                     const std::vector<ConstraintSet>& constraints,
                     double tol = 1e-12);

// P(v = true) in a full joint.
double joint_marginal(const FullJoint& joint, const VariableId& v);

// (CE of the full joints, clause-wise sum): root clique terms minus the root
// separator terms, plus for every rule the CE of its table minus that of its
// head marginal.
std::pair<double, double> ce_decomposition_check(const PreparedNetwork& prior,
                                                 const PreparedNetwork& posterior);

}  // namespace rcndl
