#include "rcndl/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace rcndl {

namespace {

Scope network_scope(const PreparedNetwork& net, std::size_t max_vars) {
  if (net.variables().size() > max_vars) {
    throw Error(ErrorKind::size_limit,
                std::to_string(net.variables().size()) +
                    " variables exceed the full-joint limit of " +
                    std::to_string(max_vars));
  }
  return Scope(net.variables());
}

struct Factor {
  std::vector<std::size_t> map;  // full state -> factor state
  std::vector<double> values;
  bool divide = false;
};

Factor factor_of(const Scope& full, const JointTable& t, bool divide) {
  return {projection_map(full, t.scope()),
          {t.probs().begin(), t.probs().end()}, divide};
}

FullJoint evaluate(const Scope& full, const std::vector<Factor>& factors) {
  std::vector<double> w(full.state_count(), 1.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    for (const auto& f : factors) {
      const double v = f.values[f.map[j]];
      if (f.divide) {
        w[j] = v > 0.0 ? w[j] / v : 0.0;
      } else {
        w[j] *= v;
      }
      if (w[j] == 0.0) break;
    }
  }
  return JointTable::from_weights(full, std::move(w));
}

double max_violation(const FullJoint& joint,
                     const std::vector<ConstraintSet>& constraints) {
  double worst = 0.0;
  for (const auto& c : constraints) {
    for (double g : constraint_gradient(joint, c)) {
      worst = std::max(worst, std::abs(g));
    }
  }
  return worst;
}

}  // namespace

FullJoint expand_full_joint(const PreparedNetwork& net, std::size_t max_vars) {
  const Scope full = network_scope(net, max_vars);
  std::vector<Factor> factors;
  for (const auto& node : net.nodes()) {
    factors.push_back(factor_of(full, node.table, false));
  }
  for (const auto& link : net.links()) {
    if (link.separator.empty()) continue;
    factors.push_back(factor_of(
        full, marginalize(net.node(link.upper).table, link.separator), true));
  }
  return evaluate(full, factors);
}

FullJoint product_form_joint(const PreparedNetwork& net, std::size_t max_vars) {
  const Scope full = network_scope(net, max_vars);
  std::vector<Factor> factors;
  const auto& roots = net.root_cliques();
  for (std::size_t r = 0; r < roots.size(); ++r) {
    const auto& table = net.node(roots[r]).table;
    factors.push_back(factor_of(full, table, false));
    // Overlap with the earlier cliques is counted once.
    Scope earlier;
    for (std::size_t q = 0; q < r; ++q) {
      earlier = earlier.united(net.node(roots[q]).table.scope());
    }
    const Scope overlap = table.scope().intersected(earlier);
    if (!overlap.empty()) {
      factors.push_back(factor_of(full, marginalize(table, overlap), true));
    }
  }
  for (std::size_t i : net.clause_order()) {
    const auto& node = net.node(i);
    if (node.kind != NodeKind::rule) continue;
    factors.push_back(factor_of(full, node.table, false));
    factors.push_back(factor_of(full, marginalize(node.table, node.head), true));
  }
  return evaluate(full, factors);
}

OracleResult oracle_mce_run(const FullJoint& joint,
                            const std::vector<ConstraintSet>& constraints,
                            double tol, std::size_t max_cycles,
                            const LecOptions& lec) {
  for (const auto& c : constraints) validate(c);
  OracleResult r{joint, 0, max_violation(joint, constraints)};
  while (r.max_violation > tol) {
    if (r.cycles >= max_cycles) {
      throw Error(ErrorKind::non_convergence,
                  "oracle did not meet its tolerance in " +
                      std::to_string(max_cycles) + " cycles; violation " +
                      std::to_string(r.max_violation));
    }
    for (const auto& c : constraints) {
      r.joint = apply_constraint(r.joint, c, lec);
    }
    ++r.cycles;
    const double v = max_violation(r.joint, constraints);
    // A cycle that no longer moves anything has reached floating-point noise.
    if (v >= r.max_violation && v < 1e-10) {
      r.max_violation = v;
      break;
    }
    r.max_violation = v;
  }
  return r;
}

FullJoint oracle_mce(const FullJoint& joint,
                     const std::vector<ConstraintSet>& constraints, double tol) {
  return oracle_mce_run(joint, constraints, tol).joint;
}

double joint_marginal(const FullJoint& joint, const VariableId& v) {
  const auto m = marginalize(joint, Scope(std::vector<VariableId>{v}));
  return m[1] / (m[0] + m[1]);
}

std::pair<double, double> ce_decomposition_check(
    const PreparedNetwork& prior, const PreparedNetwork& posterior) {
  if (prior.nodes().size() != posterior.nodes().size()) {
    throw Error(ErrorKind::scope_mismatch, "networks differ in structure");
  }
  const double full =
      cross_entropy(expand_full_joint(posterior), expand_full_joint(prior));

  double clauses = 0.0;
  const auto& roots = prior.root_cliques();
  for (std::size_t r = 0; r < roots.size(); ++r) {
    const auto& p = posterior.node(roots[r]).table;
    const auto& q = prior.node(roots[r]).table;
    clauses += cross_entropy(p, q);
    Scope earlier;
    for (std::size_t s = 0; s < r; ++s) {
      earlier = earlier.united(prior.node(roots[s]).table.scope());
    }
    const Scope overlap = p.scope().intersected(earlier);
    if (!overlap.empty()) {
      clauses -= cross_entropy(marginalize(p, overlap), marginalize(q, overlap));
    }
  }
  for (std::size_t i : prior.clause_order()) {
    const auto& node = prior.node(i);
    if (node.kind != NodeKind::rule) continue;
    const auto& p = posterior.node(i).table;
    clauses += cross_entropy(p, node.table);
    clauses -= cross_entropy(marginalize(p, node.head),
                             marginalize(node.table, node.head));
  }
  return {full, clauses};
}

}  // namespace rcndl
