#include "rcndl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace rcndl {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::scope_mismatch: return "scope mismatch";
    case ErrorKind::arity: return "arity error";
    case ErrorKind::syntax: return "syntax error";
    case ErrorKind::range: return "range error";
    case ErrorKind::undeclared_variable: return "undeclared variable";
    case ErrorKind::redefinition: return "redefinition";
    case ErrorKind::cycle: return "cycle";
    case ErrorKind::ordering: return "ordering error";
    case ErrorKind::multiply_connected: return "multiply connected";
    case ErrorKind::unknown_entries: return "unknown entries";
    case ErrorKind::infeasible: return "infeasible evidence";
    case ErrorKind::absolute_continuity: return "absolute continuity";
    case ErrorKind::constraint_form: return "constraint form";
    case ErrorKind::non_convergence: return "non-convergence";
    case ErrorKind::size_limit: return "size limit";
    case ErrorKind::unknown_variable: return "unknown variable";
    case ErrorKind::io: return "i/o error";
    case ErrorKind::internal: return "internal error";
  }
  return "error";
}

namespace {

std::string with_pos(const std::string& message, SourcePos pos) {
  if (!pos.valid()) return message;
  return std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
         message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, SourcePos pos)
    : std::runtime_error(with_pos(message, pos)), kind_(kind), pos_(pos) {}

VariableId::VariableId(std::string name) : name_(std::move(name)) {
  if (name_.empty()) {
    throw Error(ErrorKind::syntax, "empty variable name");
  }
}

Scope::Scope(std::vector<VariableId> vars) : vars_(std::move(vars)) {
  std::set<VariableId> seen;
  for (const auto& v : vars_) {
    if (!seen.insert(v).second) {
      throw Error(ErrorKind::scope_mismatch,
                  "duplicate variable '" + v.name() + "' in scope");
    }
  }
  // Keeps 2^n addressable.
  if (vars_.size() > 30) {
    throw Error(ErrorKind::size_limit, "scope of " +
                                           std::to_string(vars_.size()) +
                                           " variables is too large");
  }
}

Scope::Scope(std::initializer_list<const char*> names) {
  std::vector<VariableId> vars;
  for (const char* n : names) vars.emplace_back(n);
  *this = Scope(std::move(vars));
}

bool Scope::contains(const VariableId& v) const {
  return position(v).has_value();
}

std::optional<std::size_t> Scope::position(const VariableId& v) const {
  auto it = std::find(vars_.begin(), vars_.end(), v);
  if (it == vars_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - vars_.begin());
}

bool Scope::is_subset_of(const Scope& other) const {
  return std::all_of(vars_.begin(), vars_.end(),
                     [&](const VariableId& v) { return other.contains(v); });
}

Scope Scope::extended(const VariableId& v) const {
  auto vars = vars_;
  vars.push_back(v);
  return Scope(std::move(vars));
}

Scope Scope::united(const Scope& other) const {
  auto vars = vars_;
  for (const auto& v : other.vars_) {
    if (!contains(v)) vars.push_back(v);
  }
  return Scope(std::move(vars));
}

Scope Scope::intersected(const Scope& other) const {
  std::vector<VariableId> vars;
  for (const auto& v : vars_) {
    if (other.contains(v)) vars.push_back(v);
  }
  return Scope(std::move(vars));
}

std::string Scope::to_string() const {
  std::string out = "[";
  for (std::size_t k = 0; k < vars_.size(); ++k) {
    if (k) out += ",";
    out += vars_[k].name();
  }
  return out + "]";
}

std::size_t state_index(const Scope& scope, const Assignment& assignment) {
  if (assignment.size() != scope.size()) {
    throw Error(ErrorKind::scope_mismatch,
                "assignment has " + std::to_string(assignment.size()) +
                    " variables, scope " + scope.to_string() + " has " +
                    std::to_string(scope.size()));
  }
  std::size_t j = 0;
  for (const auto& v : scope.vars()) {
    auto it = assignment.find(v);
    if (it == assignment.end()) {
      throw Error(ErrorKind::scope_mismatch,
                  "assignment does not cover '" + v.name() + "'");
    }
    j = (j << 1) | (it->second ? 1U : 0U);
  }
  return j;
}

Assignment assignment_of(const Scope& scope, std::size_t state) {
  Assignment a;
  for (std::size_t k = 0; k < scope.size(); ++k) {
    a[scope[k]] = scope.bit(state, k);
  }
  return a;
}

std::vector<std::size_t> projection_map(const Scope& outer,
                                        const Scope& inner) {
  std::vector<std::size_t> positions;
  positions.reserve(inner.size());
  for (const auto& v : inner.vars()) {
    auto p = outer.position(v);
    if (!p) {
      throw Error(ErrorKind::scope_mismatch,
                  inner.to_string() + " is not a subset of " +
                      outer.to_string());
    }
    positions.push_back(*p);
  }
  std::vector<std::size_t> map(outer.state_count());
  for (std::size_t j = 0; j < map.size(); ++j) {
    std::size_t sub = 0;
    for (std::size_t p : positions) {
      sub = (sub << 1) | (outer.bit(j, p) ? 1U : 0U);
    }
    map[j] = sub;
  }
  return map;
}

JointTable::JointTable(Scope scope, std::vector<double> probs)
    : scope_(std::move(scope)), probs_(std::move(probs)) {
  if (probs_.size() != scope_.state_count()) {
    throw Error(ErrorKind::arity,
                "table over " + scope_.to_string() + " needs " +
                    std::to_string(scope_.state_count()) + " entries, got " +
                    std::to_string(probs_.size()));
  }
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::range, "table entry " + std::to_string(p) +
                                        " is not a probability");
    }
  }
  if (std::abs(total() - 1.0) > kUnitSumTolerance) {
    throw Error(ErrorKind::range, "table over " + scope_.to_string() +
                                      " sums to " + std::to_string(total()));
  }
}

JointTable JointTable::from_weights(Scope scope, std::vector<double> weights) {
  double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) {
    throw Error(ErrorKind::infeasible,
                "zero total mass over " + scope.to_string());
  }
  for (double& w : weights) w /= sum;
  return JointTable(std::move(scope), std::move(weights));
}

JointTable JointTable::uniform(Scope scope) {
  const auto n = scope.state_count();
  return JointTable(std::move(scope),
                    std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double JointTable::total() const {
  return std::accumulate(probs_.begin(), probs_.end(), 0.0);
}

JointTable marginalize(const JointTable& table, const Scope& sub) {
  const auto map = projection_map(table.scope(), sub);
  std::vector<double> out(sub.state_count(), 0.0);
  for (std::size_t j = 0; j < map.size(); ++j) out[map[j]] += table[j];
  return JointTable(sub, std::move(out));
}

JointTable multiply_condition(const JointTable& head_joint,
                              std::span<const double> cond,
                              const VariableId& body) {
  if (cond.size() != head_joint.size()) {
    throw Error(ErrorKind::arity,
                "conditional list for '" + body.name() + "' needs " +
                    std::to_string(head_joint.size()) + " entries, got " +
                    std::to_string(cond.size()));
  }
  Scope scope = head_joint.scope().extended(body);
  std::vector<double> out(scope.state_count());
  for (std::size_t i = 0; i < head_joint.size(); ++i) {
    out[2 * i] = head_joint[i] * (1.0 - cond[i]);
    out[2 * i + 1] = head_joint[i] * cond[i];
  }
  return JointTable(std::move(scope), std::move(out));
}

Scope ConstraintSet::variables() const {
  return std::visit(
      [](const auto& c) -> Scope {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, MarginalConstraint>) {
          return c.partition;
        } else if constexpr (std::is_same_v<T, ConditionalConstraint>) {
          std::vector<VariableId> vars;
          for (const auto& lit : c.condition) vars.push_back(lit.var);
          vars.push_back(c.target);
          return Scope(std::move(vars));
        } else {
          return c.scope;
        }
      },
      kind);
}

bool ConstraintSet::is_bayesian() const {
  auto crisp = [](double p) { return p == 0.0 || p == 1.0; };
  if (const auto* m = std::get_if<MarginalConstraint>(&kind)) {
    return std::all_of(m->targets.begin(), m->targets.end(), crisp);
  }
  if (const auto* c = std::get_if<ConditionalConstraint>(&kind)) {
    return crisp(c->probability);
  }
  return false;
}

void validate(const ConstraintSet& cs) {
  if (cs.threshold && !(*cs.threshold >= 0.0)) {
    throw Error(ErrorKind::range, "negative threshold");
  }
  auto check_prob = [](double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorKind::range,
                  "target " + std::to_string(p) + " outside [0, 1]");
    }
  };
  if (const auto* m = std::get_if<MarginalConstraint>(&cs.kind)) {
    if (m->partition.empty()) {
      throw Error(ErrorKind::constraint_form, "empty marginal partition");
    }
    if (m->targets.size() != m->partition.state_count()) {
      throw Error(ErrorKind::arity, "marginal over " +
                                        m->partition.to_string() + " needs " +
                                        std::to_string(
                                            m->partition.state_count()) +
                                        " targets");
    }
    for (double p : m->targets) check_prob(p);
    double sum = std::accumulate(m->targets.begin(), m->targets.end(), 0.0);
    if (std::abs(sum - 1.0) > kUnitSumTolerance) {
      throw Error(ErrorKind::range, "marginal targets sum to " +
                                        std::to_string(sum));
    }
  } else if (const auto* c = std::get_if<ConditionalConstraint>(&cs.kind)) {
    check_prob(c->probability);
    for (const auto& lit : c->condition) {
      if (lit.var == c->target) {
        throw Error(ErrorKind::constraint_form,
                    "'" + c->target.name() + "' appears in its own condition");
      }
    }
    (void)cs.variables();  // duplicate condition variables
  } else if (const auto* l = std::get_if<LinearConstraint>(&cs.kind)) {
    if (l->rows.size() != l->rhs.size() || l->rows.empty()) {
      throw Error(ErrorKind::arity, "linear constraint needs one rhs per row");
    }
    for (const auto& row : l->rows) {
      if (row.size() != l->scope.state_count()) {
        throw Error(ErrorKind::arity,
                    "linear row over " + l->scope.to_string() + " needs " +
                        std::to_string(l->scope.state_count()) + " entries");
      }
    }
  }
}

std::string describe(const ConstraintSet& cs) {
  if (!cs.label.empty()) return cs.label;
  std::ostringstream os;
  if (const auto* m = std::get_if<MarginalConstraint>(&cs.kind)) {
    os << "P(";
    for (std::size_t k = 0; k < m->partition.size(); ++k) {
      os << (k ? ", " : "") << m->partition[k].name();
    }
    os << ")";
  } else if (const auto* c = std::get_if<ConditionalConstraint>(&cs.kind)) {
    os << "P(" << c->target.name() << " |";
    for (std::size_t k = 0; k < c->condition.size(); ++k) {
      os << (k ? ", " : " ") << (c->condition[k].value ? "" : "!")
         << c->condition[k].var.name();
    }
    os << ")";
  } else {
    const auto& l = std::get<LinearConstraint>(cs.kind);
    os << "linear" << l.scope.to_string();
  }
  return os.str();
}

}  // namespace rcndl
