#pragma once

// Core value types: binary variables, ordered scopes, joint tables and the
// evidence constraint sets that update them.
//
// State index convention, used by every table, file format and report:
// state j of a scope [v0, ..., v(n-1)] assigns v_k the bit (j >> (n-1-k)) & 1,
// so the first variable is the most significant bit and false (0) comes first.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rcndl/error.hpp"

namespace rcndl {

inline constexpr double kUnitSumTolerance = 1e-9;

class VariableId {
 public:
  VariableId() = default;
  explicit VariableId(std::string name);

  const std::string& name() const { return name_; }

  friend auto operator<=>(const VariableId&, const VariableId&) = default;

 private:
  std::string name_;
};

using Assignment = std::map<VariableId, bool>;

class Scope {
 public:
  Scope() = default;
  explicit Scope(std::vector<VariableId> vars);
  Scope(std::initializer_list<const char*> names);

  std::size_t size() const { return vars_.size(); }
  bool empty() const { return vars_.empty(); }
  std::size_t state_count() const { return std::size_t{1} << vars_.size(); }
  const std::vector<VariableId>& vars() const { return vars_; }
  const VariableId& operator[](std::size_t k) const { return vars_[k]; }

  bool contains(const VariableId& v) const;
  std::optional<std::size_t> position(const VariableId& v) const;
  bool is_subset_of(const Scope& other) const;

  // Value of variable k in state j.
  bool bit(std::size_t state, std::size_t k) const {
    return ((state >> (vars_.size() - 1 - k)) & 1U) != 0;
  }

  // Concatenation; throws scope_mismatch on a duplicate.
  Scope extended(const VariableId& v) const;
  // Variables of *this and other, in first-seen order.
  Scope united(const Scope& other) const;
  Scope intersected(const Scope& other) const;

  std::string to_string() const;

  friend bool operator==(const Scope&, const Scope&) = default;

 private:
  std::vector<VariableId> vars_;
};

std::size_t state_index(const Scope& scope, const Assignment& assignment);
Assignment assignment_of(const Scope& scope, std::size_t state);

// For each state of `outer`, the index of its projection onto `inner`.
// Precondition: inner is a subset of outer.
std::vector<std::size_t> projection_map(const Scope& outer, const Scope& inner);

class JointTable {
 public:
  JointTable() = default;
  // Validates arity, non-negativity and unit sum.
  JointTable(Scope scope, std::vector<double> probs);

  // Normalizes non-negative weights; throws infeasible on zero total mass.
  static JointTable from_weights(Scope scope, std::vector<double> weights);
  static JointTable uniform(Scope scope);

  const Scope& scope() const { return scope_; }
  std::span<const double> probs() const { return probs_; }
  double operator[](std::size_t state) const { return probs_[state]; }
  std::size_t size() const { return probs_.size(); }
  double total() const;

 private:
  Scope scope_;
  std::vector<double> probs_;
};

JointTable marginalize(const JointTable& table, const Scope& sub);

// Joint over head ++ [body] from a head joint and P(body = true | head state).
JointTable multiply_condition(const JointTable& head_joint,
                              std::span<const double> cond,
                              const VariableId& body);

// ---------------------------------------------------------------------------
// Evidence

struct MarginalConstraint {
  Scope partition;
  std::vector<double> targets;  // one per state of partition
};

struct Literal {
  VariableId var;
  bool value = true;

  friend bool operator==(const Literal&, const Literal&) = default;
};

// P(target = true | condition) = probability
struct ConditionalConstraint {
  VariableId target;
  std::vector<Literal> condition;
  double probability = 0.0;
};

// sum_j rows[k][j] * P(state j of scope) = rhs[k]
struct LinearConstraint {
  Scope scope;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
};

using ConstraintKind =
    std::variant<MarginalConstraint, ConditionalConstraint, LinearConstraint>;

struct ConstraintSet {
  ConstraintKind kind;
  std::optional<double> threshold;  // falls back to the run default
  std::string label;

  // Variables the constraint mentions, in a stable order.
  Scope variables() const;
  // All targets in {0, 1}; only meaningful for marginal and conditional sets.
  bool is_bayesian() const;
};

// Checks target ranges, unit sum and arities; throws range or arity.
void validate(const ConstraintSet& c);

std::string describe(const ConstraintSet& c);

}  // namespace rcndl

template <>
struct std::hash<rcndl::VariableId> {
  std::size_t operator()(const rcndl::VariableId& v) const noexcept {
    return std::hash<std::string>{}(v.name());
  }
};
