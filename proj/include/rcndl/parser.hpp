#pragma once

// RCNDL source text <-> clause list.
//
//   ?- A : [0.3, 0.7].              query: root cliques with joint priors
//   A -> B : [0.2, 0.4].            rule: P(B = true | head state)
//   B.                              observation: variables that receive evidence
//
// Query cliques are separated by ';'. '%' starts a comment that runs to the
// end of the line. A prior entry of -1.0 marks an unknown probability.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rcndl/model.hpp"

namespace rcndl {

inline constexpr double kUnknownProbability = -1.0;

struct QueryClique {
  Scope scope;
  std::vector<double> prior;

  friend bool operator==(const QueryClique&, const QueryClique&) = default;
};

struct QueryClause {
  std::vector<QueryClique> cliques;

  friend bool operator==(const QueryClause&, const QueryClause&) = default;
};

struct RuleClause {
  Scope head;
  VariableId body;
  std::vector<double> cond;

  friend bool operator==(const RuleClause&, const RuleClause&) = default;
};

struct ObservationClause {
  Scope vars;

  friend bool operator==(const ObservationClause&,
                         const ObservationClause&) = default;
};

struct SourceClause {
  std::variant<QueryClause, RuleClause, ObservationClause> kind;
  SourcePos pos;

  // Structural: positions are ignored.
  friend bool operator==(const SourceClause& a, const SourceClause& b) {
    return a.kind == b.kind;
  }
};

struct SourceProgram {
  std::vector<SourceClause> clauses;

  const QueryClause* query() const;

  friend bool operator==(const SourceProgram&, const SourceProgram&) = default;
};

// Throws Error (syntax, range, arity, redefinition) carrying a position.
SourceProgram parse_program(std::string_view text);

// Canonical source text, full precision; parse_program(render_program(p)) == p.
std::string render_program(const SourceProgram& program);

}  // namespace rcndl
