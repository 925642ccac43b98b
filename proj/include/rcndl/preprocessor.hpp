#pragma once

// Phase one of the interpreter: orders the clauses, checks the network
// structure and propagates the root priors outward so that every query clique
// and every rule carries the joint table over its head and body.
//
// The prepared clauses are held as the nodes of a tree whose edges carry the
// shared-variable separators. A rule whose head is already covered by one
// clause hangs off that clause. When the head spans several clauses, the
// smallest subtree connecting them is joined under a region node holding the
// exact joint over the union of their scopes, and the rule hangs off the
// region. Region nodes are bookkeeping only; they never appear in output.

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rcndl/model.hpp"
#include "rcndl/parser.hpp"

namespace rcndl {

enum class NodeKind { root_clique, rule, region };

struct ClauseNode {
  NodeKind kind = NodeKind::root_clique;
  JointTable table;
  Scope head;                      // rules only
  std::optional<VariableId> body;  // rules only
  std::size_t source_clause = 0;   // index in the source program
  std::size_t source_clique = 0;   // root cliques: index inside the query

  bool is_region() const { return kind == NodeKind::region; }
  std::string label() const;
};

struct Link {
  std::size_t upper = 0;  // the node that existed first
  std::size_t lower = 0;
  Scope separator;

  std::size_t other(std::size_t node) const {
    return node == upper ? lower : upper;
  }
};

struct Observation {
  Scope vars;
  SourcePos pos;
};

struct PrepareOptions {
  // Largest union scope a region node may span.
  std::size_t max_region_vars = 20;
};

class PreparedNetwork {
 public:
  const std::vector<ClauseNode>& nodes() const { return nodes_; }
  const ClauseNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<Link>& links() const { return links_; }
  // Link indices incident to a node.
  std::span<const std::size_t> incident(std::size_t node) const {
    return adjacency_.at(node);
  }

  // Query cliques followed by rules in topological order.
  const std::vector<std::size_t>& clause_order() const { return clause_order_; }
  const std::vector<std::size_t>& root_cliques() const { return root_cliques_; }
  const std::vector<Observation>& observations() const { return observations_; }
  // Root variables first, then rule bodies in topological order.
  const std::vector<VariableId>& variables() const { return variables_; }

  bool has_variable(const VariableId& v) const;
  bool is_observed(const VariableId& v) const;
  // The clause that introduces v; throws unknown_variable.
  std::size_t home_of(const VariableId& v) const;
  // Smallest node whose scope contains every variable of `scope`; clause nodes
  // win ties over regions, then the earliest node.
  std::optional<std::size_t> covering_node(const Scope& scope) const;

  // Replaces a node table; the scope must be unchanged.
  void set_table(std::size_t node, JointTable table);

 private:
  friend class NetworkBuilder;

  std::size_t add_node(ClauseNode n);
  void add_link(std::size_t upper, std::size_t lower, Scope separator);
  void rebuild_adjacency();

  std::vector<ClauseNode> nodes_;
  std::vector<Link> links_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> clause_order_;
  std::vector<std::size_t> root_cliques_;
  std::vector<Observation> observations_;
  std::vector<VariableId> variables_;
  std::vector<std::pair<VariableId, std::size_t>> homes_;
};

PreparedNetwork preprocess(const SourceProgram& program,
                           const PrepareOptions& options = {});

// Joint over `head` from the current node tables: a single covering node is
// marginalized directly; otherwise the joint is assembled over the smallest
// subtree connecting the clauses that introduce the head variables.
JointTable compute_head_joint(const PreparedNetwork& net, const Scope& head,
                              const PrepareOptions& options = {});

// Exact joint over the union scope of a connected set of nodes: product of
// node tables divided by the separator marginals of the links among them.
JointTable subtree_joint(const PreparedNetwork& net,
                         const std::vector<std::size_t>& members,
                         std::size_t max_vars = 25);

// Smallest connected node set containing every terminal.
std::vector<std::size_t> connecting_subtree(
    const PreparedNetwork& net, const std::set<std::size_t>& terminals);

// One line per clause, six-decimal probabilities:
//   ?- A : [0.300000, 0.700000].
//   A -> B : [0.240000, 0.060000, 0.420000, 0.280000].
//   B : [0.660000, 0.340000].
std::string render_intermediate(const PreparedNetwork& net);

}  // namespace rcndl
