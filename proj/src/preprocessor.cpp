#include "rcndl/preprocessor.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "rcndl/format.hpp"

namespace rcndl {

namespace {

std::string join_names(const Scope& s) {
  std::string out;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out += ", ";
    out += s[k].name();
  }
  return out;
}

// Residual mass spread uniformly over the unknown entries of a prior list.
std::vector<double> complete_prior(const std::vector<double>& prior,
                                   const Scope& scope, SourcePos pos) {
  double known = 0.0;
  std::size_t unknown = 0;
  for (double p : prior) {
    if (p == kUnknownProbability) {
      ++unknown;
    } else {
      known += p;
    }
  }
  if (unknown == 0) {
    if (std::abs(known - 1.0) > kUnitSumTolerance) {
      throw Error(ErrorKind::range,
                  "prior for " + scope.to_string() + " sums to " +
                      std::to_string(known),
                  pos);
    }
    return prior;
  }
  if (known > 1.0 + kUnitSumTolerance) {
    throw Error(ErrorKind::unknown_entries,
                "known entries of the prior for " + scope.to_string() +
                    " already exceed 1, unknowns cannot be completed",
                pos);
  }
  const double fill =
      std::max(0.0, 1.0 - known) / static_cast<double>(unknown);
  std::vector<double> out = prior;
  for (double& p : out) {
    if (p == kUnknownProbability) p = fill;
  }
  return out;
}

}  // namespace

std::string ClauseNode::label() const {
  switch (kind) {
    case NodeKind::root_clique: return "?- " + join_names(table.scope());
    case NodeKind::rule: return join_names(head) + " -> " + body->name();
    case NodeKind::region: return "region " + table.scope().to_string();
  }
  return {};
}

bool PreparedNetwork::has_variable(const VariableId& v) const {
  return std::any_of(homes_.begin(), homes_.end(),
                     [&](const auto& h) { return h.first == v; });
}

bool PreparedNetwork::is_observed(const VariableId& v) const {
  return std::any_of(observations_.begin(), observations_.end(),
                     [&](const Observation& o) { return o.vars.contains(v); });
}

std::size_t PreparedNetwork::home_of(const VariableId& v) const {
  for (const auto& [var, node] : homes_) {
    if (var == v) return node;
  }
  throw Error(ErrorKind::unknown_variable,
              "unknown variable '" + v.name() + "'");
}

std::optional<std::size_t> PreparedNetwork::covering_node(
    const Scope& scope) const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!scope.is_subset_of(n.table.scope())) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& b = nodes_[*best];
    const auto size = n.table.scope().size();
    const auto best_size = b.table.scope().size();
    if (size < best_size || (size == best_size && b.is_region() &&
                             !n.is_region())) {
      best = i;
    }
  }
  return best;
}

void PreparedNetwork::set_table(std::size_t node, JointTable table) {
  auto& n = nodes_.at(node);
  if (!(table.scope() == n.table.scope())) {
    throw Error(ErrorKind::scope_mismatch,
                "table over " + table.scope().to_string() +
                    " cannot replace " + n.table.scope().to_string());
  }
  n.table = std::move(table);
}

std::size_t PreparedNetwork::add_node(ClauseNode n) {
  nodes_.push_back(std::move(n));
  adjacency_.emplace_back();
  return nodes_.size() - 1;
}

void PreparedNetwork::add_link(std::size_t upper, std::size_t lower,
                               Scope separator) {
  links_.push_back({upper, lower, std::move(separator)});
  adjacency_[upper].push_back(links_.size() - 1);
  adjacency_[lower].push_back(links_.size() - 1);
}

void PreparedNetwork::rebuild_adjacency() {
  adjacency_.assign(nodes_.size(), {});
  for (std::size_t l = 0; l < links_.size(); ++l) {
    adjacency_[links_[l].upper].push_back(l);
    adjacency_[links_[l].lower].push_back(l);
  }
}

std::vector<std::size_t> connecting_subtree(
    const PreparedNetwork& net, const std::set<std::size_t>& terminals) {
  const auto n = net.nodes().size();
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> degree(n, 0);
  for (const auto& l : net.links()) {
    ++degree[l.upper];
    ++degree[l.lower];
  }
  std::deque<std::size_t> leaves;
  for (std::size_t i = 0; i < n; ++i) {
    if (degree[i] <= 1 && !terminals.contains(i)) leaves.push_back(i);
  }
  while (!leaves.empty()) {
    auto i = leaves.front();
    leaves.pop_front();
    if (!alive[i]) continue;
    alive[i] = false;
    for (auto l : net.incident(i)) {
      auto j = net.links()[l].other(i);
      if (!alive[j]) continue;
      if (--degree[j] <= 1 && !terminals.contains(j)) leaves.push_back(j);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) out.push_back(i);
  }
  return out;
}

JointTable subtree_joint(const PreparedNetwork& net,
                         const std::vector<std::size_t>& members,
                         std::size_t max_vars) {
  if (members.empty()) {
    throw Error(ErrorKind::internal, "empty subtree");
  }
  if (members.size() == 1) return net.node(members[0]).table;

  Scope united;
  for (auto m : members) united = united.united(net.node(m).table.scope());
  if (united.size() > max_vars) {
    throw Error(ErrorKind::size_limit,
                "joint over " + united.to_string() + " exceeds " +
                    std::to_string(max_vars) + " variables");
  }

  std::vector<double> weights(united.state_count(), 1.0);
  for (auto m : members) {
    const auto& t = net.node(m).table;
    const auto map = projection_map(united, t.scope());
    for (std::size_t j = 0; j < weights.size(); ++j) weights[j] *= t[map[j]];
  }
  std::set<std::size_t> inside(members.begin(), members.end());
  std::size_t internal = 0;
  for (const auto& link : net.links()) {
    if (!inside.contains(link.upper) || !inside.contains(link.lower)) continue;
    ++internal;
    if (link.separator.empty()) continue;
    const auto sep = marginalize(net.node(link.lower).table, link.separator);
    const auto map = projection_map(united, link.separator);
    for (std::size_t j = 0; j < weights.size(); ++j) {
      const double s = sep[map[j]];
      weights[j] = s > 0.0 ? weights[j] / s : 0.0;
    }
  }
  if (internal + 1 != members.size()) {
    throw Error(ErrorKind::multiply_connected,
                "clauses spanning " + united.to_string() +
                    " do not form a connected subtree");
  }
  return JointTable::from_weights(std::move(united), std::move(weights));
}

JointTable compute_head_joint(const PreparedNetwork& net, const Scope& head,
                              const PrepareOptions& options) {
  for (const auto& v : head.vars()) {
    if (!net.has_variable(v)) {
      throw Error(ErrorKind::ordering,
                  "'" + v.name() + "' is not introduced by a prepared clause");
    }
  }
  if (auto cover = net.covering_node(head)) {
    return marginalize(net.node(*cover).table, head);
  }
  std::set<std::size_t> terminals;
  for (const auto& v : head.vars()) terminals.insert(net.home_of(v));
  const auto members = connecting_subtree(net, terminals);
  return marginalize(subtree_joint(net, members, options.max_region_vars),
                     head);
}

class NetworkBuilder {
 public:
  NetworkBuilder(const SourceProgram& program, const PrepareOptions& options)
      : program_(program), options_(options) {}

  PreparedNetwork run() {
    add_query();
    add_rules();
    add_observations();
    return std::move(net_);
  }

 private:
  void introduce(const VariableId& v, std::size_t node) {
    net_.homes_.emplace_back(v, node);
    net_.variables_.push_back(v);
  }

  void add_query() {
    const SourceClause* query = nullptr;
    std::size_t query_index = 0;
    for (std::size_t i = 0; i < program_.clauses.size(); ++i) {
      if (std::holds_alternative<QueryClause>(program_.clauses[i].kind)) {
        query = &program_.clauses[i];
        query_index = i;
        break;
      }
    }
    if (query == nullptr) {
      throw Error(ErrorKind::ordering, "program has no query clause");
    }
    const auto& cliques = std::get<QueryClause>(query->kind).cliques;
    for (std::size_t c = 0; c < cliques.size(); ++c) {
      const auto& clique = cliques[c];
      ClauseNode node;
      node.kind = NodeKind::root_clique;
      node.table = JointTable(clique.scope,
                              complete_prior(clique.prior, clique.scope,
                                             query->pos));
      node.source_clause = query_index;
      node.source_clique = c;

      // Running intersection: the overlap with every earlier clique must sit
      // inside a single earlier clique.
      Scope earlier_vars;
      for (auto r : net_.root_cliques_) {
        earlier_vars = earlier_vars.united(net_.node(r).table.scope());
      }
      const Scope overlap = clique.scope.intersected(earlier_vars);
      std::optional<std::size_t> parent;
      if (!net_.root_cliques_.empty()) {
        parent = net_.root_cliques_.front();
        if (!overlap.empty()) {
          parent.reset();
          for (auto r : net_.root_cliques_) {
            if (overlap.is_subset_of(net_.node(r).table.scope())) {
              parent = r;
              break;
            }
          }
          if (!parent) {
            throw Error(ErrorKind::multiply_connected,
                        "query clique " + clique.scope.to_string() +
                            " overlaps earlier cliques in " +
                            overlap.to_string() +
                            ", which no single clique contains (cyclic "
                            "cliques)",
                        query->pos);
          }
          const auto mine = marginalize(node.table, overlap);
          const auto theirs = marginalize(net_.node(*parent).table, overlap);
          for (std::size_t j = 0; j < mine.size(); ++j) {
            if (std::abs(mine[j] - theirs[j]) > kUnitSumTolerance) {
              throw Error(ErrorKind::range,
                          "query cliques disagree on the marginal of " +
                              overlap.to_string(),
                          query->pos);
            }
          }
        }
      }
      const auto id = net_.add_node(std::move(node));
      net_.root_cliques_.push_back(id);
      net_.clause_order_.push_back(id);
      if (parent) net_.add_link(*parent, id, overlap);
      for (const auto& v : clique.scope.vars()) {
        if (!net_.has_variable(v)) introduce(v, id);
      }
    }
  }

  bool defined_somewhere(const VariableId& v) const {
    if (net_.has_variable(v)) return true;
    for (const auto& c : program_.clauses) {
      if (const auto* r = std::get_if<RuleClause>(&c.kind)) {
        if (r->body == v) return true;
      }
    }
    return false;
  }

  void add_rules() {
    std::vector<std::size_t> pending;
    std::map<VariableId, std::size_t> bodies;
    for (std::size_t i = 0; i < program_.clauses.size(); ++i) {
      const auto* r = std::get_if<RuleClause>(&program_.clauses[i].kind);
      if (r == nullptr) continue;
      if (net_.has_variable(r->body) || bodies.contains(r->body)) {
        throw Error(ErrorKind::redefinition,
                    "'" + r->body.name() + "' is already defined" +
                        (bodies.contains(r->body)
                             ? " by the rule at line " +
                                   std::to_string(
                                       program_.clauses[bodies[r->body]]
                                           .pos.line)
                             : std::string(" in the query")),
                    program_.clauses[i].pos);
      }
      bodies[r->body] = i;
      pending.push_back(i);
    }
    for (auto i : pending) {
      const auto& r = std::get<RuleClause>(program_.clauses[i].kind);
      for (const auto& v : r.head.vars()) {
        if (!defined_somewhere(v)) {
          throw Error(ErrorKind::undeclared_variable,
                      "head variable '" + v.name() + "' is never defined",
                      program_.clauses[i].pos);
        }
      }
    }
    while (!pending.empty()) {
      auto ready = std::find_if(pending.begin(), pending.end(), [&](auto i) {
        const auto& r = std::get<RuleClause>(program_.clauses[i].kind);
        return std::all_of(r.head.vars().begin(), r.head.vars().end(),
                           [&](const auto& v) { return net_.has_variable(v); });
      });
      if (ready == pending.end()) {
        std::string names;
        for (auto i : pending) {
          const auto& r = std::get<RuleClause>(program_.clauses[i].kind);
          names += (names.empty() ? "" : ", ") + r.body.name();
        }
        throw Error(ErrorKind::cycle, "rules for " + names +
                                          " depend on each other",
                    program_.clauses[pending.front()].pos);
      }
      add_rule(*ready);
      pending.erase(ready);
    }
  }

  void add_rule(std::size_t clause_index) {
    const auto& clause = program_.clauses[clause_index];
    const auto& rule = std::get<RuleClause>(clause.kind);

    std::size_t anchor;
    JointTable head_joint;
    if (auto cover = net_.covering_node(rule.head)) {
      anchor = *cover;
      head_joint = marginalize(net_.node(anchor).table, rule.head);
    } else {
      anchor = add_region(rule.head, clause.pos);
      head_joint = marginalize(net_.node(anchor).table, rule.head);
    }

    std::vector<double> cond = rule.cond;
    for (double& p : cond) {
      if (p == kUnknownProbability) p = 0.5;
    }
    ClauseNode node;
    node.kind = NodeKind::rule;
    node.table = multiply_condition(head_joint, cond, rule.body);
    node.head = rule.head;
    node.body = rule.body;
    node.source_clause = clause_index;
    const auto id = net_.add_node(std::move(node));
    net_.add_link(anchor, id, rule.head);
    net_.clause_order_.push_back(id);
    introduce(rule.body, id);
  }

  // Joins the subtree connecting the head variables' clauses under a new
  // region node carrying their exact union joint.
  std::size_t add_region(const Scope& head, SourcePos pos) {
    std::set<std::size_t> terminals;
    for (const auto& v : head.vars()) terminals.insert(net_.home_of(v));
    const auto members = connecting_subtree(net_, terminals);
    JointTable joint;
    try {
      joint = subtree_joint(net_, members, options_.max_region_vars);
    } catch (const Error& e) {
      throw Error(e.kind(), e.what(), pos);
    }

    std::set<std::size_t> inside(members.begin(), members.end());
    std::erase_if(net_.links_, [&](const Link& l) {
      return inside.contains(l.upper) && inside.contains(l.lower);
    });
    ClauseNode region;
    region.kind = NodeKind::region;
    region.table = std::move(joint);
    region.source_clause = net_.node(members.front()).source_clause;
    const auto id = net_.add_node(std::move(region));
    net_.rebuild_adjacency();
    for (auto m : members) net_.add_link(id, m, net_.node(m).table.scope());
    return id;
  }

  void add_observations() {
    for (const auto& clause : program_.clauses) {
      const auto* o = std::get_if<ObservationClause>(&clause.kind);
      if (o == nullptr) continue;
      for (const auto& v : o->vars.vars()) {
        if (!net_.has_variable(v)) {
          throw Error(ErrorKind::undeclared_variable,
                      "observed variable '" + v.name() +
                          "' does not occur in any clause",
                      clause.pos);
        }
      }
      net_.observations_.push_back({o->vars, clause.pos});
    }
  }

  const SourceProgram& program_;
  PrepareOptions options_;
  PreparedNetwork net_;
};

PreparedNetwork preprocess(const SourceProgram& program,
                           const PrepareOptions& options) {
  return NetworkBuilder(program, options).run();
}

std::string render_intermediate(const PreparedNetwork& net) {
  std::string out;
  if (!net.root_cliques().empty()) {
    out += "?- ";
    for (std::size_t k = 0; k < net.root_cliques().size(); ++k) {
      const auto& t = net.node(net.root_cliques()[k]).table;
      if (k) out += "; ";
      out += join_names(t.scope()) + " : " + fixed6_list(t.probs());
    }
    out += ".\n";
  }
  for (auto id : net.clause_order()) {
    const auto& n = net.node(id);
    if (n.kind != NodeKind::rule) continue;
    out += n.label() + " : " + fixed6_list(n.table.probs()) + ".\n";
  }
  for (const auto& o : net.observations()) {
    const auto joint = compute_head_joint(net, o.vars);
    out += join_names(o.vars) + " : " + fixed6_list(joint.probs()) + ".\n";
  }
  return out;
}

}  // namespace rcndl
