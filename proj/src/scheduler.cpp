#include "rcndl/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace rcndl {

std::vector<std::size_t> propagate_clause_update(PreparedNetwork& net,
                                                 std::size_t updated) {
  std::vector<std::size_t> touched;
  std::vector<bool> seen(net.nodes().size(), false);
  std::deque<std::size_t> queue{updated};
  seen.at(updated) = true;
  while (!queue.empty()) {
    const std::size_t from = queue.front();
    queue.pop_front();
    for (std::size_t li : net.incident(from)) {
      const Link& link = net.links()[li];
      const std::size_t to = link.other(from);
      if (seen[to] || link.separator.empty()) continue;
      seen[to] = true;
      const auto target = marginalize(net.node(from).table, link.separator);
      MarginalConstraint push{link.separator,
                              {target.probs().begin(), target.probs().end()}};
      try {
        net.set_table(to, jeffrey_update(net.node(to).table, push));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::infeasible) throw;
        throw Error(ErrorKind::infeasible,
                    "cannot propagate from '" + net.node(from).label() +
                        "' to '" + net.node(to).label() + "': " + e.what());
      }
      touched.push_back(to);
      queue.push_back(to);
    }
  }
  return touched;
}

PreparedNetwork propagated(PreparedNetwork net, std::size_t updated) {
  propagate_clause_update(net, updated);
  return net;
}

std::size_t constraint_home(const PreparedNetwork& net, const ConstraintSet& c) {
  const Scope vars = c.variables();
  for (const auto& v : vars.vars()) {
    if (!net.has_variable(v)) {
      throw Error(ErrorKind::unknown_variable,
                  "evidence mentions unknown variable '" + v.name() + "'");
    }
  }
  auto home = net.covering_node(vars);
  if (!home) {
    throw Error(ErrorKind::constraint_form,
                "no single clause contains every variable of " + describe(c));
  }
  return *home;
}

void validate_evidence(const PreparedNetwork& net, const EvidenceSet& ev) {
  for (const auto& c : ev.constraints) {
    validate(c);
    if (c.threshold && *c.threshold < 0.0) {
      throw Error(ErrorKind::range, "negative threshold on " + describe(c));
    }
    constraint_home(net, c);
    if (const auto* m = std::get_if<MarginalConstraint>(&c.kind)) {
      for (const auto& v : m->partition.vars()) {
        if (!net.is_observed(v)) {
          throw Error(ErrorKind::undeclared_variable,
                      "'" + v.name() + "' is not declared as an observation");
        }
      }
    }
  }
  if (ev.default_threshold < 0.0) {
    throw Error(ErrorKind::range, "negative default threshold");
  }
}

std::vector<double> gradient_vector(const PreparedNetwork& net,
                                    const ConstraintSet& c) {
  return constraint_gradient(net.node(constraint_home(net, c)).table, c);
}

double gradient(const PreparedNetwork& net, const ConstraintSet& c) {
  return scalar_gradient(gradient_vector(net, c));
}

namespace {

std::vector<double> all_gradients(const PreparedNetwork& net,
                                  const EvidenceSet& ev) {
  std::vector<double> g;
  for (const auto& c : ev.constraints) g.push_back(gradient(net, c));
  return g;
}

bool satisfied(const std::vector<double>& g, const EvidenceSet& ev) {
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (std::abs(g[k]) > ev.threshold_of(k)) return false;
  }
  return true;
}

}  // namespace

std::pair<PreparedNetwork, RunTrace> run_reasoning(PreparedNetwork net,
                                                   const EvidenceSet& ev,
                                                   const RunOptions& options) {
  validate_evidence(net, ev);
  RunTrace trace;
  trace.initial_gradients = all_gradients(net, ev);
  auto g = trace.initial_gradients;
  const std::size_t n = ev.constraints.size();

  while (true) {
    if (satisfied(g, ev)) {
      trace.converged = true;
      break;
    }
    if (trace.pass_count >= ev.max_passes) break;
    ++trace.pass_count;
    std::vector<bool> used(n, false);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t pick = n;
      if (ev.policy == OrderPolicy::program_order) {
        pick = k;
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          if (used[i]) continue;
          if (pick == n || std::abs(g[i]) > std::abs(g[pick])) pick = i;
        }
      }
      used[pick] = true;
      const auto& c = ev.constraints[pick];
      const std::size_t home = constraint_home(net, c);

      TraceStep step;
      step.step = trace.steps.size() + 1;
      step.pass = trace.pass_count;
      step.constraint = pick;
      step.label = c.label.empty() ? describe(c) : c.label;
      step.gradient_before = g[pick];
      step.home = home;

      net.set_table(home, apply_constraint(net.node(home).table, c, options.lec));
      step.touched.push_back(net.node(home).label());
      for (std::size_t t : propagate_clause_update(net, home)) {
        if (!net.node(t).is_region()) step.touched.push_back(net.node(t).label());
      }
      for (const auto& v : net.variables()) {
        step.marginals.emplace_back(v, posterior_marginal(net, v).second);
      }
      g = all_gradients(net, ev);
      if (options.on_step) options.on_step(step, net);
      trace.steps.push_back(std::move(step));
    }
    trace.passes.push_back({trace.pass_count, g});
  }
  trace.final_gradients = g;
  return {std::move(net), std::move(trace)};
}

std::pair<double, double> posterior_marginal(const PreparedNetwork& net,
                                             const VariableId& v) {
  const auto& table = net.node(net.home_of(v)).table;
  const auto m = marginalize(table, Scope(std::vector<VariableId>{v}));
  const double total = m[0] + m[1];
  const double on = m[1] / total;
  for (const auto& node : net.nodes()) {
    if (!node.table.scope().contains(v)) continue;
    const auto other = marginalize(node.table, Scope(std::vector<VariableId>{v}));
    if (std::abs(other[1] / (other[0] + other[1]) - on) > 1e-9) {
      throw Error(ErrorKind::internal,
                  "marginal of '" + v.name() + "' differs between '" +
                      net.node(net.home_of(v)).label() + "' and '" +
                      node.label() + "'");
    }
  }
  return {1.0 - on, on};
}

double marginal_inconsistency(const PreparedNetwork& net) {
  double worst = 0.0;
  for (const auto& v : net.variables()) {
    const Scope single(std::vector<VariableId>{v});
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& node : net.nodes()) {
      if (!node.table.scope().contains(v)) continue;
      const double p = marginalize(node.table, single)[1];
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    if (hi >= lo) worst = std::max(worst, hi - lo);
  }
  return worst;
}

}  // namespace rcndl
