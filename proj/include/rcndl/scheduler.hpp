#pragma once

// Phase two of the interpreter: uses the evidence constraint sets one at a
// time on the clause that holds their variables and pushes every change
// through the clause tree.

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rcndl/engine.hpp"
#include "rcndl/preprocessor.hpp"

namespace rcndl {

enum class OrderPolicy { greatest_gradient, program_order };

struct EvidenceSet {
  std::vector<ConstraintSet> constraints;
  OrderPolicy policy = OrderPolicy::greatest_gradient;
  std::size_t max_passes = 100;
  double default_threshold = 1e-3;

  double threshold_of(std::size_t k) const {
    return constraints.at(k).threshold.value_or(default_threshold);
  }
};

struct TraceStep {
  std::size_t step = 0;  // 1-based
  std::size_t pass = 0;  // 1-based
  std::size_t constraint = 0;
  std::string label;
  double gradient_before = 0.0;
  std::size_t home = 0;
  std::vector<std::string> touched;
  // P(v = true) for every network variable after the step.
  std::vector<std::pair<VariableId, double>> marginals;
};

struct PassSummary {
  std::size_t pass = 0;
  std::vector<double> gradients;  // scalar gradient per constraint at pass end
};

struct RunTrace {
  std::vector<TraceStep> steps;
  std::vector<PassSummary> passes;
  std::vector<double> initial_gradients;
  std::vector<double> final_gradients;
  std::size_t pass_count = 0;
  bool converged = false;
};

struct RunOptions {
  LecOptions lec;
  std::function<void(const TraceStep&, const PreparedNetwork&)> on_step;
};

// Breadth-first from `updated`: each neighbour is Jeffrey-updated to the
// separator marginal of the node it was reached from. Returns the nodes whose
// tables were replaced, in visiting order.
std::vector<std::size_t> propagate_clause_update(PreparedNetwork& net,
                                                 std::size_t updated);
PreparedNetwork propagated(PreparedNetwork net, std::size_t updated);

// Checks every constraint against the network; throws on unobserved or
// unknown variables and on constraints no single clause covers.
void validate_evidence(const PreparedNetwork& net, const EvidenceSet& ev);

// The node a constraint is applied to.
std::size_t constraint_home(const PreparedNetwork& net, const ConstraintSet& c);

std::vector<double> gradient_vector(const PreparedNetwork& net,
                                    const ConstraintSet& c);
double gradient(const PreparedNetwork& net, const ConstraintSet& c);

// Passes of the constraint sets until every |gradient| is within its
// threshold at a pass boundary or max_passes is reached. Within a pass each
// set is used once: largest |gradient| first among those not yet used
// (earlier set on ties), or in evidence order.
std::pair<PreparedNetwork, RunTrace> run_reasoning(PreparedNetwork net,
                                                   const EvidenceSet& ev,
                                                   const RunOptions& options = {});

// [P(!v), P(v)] from the clause that introduces v.
std::pair<double, double> posterior_marginal(const PreparedNetwork& net,
                                             const VariableId& v);

// Largest disagreement between the marginals of any variable across the
// clause tables that contain it.
double marginal_inconsistency(const PreparedNetwork& net);

}  // namespace rcndl
