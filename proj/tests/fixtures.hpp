#pragma once

#include <random>
#include <string>
#include <vector>

#include "rcndl/evidence.hpp"
#include "rcndl/parser.hpp"
#include "rcndl/preprocessor.hpp"
#include "rcndl/scheduler.hpp"

namespace fixtures {

inline const char* kFork =
    "?- A : [0.300000, 0.700000].\n"
    "A -> B : [0.200000, 0.400000].\n"
    "A -> C : [0.800000, 0.100000].\n"
    "B.\n"
    "C.\n";

inline const char* kCancer =
    "?- A : [0.800000, 0.200000].\n"
    "A -> B : [0.200000, 0.800000].\n"
    "A -> C : [0.050000, 0.200000].\n"
    "B, C -> D : [0.050000, 0.800000, 0.800000, 0.800000].\n"
    "C -> E : [0.600000, 0.800000].\n"
    "D.\n"
    "E.\n";

inline rcndl::PreparedNetwork prepare(const char* text) {
  return rcndl::preprocess(rcndl::parse_program(text));
}

inline rcndl::EvidenceSet evidence(const std::string& text,
                                   double threshold = 1e-3,
                                   rcndl::OrderPolicy policy =
                                       rcndl::OrderPolicy::greatest_gradient) {
  rcndl::EvidenceSet ev;
  ev.constraints = rcndl::parse_evidence(text);
  ev.default_threshold = threshold;
  ev.policy = policy;
  return ev;
}

inline double p_true(const rcndl::PreparedNetwork& net, const char* v) {
  return rcndl::posterior_marginal(net, rcndl::VariableId(v)).second;
}

inline const rcndl::JointTable& table_of(const rcndl::PreparedNetwork& net,
                                         const std::string& label) {
  for (const auto& n : net.nodes()) {
    if (n.label() == label) return n.table;
  }
  throw std::runtime_error("no clause " + label);
}

inline std::vector<double> values(const rcndl::JointTable& t) {
  return {t.probs().begin(), t.probs().end()};
}

inline std::vector<double> random_distribution(std::mt19937_64& rng,
                                               std::size_t n,
                                               double floor = 0.01) {
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) s += (x = gamma(rng) + floor);
  for (auto& x : p) x /= s;
  return p;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// A random singly connected program over n variables X0..X(n-1): one root,
// every further variable has one or two parents among earlier variables
// chosen so the heads always hang off a clause tree. All variables observed.
inline std::string random_program(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  auto name = [](std::size_t k) { return "X" + std::to_string(k); };
  std::string text = "?- X0 : [";
  const double r = u(rng);
  text += fmt(1 - r) + ", " + fmt(r) + "].\n";
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<std::size_t> parents{std::uniform_int_distribution<std::size_t>(0, k - 1)(rng)};
    if (k >= 2 && std::bernoulli_distribution(0.3)(rng)) {
      std::size_t other = std::uniform_int_distribution<std::size_t>(0, k - 1)(rng);
      if (other != parents[0]) parents.push_back(other);
    }
    std::string head;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      head += (i ? ", " : "") + name(parents[i]);
    }
    text += head + " -> " + name(k) + " : [";
    for (std::size_t s = 0; s < (std::size_t{1} << parents.size()); ++s) {
      text += (s ? ", " : "") + fmt(u(rng));
    }
    text += "].\n";
  }
  for (std::size_t k = 0; k < n; ++k) text += name(k) + ".\n";
  return text;
}

// Two uncertain marginal constraints on distinct random variables.
inline rcndl::EvidenceSet random_evidence(std::mt19937_64& rng,
                                          const rcndl::PreparedNetwork& net) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const auto& vars = net.variables();
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  while (b == a) b = pick(rng);
  rcndl::EvidenceSet ev;
  for (std::size_t k : {a, b}) {
    const double p = u(rng);
    ev.constraints.push_back(
        {rcndl::MarginalConstraint{rcndl::Scope(std::vector<rcndl::VariableId>{vars[k]}),
                                   {1 - p, p}},
         {},
         {}});
  }
  return ev;
}

}  // namespace fixtures
