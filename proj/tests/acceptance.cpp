#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "rcndl/format.hpp"
#include "rcndl/oracle.hpp"

using namespace rcndl;
using fixtures::evidence;
using fixtures::p_true;
using fixtures::prepare;
using fixtures::table_of;

namespace {

class Check {
 public:
  void near(const std::string& what, double got, double want, double tol) {
    ++count_;
    if (std::abs(got - want) <= tol) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s = %.7f, expected %.6f (|diff| %.1e > %.0e)",
                  what.c_str(), got, want, std::abs(got - want), tol);
    failures_.push_back(buf);
  }
  void table(const std::string& what, const JointTable& t,
             std::vector<double> want, double tol) {
    for (std::size_t j = 0; j < want.size(); ++j) {
      near(what + "[" + std::to_string(j) + "]", t[j], want[j], tol);
    }
  }
  void that(const std::string& what, bool ok) {
    ++count_;
    if (!ok) failures_.push_back(what);
  }
  bool ok() const { return failures_.empty(); }
  std::size_t count() const { return count_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::size_t count_ = 0;
  std::vector<std::string> failures_;
};

int failed = 0;

void report(const char* id, const char* title, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.that(std::string("exception: ") + e.what(), false);
  }
  std::printf("[%s] %-4s %s (%zu checks", c.ok() ? "PASS" : "FAIL", id, title, c.count());
  if (!c.ok()) {
    std::printf(", %zu failed: ", c.failures().size());
    for (std::size_t k = 0; k < c.failures().size(); ++k) {
      std::printf("%s%s", k ? "; " : "", c.failures()[k].c_str());
    }
    ++failed;
  }
  std::printf(")\n");
}

// P(A) after each pass.
std::vector<double> per_pass(const char* program, const std::string& ev_text,
                             std::size_t passes, OrderPolicy policy) {
  auto ev = evidence(ev_text, 0.0, policy);
  ev.max_passes = passes;
  auto [net, trace] = run_reasoning(prepare(program), ev);
  std::vector<double> out;
  for (const auto& s : trace.steps) {
    if (s.step % ev.constraints.size() == 0) out.push_back(s.marginals.at(0).second);
  }
  // A converged run keeps its value through later passes.
  if (out.empty()) out.push_back(p_true(net, "A"));
  while (out.size() < passes) out.push_back(out.back());
  return out;
}

double oracle_a(const char* program, const std::string& ev_text) {
  const auto net = prepare(program);
  const auto ev = evidence(ev_text);
  return joint_marginal(oracle_mce(expand_full_joint(net), ev.constraints),
                        VariableId("A"));
}

struct Row {
  double b, c;
  double b_first[2];
  double c_first[2];  // NaN: not printed
  double mce;
};

const Row kConstraintTable[] = {
    {0.33, 0.95, {0.290038, 0.274248}, {0.276089, 0.274341}, 0.274364},
    {1.00, 0.15, {0.866627, 0.866627}, {0.895002, 0.866627}, 0.866537},
    {0.15, 0.67, {0.429631, 0.435663}, {0.418813, 0.433291}, 0.433053},
    {0.27, 0.05, {0.873383, 0.870505}, {0.869070, 0.871116}, 0.871064},
    {0.65, 0.85, {0.379245, 0.398768}, {0.415431, 0.393405}, 0.394492},
    {0.95, 0.85, {0.443543, 0.448283}, {0.457625, NAN}, 0.447418},
};

std::string pair_text(const char* x, double px, const char* y, double py) {
  return std::string("P(") + x + ") = " + fixtures::fmt(px) + "; P(" + y +
         ") = " + fixtures::fmt(py);
}

}  // namespace

int main() {
  report("1", "intermediate form", [](Check& c) {
    const auto text = render_intermediate(prepare(fixtures::kFork));
    for (const char* line : {"A -> B : [0.240000, 0.060000, 0.420000, 0.280000].\n",
                             "A -> C : [0.060000, 0.240000, 0.630000, 0.070000].\n",
                             "B : [0.660000, 0.340000].\n",
                             "C : [0.690000, 0.310000].\n"}) {
      c.that(std::string("missing line ") + line, text.find(line) != std::string::npos);
    }
  });

  report("2", "single Jeffrey step", [](Check& c) {
    auto net = prepare(fixtures::kFork);
    const ConstraintSet pc{MarginalConstraint{Scope{"C"}, {0.05, 0.95}}, {}, {}};
    const std::size_t home = constraint_home(net, pc);
    net.set_table(home, apply_constraint(net.node(home).table, pc));
    propagate_clause_update(net, home);
    c.table("[A,C]", net.node(home).table, {0.004348, 0.735484, 0.045652, 0.214516}, 5e-7);
    c.near("P(A)", p_true(net, "A"), 0.260168, 5e-7);
  });

  report("3", "iteration trace", [](Check& c) {
    std::vector<JointTable> ab;
    RunOptions opts;
    opts.on_step = [&](const TraceStep&, const PreparedNetwork& n) {
      ab.push_back(table_of(n, "A -> B"));
    };
    const std::string ev = "P(B) = 0.33; P(C) = 0.95";
    auto [net, trace] = run_reasoning(prepare(fixtures::kFork), evidence(ev, 0.01), opts);
    c.that("two steps at threshold 0.01", ab.size() == 2);
    if (ab.size() >= 2) {
      c.table("step 1 [A,B]", ab[0], {0.591866, 0.147966, 0.156101, 0.104067}, 5e-7);
      c.table("step 2 [A,B]", ab[1], {0.530171, 0.193740, 0.139829, 0.136260}, 5e-7);
    }
    c.near("P(A) at 0.01", p_true(net, "A"), 0.276089, 5e-7);
    c.near("|grad C|", std::abs(trace.final_gradients.at(1)), 0.002700, 5e-7);
    auto [fine, fine_trace] = run_reasoning(prepare(fixtures::kFork), evidence(ev, 0.001));
    c.near("P(A) at 0.001", p_true(fine, "A"), 0.274341, 5e-7);
  });

  report("4", "two-constraint table", [](Check& c) {
    int row = 0;
    for (const auto& r : kConstraintTable) {
      ++row;
      const auto label = "row " + std::to_string(row);
      const auto b_first = per_pass(fixtures::kFork, pair_text("B", r.b, "C", r.c), 2,
                                    OrderPolicy::program_order);
      const auto c_first = per_pass(fixtures::kFork, pair_text("C", r.c, "B", r.b), 2,
                                    OrderPolicy::program_order);
      for (int k = 0; k < 2; ++k) {
        const auto step = " step " + std::to_string(k + 1);
        c.near(label + " B-first" + step, b_first.at(k), r.b_first[k], 5e-7);
        if (!std::isnan(r.c_first[k])) {
          c.near(label + " C-first" + step, c_first.at(k), r.c_first[k], 5e-7);
        }
      }
      c.near(label + " MCE", oracle_a(fixtures::kFork, pair_text("B", r.b, "C", r.c)),
             r.mce, 5e-7);
    }
  });

  report("5", "cancer network, Bayesian evidence", [](Check& c) {
    auto [net, trace] = run_reasoning(prepare(fixtures::kCancer), evidence("D = false; E = true"));
    c.that("exactly one pass", trace.pass_count == 1 && trace.converged);
    c.near("P(A)", p_true(net, "A"), 0.097278, 5e-7);
    for (double g : trace.final_gradients) c.that("final gradient exactly 0", g == 0.0);
  });

  report("6", "cancer network, uncertain evidence", [](Check& c) {
    const auto e_first = per_pass(fixtures::kCancer, "P(E) = 0.10; P(D) = 0.75", 1,
                                  OrderPolicy::greatest_gradient);
    c.near("E-first pass 1 P(A)", e_first.at(0), 0.336083, 5e-7);
    c.near("oracle P(A)", oracle_a(fixtures::kCancer, "P(D) = 0.75; P(E) = 0.10"), 0.336007, 5e-7);
    const auto d_first = per_pass(fixtures::kCancer, "P(D) = 0.75; P(E) = 0.10", 2,
                                  OrderPolicy::program_order);
    c.that("D-first pass 1 not yet within 1e-4", std::abs(d_first.at(0) - 0.336007) > 1e-4);
    c.near("D-first pass 2 P(A)", d_first.at(1), 0.336007, 1e-4);
  });

  report("7a", "tables stay distributions after every operation", [](Check& c) {
    std::mt19937_64 rng(11);
    auto is_distribution = [](const JointTable& t) {
      double s = 0.0;
      for (double p : t.probs()) {
        if (!(p >= 0.0)) return false;
        s += p;
      }
      return std::abs(s - 1.0) <= 1e-9;
    };
    for (int trial = 0; trial < 50; ++trial) {
      const auto net = prepare(fixtures::random_program(rng, 3 + trial % 3).c_str());
      auto ev = fixtures::random_evidence(rng, net);
      ev.default_threshold = 1e-8;
      RunOptions opts;
      opts.on_step = [&](const TraceStep& s, const PreparedNetwork& n) {
        for (const auto& node : n.nodes()) {
          c.that("trial " + std::to_string(trial) + " step " + std::to_string(s.step) +
                     " " + node.label(),
                 is_distribution(node.table));
        }
      };
      run_reasoning(net, ev, opts);
    }
  });

  report("7b", "Jeffrey satisfaction and within-event conditionals", [](Check& c) {
    std::mt19937_64 rng(22);
    std::uniform_int_distribution<std::size_t> width(2, 5);
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<VariableId> vars;
      const std::size_t n = width(rng);
      for (std::size_t k = 0; k < n; ++k) vars.emplace_back("V" + std::to_string(k));
      const Scope s(vars);
      const JointTable t(s, fixtures::random_distribution(rng, s.state_count()));
      const Scope ps(std::vector<VariableId>(vars.begin(), vars.begin() + 1 + trial % (n - 1)));
      const MarginalConstraint mc{ps, fixtures::random_distribution(rng, ps.state_count(), 0.0)};
      const auto out = jeffrey_update(t, mc);
      const auto m = marginalize(out, ps);
      const auto before = marginalize(t, ps);
      const auto map = projection_map(s, ps);
      double worst = 0.0;
      for (std::size_t l = 0; l < m.size(); ++l) worst = std::max(worst, std::abs(m[l] - mc.targets[l]));
      for (std::size_t j = 0; j < t.size(); ++j) {
        if (m[map[j]] > 0.0) {
          worst = std::max(worst, std::abs(out[j] / m[map[j]] - t[j] / before[map[j]]));
        }
      }
      c.near("instance " + std::to_string(trial) + " worst deviation", worst, 0.0, 1e-12);
    }
  });

  report("7c", "dual gradient against central differences", [](Check& c) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> width(1, 4);
    std::uniform_int_distribution<std::size_t> count(1, 4);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t states = std::size_t{1} << width(rng);
      const auto prior = fixtures::random_distribution(rng, states);
      std::vector<std::vector<double>> rows(count(rng) + 1, std::vector<double>(states));
      for (auto& r : rows) for (auto& x : r) x = u(rng);
      std::vector<double> rhs(rows.size()), lambda(rows.size());
      for (auto& x : rhs) x = u(rng);
      for (auto& x : lambda) x = 0.5 * u(rng);
      const auto g = dual::gradient(prior, rows, rhs, lambda);
      double worst = 0.0;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const double h = 1e-5;
        auto hi = lambda, lo = lambda;
        hi[k] += h;
        lo[k] -= h;
        const double fd = (dual::value(prior, rows, rhs, hi) - dual::value(prior, rows, rhs, lo)) / (2 * h);
        worst = std::max(worst, std::abs(g[k] - fd) / std::max(std::abs(fd), 1e-3));
      }
      c.near("instance " + std::to_string(trial) + " relative error", worst, 0.0, 1e-5);
    }
  });

  report("7d", "dual solver equals Jeffrey on marginal sets", [](Check& c) {
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<std::size_t> width(2, 4);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<VariableId> vars;
      const std::size_t n = width(rng);
      for (std::size_t k = 0; k < n; ++k) vars.emplace_back("V" + std::to_string(k));
      const Scope s(vars);
      const JointTable t(s, fixtures::random_distribution(rng, s.state_count()));
      const Scope ps(std::vector<VariableId>(vars.begin(), vars.begin() + 1 + trial % 2));
      const MarginalConstraint mc{ps, fixtures::random_distribution(rng, ps.state_count(), 0.02)};
      const auto a = lec_solve(t, as_linear(mc, s)).table;
      const auto b = jeffrey_update(t, mc);
      double worst = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
      c.near("instance " + std::to_string(trial), worst, 0.0, 1e-6);
    }
  });

  report("7e", "scheduler limit equals oracle limit", [](Check& c) {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 50; ++trial) {
      const auto net = prepare(fixtures::random_program(rng, 3 + trial % 3).c_str());
      auto ev = fixtures::random_evidence(rng, net);
      ev.default_threshold = 1e-10;
      ev.max_passes = 100000;
      const auto oracle = oracle_mce(expand_full_joint(net), ev.constraints);
      auto [post, trace] = run_reasoning(net, ev);
      c.that("instance " + std::to_string(trial) + " converged", trace.converged);
      for (const auto& v : post.variables()) {
        c.near("instance " + std::to_string(trial) + " P(" + v.name() + ")",
               posterior_marginal(post, v).second, joint_marginal(oracle, v), 1e-4);
      }
    }
  });

  report("7f", "cross-entropy decomposition", [](Check& c) {
    const auto prior = prepare(fixtures::kFork);
    auto [post, t1] = run_reasoning(prior, evidence("P(B) = 0.33; P(C) = 0.95"));
    auto [full, sum] = ce_decomposition_check(prior, post);
    c.near("fork network clause-wise sum", sum, full, 1e-9);
    const auto cprior = prepare(fixtures::kCancer);
    auto [cpost, t2] = run_reasoning(cprior, evidence("D = false; E = true"));
    auto [cfull, csum] = ce_decomposition_check(cprior, cpost);
    c.near("cancer network clause-wise sum", csum, cfull, 1e-9);
  });

  report("7g", "cross-clause marginal consistency", [](Check& c) {
    std::mt19937_64 rng(77);
    std::vector<std::pair<std::string, EvidenceSet>> runs;
    for (int trial = 0; trial < 50; ++trial) {
      const auto program = fixtures::random_program(rng, 3 + trial % 4);
      auto ev = fixtures::random_evidence(rng, prepare(program.c_str()));
      ev.default_threshold = 1e-8;
      runs.emplace_back(program, ev);
    }
    runs.emplace_back(fixtures::kCancer, evidence("P(D) = 0.75; P(E) = 0.10"));
    runs.emplace_back(fixtures::kFork, evidence("P(B) = 0.33; P(C) = 0.95"));
    for (const auto& [program, ev] : runs) {
      RunOptions opts;
      opts.on_step = [&](const TraceStep& s, const PreparedNetwork& n) {
        c.near("step " + std::to_string(s.step) + " spread", marginal_inconsistency(n), 0.0, 1e-9);
      };
      run_reasoning(prepare(program.c_str()), ev, opts);
    }
  });

  report("8", "greatest gradient needs no more passes than program order", [](Check& c) {
    int row = 0;
    for (const auto& r : kConstraintTable) {
      ++row;
      for (double threshold : {0.01, 0.001}) {
        const auto text = pair_text("B", r.b, "C", r.c);
        auto [g_net, greatest] = run_reasoning(
            prepare(fixtures::kFork),
            evidence(text, threshold, OrderPolicy::greatest_gradient));
        auto [p_net, program] = run_reasoning(
            prepare(fixtures::kFork), evidence(text, threshold, OrderPolicy::program_order));
        c.that("row " + std::to_string(row) + " threshold " + fixtures::fmt(threshold) + ": " +
                   std::to_string(greatest.pass_count) + " > " +
                   std::to_string(program.pass_count) + " passes",
               greatest.converged && greatest.pass_count <= program.pass_count);
      }
    }
  });

  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
