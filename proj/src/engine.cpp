#include "rcndl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rcndl {

double cross_entropy(const JointTable& p, const JointTable& q) {
  if (!(p.scope() == q.scope())) {
    throw Error(ErrorKind::scope_mismatch,
                "cross entropy of " + p.scope().to_string() + " against " +
                    q.scope().to_string());
  }
  double ce = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    if (q[j] == 0.0) {
      throw Error(ErrorKind::absolute_continuity,
                  "state " + std::to_string(j) + " of " +
                      p.scope().to_string() +
                      " has positive probability but zero reference mass");
    }
    ce += p[j] * std::log(p[j] / q[j]);
  }
  return ce;
}

JointTable jeffrey_update(const JointTable& table, const MarginalConstraint& c) {
  const auto map = projection_map(table.scope(), c.partition);
  if (c.targets.size() != c.partition.state_count()) {
    throw Error(ErrorKind::arity, "marginal over " + c.partition.to_string() +
                                      " needs " +
                                      std::to_string(c.partition.state_count()) +
                                      " targets");
  }
  std::vector<double> mass(c.partition.state_count(), 0.0);
  for (std::size_t j = 0; j < map.size(); ++j) mass[map[j]] += table[j];
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);

  std::vector<double> scale(mass.size(), 0.0);
  for (std::size_t l = 0; l < mass.size(); ++l) {
    if (mass[l] > 0.0) {
      scale[l] = c.targets[l] * total / mass[l];
    } else if (c.targets[l] > 0.0) {
      throw Error(ErrorKind::infeasible,
                  "event " + std::to_string(l) + " of " +
                      c.partition.to_string() +
                      " has zero prior probability but target " +
                      std::to_string(c.targets[l]));
    }
  }
  std::vector<double> out(table.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = table[j] * scale[map[j]] / total;
  }
  return JointTable::from_weights(table.scope(), std::move(out));
}

namespace {

struct ConditionalSplit {
  // -1: outside the condition event, 0: target false, 1: target true.
  std::vector<int> role;
  double outside = 0.0;
  double off = 0.0;  // P0(condition, !target)
  double on = 0.0;   // P0(condition, target)
};

ConditionalSplit split(const JointTable& table, const ConditionalConstraint& c) {
  const auto& scope = table.scope();
  auto target_pos = scope.position(c.target);
  if (!target_pos) {
    throw Error(ErrorKind::scope_mismatch,
                "'" + c.target.name() + "' is not in " + scope.to_string());
  }
  std::vector<std::pair<std::size_t, bool>> cond;
  for (const auto& lit : c.condition) {
    if (lit.var == c.target) {
      throw Error(ErrorKind::constraint_form,
                  "'" + c.target.name() + "' appears in its own condition");
    }
    auto p = scope.position(lit.var);
    if (!p) {
      throw Error(ErrorKind::scope_mismatch,
                  "'" + lit.var.name() + "' is not in " + scope.to_string());
    }
    cond.emplace_back(*p, lit.value);
  }
  ConditionalSplit s;
  s.role.resize(table.size());
  for (std::size_t j = 0; j < table.size(); ++j) {
    bool inside = std::all_of(cond.begin(), cond.end(), [&](const auto& pc) {
      return scope.bit(j, pc.first) == pc.second;
    });
    if (!inside) {
      s.role[j] = -1;
      s.outside += table[j];
    } else if (scope.bit(j, *target_pos)) {
      s.role[j] = 1;
      s.on += table[j];
    } else {
      s.role[j] = 0;
      s.off += table[j];
    }
  }
  return s;
}

}  // namespace

JointTable conditional_update(const JointTable& table,
                              const ConditionalConstraint& c) {
  const auto s = split(table, c);
  const double t = c.probability;
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorKind::range, "conditional target outside [0, 1]");
  }
  if (s.off + s.on <= 0.0) {
    throw Error(ErrorKind::infeasible,
                "condition event of P(" + c.target.name() +
                    " | ...) has zero prior probability");
  }
  if ((t > 0.0 && s.on <= 0.0) || (t < 1.0 && s.off <= 0.0)) {
    throw Error(ErrorKind::infeasible,
                "P(" + c.target.name() + " | ...) = " + std::to_string(t) +
                    " needs mass the prior rules out");
  }
  double off_scale = 0.0;
  double on_scale = 0.0;
  if (t == 1.0) {
    on_scale = 1.0;
  } else if (t == 0.0) {
    off_scale = 1.0;
  } else {
    const double log_k = std::log((1.0 - t) * s.on) - std::log(t * s.off);
    off_scale = std::exp(t * log_k);
    on_scale = std::exp(-(1.0 - t) * log_k);
  }
  std::vector<double> out(table.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    switch (s.role[j]) {
      case -1: out[j] = table[j]; break;
      case 0: out[j] = table[j] * off_scale; break;
      default: out[j] = table[j] * on_scale; break;
    }
  }
  return JointTable::from_weights(table.scope(), std::move(out));
}

namespace dual {

namespace {

// e^beta_j for every state.
std::vector<double> tilt(std::span<const double> prior,
                         const std::vector<std::vector<double>>& rows,
                         std::span<const double> lambda) {
  std::vector<double> w(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) {
    double s = 1.0;
    for (std::size_t k = 0; k < rows.size(); ++k) s += lambda[k] * rows[k][j];
    w[j] = std::exp(-s);
  }
  return w;
}

}  // namespace

// p0_j e^beta_j
std::vector<double> weights(std::span<const double> prior,
                            const std::vector<std::vector<double>>& rows,
                            std::span<const double> lambda) {
  auto w = tilt(prior, rows, lambda);
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = prior[j] > 0.0 ? prior[j] * w[j] : 0.0;
  }
  return w;
}

double value(std::span<const double> prior,
             const std::vector<std::vector<double>>& rows,
             std::span<const double> rhs, std::span<const double> lambda) {
  const auto w = tilt(prior, rows, lambda);
  double d = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    if (prior[j] > 0.0) d += prior[j] * w[j];
  }
  for (std::size_t k = 0; k < rows.size(); ++k) d += lambda[k] * rhs[k];
  return d;
}

std::vector<double> gradient(std::span<const double> prior,
                             const std::vector<std::vector<double>>& rows,
                             std::span<const double> rhs,
                             std::span<const double> lambda) {
  const auto w = tilt(prior, rows, lambda);
  std::vector<double> g(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < prior.size(); ++j) {
      if (prior[j] > 0.0) s += rows[k][j] * prior[j] * w[j];
    }
    g[k] = rhs[k] - s;
  }
  return g;
}

}  // namespace dual

LinearConstraint lift(const LinearConstraint& c, const Scope& scope) {
  if (c.scope == scope) return c;
  const auto map = projection_map(scope, c.scope);
  LinearConstraint out{scope, {}, c.rhs};
  for (const auto& row : c.rows) {
    std::vector<double> lifted(map.size());
    for (std::size_t j = 0; j < map.size(); ++j) lifted[j] = row[map[j]];
    out.rows.push_back(std::move(lifted));
  }
  return out;
}

LinearConstraint as_linear(const ConditionalConstraint& c, const Scope& scope) {
  const auto s = split(JointTable::uniform(scope), c);
  std::vector<double> row(scope.state_count(), 0.0);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (s.role[j] == 1) row[j] = 1.0 - c.probability;
    if (s.role[j] == 0) row[j] = -c.probability;
  }
  return {scope, {std::move(row)}, {0.0}};
}

LinearConstraint as_linear(const MarginalConstraint& c, const Scope& scope) {
  const auto map = projection_map(scope, c.partition);
  LinearConstraint out{scope, {}, {}};
  // The last event follows from the others and the unit-sum row.
  for (std::size_t l = 0; l + 1 < c.targets.size(); ++l) {
    std::vector<double> row(map.size(), 0.0);
    for (std::size_t j = 0; j < map.size(); ++j) row[j] = map[j] == l ? 1.0 : 0.0;
    out.rows.push_back(std::move(row));
    out.rhs.push_back(c.targets[l]);
  }
  return out;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

LecResult lec_solve(const JointTable& table, const LinearConstraint& c,
                    const LecOptions& options) {
  if (c.rows.size() != c.rhs.size()) {
    throw Error(ErrorKind::arity, "linear constraint needs one rhs per row");
  }
  auto lifted = lift(c, table.scope());
  auto rows = lifted.rows;
  auto rhs = lifted.rhs;
  rows.emplace_back(table.size(), 1.0);
  rhs.push_back(1.0);
  const std::size_t n = rows.size();
  const auto prior = table.probs();

  std::vector<double> lambda(n, 0.0);
  lambda.back() = -1.0;  // beta = 0: the tilt starts at the prior

  auto value = [&](std::span<const double> l) {
    return dual::value(prior, rows, rhs, l);
  };
  auto grad = [&](std::span<const double> l) {
    return dual::gradient(prior, rows, rhs, l);
  };
  auto result_of = [&](const std::vector<double>& l,
                       const std::vector<double>& g, double d,
                       std::size_t iterations) {
    auto w = dual::weights(prior, rows, l);
    DualState state;
    state.lambdas.assign(l.begin(), l.end() - 1);
    state.normalizer = l.back();
    state.value = d;
    state.gradient.assign(g.begin(), g.end() - 1);
    state.gradient_norm = std::sqrt(dot(g, g));
    state.iterations = iterations;
    return LecResult{JointTable::from_weights(table.scope(), std::move(w)),
                     std::move(state)};
  };

  double d = value(lambda);
  auto g = grad(lambda);
  std::vector<double> dir(n);
  for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
  double step = 1.0;
  std::size_t since_restart = 0;

  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    const double gg = dot(g, g);
    if (std::sqrt(gg) <= options.tolerance) return result_of(lambda, g, d, it);

    double slope = dot(g, dir);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = -gg;
      since_restart = 0;
    }

    // Armijo backtracking from the Newton step along the direction.
    double t = std::min(2.0 * step, 1e3);
    {
      const auto w = dual::weights(prior, rows, lambda);
      double curvature = 0.0;
      for (std::size_t j = 0; j < w.size(); ++j) {
        double a = 0.0;
        for (std::size_t k = 0; k < n; ++k) a += dir[k] * rows[k][j];
        curvature += w[j] * a * a;
      }
      if (curvature > 0.0 && std::isfinite(curvature)) t = -slope / curvature;
    }
    std::vector<double> trial(n);
    double trial_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int halvings = 0; halvings < 80; ++halvings, t *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = lambda[i] + t * dir[i];
      trial_value = value(trial);
      if (!std::isfinite(trial_value)) continue;
      if (trial_value <= d + options.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the decrease drops below the rounding of D; fall
      // back to requiring a smaller gradient.
      if (std::abs(trial_value - d) <= 64 * kEps * std::abs(d)) {
        const auto gt = grad(trial);
        if (dot(gt, gt) < gg) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      if (since_restart == 0) {
        throw LecNonConvergence("line search failed along steepest descent",
                                result_of(lambda, g, d, it));
      }
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      since_restart = 0;
      continue;
    }
    step = t;
    lambda = trial;
    d = trial_value;
    if (std::sqrt(dot(lambda, lambda)) > options.divergence_bound) {
      throw Error(ErrorKind::infeasible,
                  "dual multipliers diverge; the linear constraints over " +
                      table.scope().to_string() +
                      " have no interior solution");
    }
    auto g_new = grad(lambda);
    ++since_restart;
    if (since_restart >= n + 1) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g_new[i];
      since_restart = 0;
    } else {
      const double beta = dot(g_new, g_new) / gg;
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g_new[i] + beta * dir[i];
    }
    g = std::move(g_new);
  }
  if (std::sqrt(dot(g, g)) <= options.tolerance) {
    return result_of(lambda, g, d, options.max_iterations);
  }
  throw LecNonConvergence(
      "dual minimization did not reach tolerance in " +
          std::to_string(options.max_iterations) + " iterations",
      result_of(lambda, g, d, options.max_iterations));
}

std::vector<double> constraint_gradient(const JointTable& table,
                                        const ConstraintSet& c) {
  const double total = table.total();
  if (const auto* m = std::get_if<MarginalConstraint>(&c.kind)) {
    const auto map = projection_map(table.scope(), m->partition);
    std::vector<double> mass(m->partition.state_count(), 0.0);
    for (std::size_t j = 0; j < map.size(); ++j) mass[map[j]] += table[j];
    std::vector<double> g(mass.size());
    for (std::size_t l = 0; l < g.size(); ++l) {
      g[l] = m->targets[l] - mass[l] / total;
    }
    return g;
  }
  if (const auto* cc = std::get_if<ConditionalConstraint>(&c.kind)) {
    const auto s = split(table, *cc);
    const double inside = s.off + s.on;
    const double current = inside > 0.0 ? s.on / inside : cc->probability;
    return {cc->probability - current};
  }
  const auto lifted = lift(std::get<LinearConstraint>(c.kind), table.scope());
  std::vector<double> g(lifted.rows.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j < table.size(); ++j) {
      s += lifted.rows[k][j] * table[j];
    }
    g[k] = lifted.rhs[k] - s / total;
  }
  return g;
}

double scalar_gradient(std::span<const double> gradient) {
  double best = 0.0;
  for (double g : gradient) {
    if (std::abs(g) >= std::abs(best) - 1e-12) best = g;
  }
  return best;
}

JointTable apply_constraint(const JointTable& table, const ConstraintSet& c,
                            const LecOptions& lec) {
  if (const auto* m = std::get_if<MarginalConstraint>(&c.kind)) {
    return jeffrey_update(table, *m);
  }
  if (const auto* cc = std::get_if<ConditionalConstraint>(&c.kind)) {
    return conditional_update(table, *cc);
  }
  return lec_solve(table, std::get<LinearConstraint>(c.kind), lec).table;
}

}  // namespace rcndl
