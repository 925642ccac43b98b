#pragma once

// Minimum cross entropy update kernels. Every kernel is a pure function from a
// prior table to a posterior table over the same scope.

#include <cstddef>
#include <span>
#include <vector>

#include "rcndl/model.hpp"

namespace rcndl {

// sum_j p_j log(p_j / q_j), with 0 log(0 / q) = 0.
// Throws absolute_continuity when p_j > 0 and q_j = 0.
double cross_entropy(const JointTable& p, const JointTable& q);

// Scales every state of event S_l by P(S_l) / P0(S_l). Events with zero prior
// and zero target are left at zero; a positive target on a zero-prior event is
// infeasible.
JointTable jeffrey_update(const JointTable& table, const MarginalConstraint& c);

// Exponential tilt that meets P(target | condition) exactly:
// with t the target, a = P0(condition, !target), b = P0(condition, target)
// and K = (1 - t) b / (t a), condition states with the target false are
// scaled by K^t and those with the target true by K^-(1-t); the result is
// renormalized. States outside the condition event keep their relative mass.
JointTable conditional_update(const JointTable& table,
                              const ConditionalConstraint& c);

struct LecOptions {
  double tolerance = 1e-9;  // on the Euclidean norm of the dual gradient
  std::size_t max_iterations = 10000;
  double armijo_c1 = 1e-4;
  double divergence_bound = 1e6;  // on the multiplier norm
};

struct DualState {
  std::vector<double> lambdas;  // one per constraint row
  double normalizer = 0.0;      // multiplier of the implicit unit-sum row
  double value = 0.0;
  std::vector<double> gradient;  // per row, same order as lambdas
  double gradient_norm = 0.0;    // includes the unit-sum row
  std::size_t iterations = 0;
};

struct LecResult {
  JointTable table;
  DualState dual;
};

class LecNonConvergence : public Error {
 public:
  LecNonConvergence(const std::string& message, LecResult best)
      : Error(ErrorKind::non_convergence, message), best_(std::move(best)) {}

  const LecResult& best() const { return best_; }

 private:
  LecResult best_;
};

// Dual of the linear-equality problem,
//   D(lambda) = sum_j p0_j e^beta_j + sum_k lambda_k b_k,
//   beta_j = -(sum_k lambda_k a_kj + 1),
// and its gradient dD/dlambda_k = b_k - sum_j a_kj p0_j e^beta_j.
namespace dual {

// p0_j e^beta_j
std::vector<double> weights(std::span<const double> prior,
                            const std::vector<std::vector<double>>& rows,
                            std::span<const double> lambda);

double value(std::span<const double> prior,
             const std::vector<std::vector<double>>& rows,
             std::span<const double> rhs, std::span<const double> lambda);

std::vector<double> gradient(std::span<const double> prior,
                             const std::vector<std::vector<double>>& rows,
                             std::span<const double> rhs,
                             std::span<const double> lambda);

}  // namespace dual

// Minimizes cross entropy subject to the rows by Fletcher-Reeves conjugate
// gradients on the dual, with Armijo backtracking and a restart every n + 1
// iterations or when the direction stops descending. The unit-sum row is
// always added. Rows may be given over any subset of the table scope.
LecResult lec_solve(const JointTable& table, const LinearConstraint& c,
                    const LecOptions& options = {});

// Rows of a linear constraint expressed over a larger scope.
LinearConstraint lift(const LinearConstraint& c, const Scope& scope);

// The linear row that encodes P(target | condition) = t:
// (1 - t) on condition states with the target true, -t with it false, rhs 0.
LinearConstraint as_linear(const ConditionalConstraint& c, const Scope& scope);
LinearConstraint as_linear(const MarginalConstraint& c, const Scope& scope);

// Gradient vector: target minus current value per event, per
// conditional, or per row. Probabilities are taken relative to the table's
// total mass so crisp evidence yields exact zeros.
std::vector<double> constraint_gradient(const JointTable& table,
                                        const ConstraintSet& c);

// The component of largest magnitude (the later one on ties within 1e-12),
// with its sign.
double scalar_gradient(std::span<const double> gradient);

// Applies the update matching the constraint kind.
JointTable apply_constraint(const JointTable& table, const ConstraintSet& c,
                            const LecOptions& lec = {});

}  // namespace rcndl
