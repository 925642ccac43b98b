#pragma once

// Evidence files. One statement per line or between ';':
//
//   P(B) = 0.33                 marginal of one variable
//   D = false                   Bayesian shorthand
//   P(B | A, !C) = 0.9          conditional, '!' negates a condition
//   P(B, C) = [0.1, 0.2, 0.3, 0.4]   joint marginal, first variable high bit
//   P(C) = 0.95 threshold 0.01  per-constraint threshold
//
// '#' starts a comment.

#include <string_view>
#include <vector>

#include "rcndl/model.hpp"

namespace rcndl {

std::vector<ConstraintSet> parse_evidence(std::string_view text);

}  // namespace rcndl
