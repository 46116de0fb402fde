#pragma once

#include "clipmot/core.hpp"

namespace clipmot {

/// Optimal bipartite assignment with gating.
///
/// Pairs with non-finite cost or cost > max_cost are forbidden. Among
/// matchings of allowed pairs the solver minimizes sum(c_ij - max_cost), so
/// a pair is worth taking only if it is cheaper than leaving both sides
/// unmatched. With max_cost = +inf it returns a maximum-cardinality matching
/// of minimum total cost. Ties between optimal matchings are broken by the
/// lexicographically smallest row -> column vector, where "unmatched" sorts
/// after every column.
Assignment solve_assignment(const Matrix& cost, double max_cost);

/// Sum of costs of the matched pairs.
double assignment_cost(const Matrix& cost, const Assignment& a);

}  // namespace clipmot
