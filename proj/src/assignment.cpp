#include "clipmot/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace clipmot {

namespace {

// Hungarian method with potentials on a square matrix; returns the column
// assigned to each row. O(n^3).
std::vector<int> hungarian_square(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

struct Problem {
  int rows = 0;
  int cols = 0;
  Matrix weight;                  // >= 0 for allowed pairs
  std::vector<char> allowed;      // row-major

  bool ok(int r, int c) const { return allowed[r * cols + c] != 0; }
};

// Best total weight over the sub-problem restricted to the given rows/cols.
// Fills `match` (indexed by original row) for rows in the sub-problem.
double solve_sub(const Problem& pb, const std::vector<int>& rows,
                 const std::vector<int>& cols, std::vector<int>& match) {
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(cols.size());
  for (int r : rows) match[r] = -1;
  if (nr == 0 || nc == 0) return 0.0;
  const int n = std::max(nr, nc);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j)
      if (pb.ok(rows[i], cols[j])) a(i, j) = -pb.weight(rows[i], cols[j]);
  const auto sol = hungarian_square(a);
  double total = 0.0;
  for (int i = 0; i < nr; ++i) {
    const int j = sol[i];
    if (j < nc && pb.ok(rows[i], cols[j])) {
      match[rows[i]] = cols[j];
      total += pb.weight(rows[i], cols[j]);
    }
  }
  return total;
}

}  // namespace

Assignment solve_assignment(const Matrix& cost, double max_cost) {
  Problem pb;
  pb.rows = static_cast<int>(cost.rows());
  pb.cols = static_cast<int>(cost.cols());
  pb.allowed.assign(static_cast<std::size_t>(pb.rows) * pb.cols, 0);
  pb.weight = Matrix::Zero(pb.rows, pb.cols);

  double cmin = kInf, cmax = -kInf;
  int n_allowed = 0;
  for (int r = 0; r < pb.rows; ++r) {
    for (int c = 0; c < pb.cols; ++c) {
      const double x = cost(r, c);
      if (std::isfinite(x) && x <= max_cost) {
        pb.allowed[r * pb.cols + c] = 1;
        cmin = std::min(cmin, x);
        cmax = std::max(cmax, x);
        ++n_allowed;
      }
    }
  }

  Assignment out;
  if (n_allowed == 0) {
    for (int r = 0; r < pb.rows; ++r) out.unmatched_rows.push_back(r);
    for (int c = 0; c < pb.cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }

  double base = max_cost;
  if (!std::isfinite(max_cost)) {
    // Each extra pair must outweigh any cost difference between matchings.
    const int k = std::min(pb.rows, pb.cols);
    base = cmax + 1.0 + (cmax - cmin + 1.0) * k;
  }
  for (int r = 0; r < pb.rows; ++r)
    for (int c = 0; c < pb.cols; ++c)
      if (pb.ok(r, c)) pb.weight(r, c) = base - cost(r, c);

  std::vector<int> rows(pb.rows), cols(pb.cols);
  for (int r = 0; r < pb.rows; ++r) rows[r] = r;
  for (int c = 0; c < pb.cols; ++c) cols[c] = c;
  std::vector<int> cur(pb.rows, -1);
  const double best = solve_sub(pb, rows, cols, cur);
  const double tol = 1e-9 * std::max(1.0, std::abs(best));

  // Lexicographic refinement: fix rows in order to their smallest feasible
  // column, re-solving the remainder to confirm optimality is preserved.
  std::vector<int> final_match(pb.rows, -1);
  std::vector<char> col_used(pb.cols, 0);
  double fixed_weight = 0.0;
  std::vector<int> trial(pb.rows, -1);
  for (int r = 0; r < pb.rows; ++r) {
    std::vector<int> rest_rows;
    for (int rr = r + 1; rr < pb.rows; ++rr) rest_rows.push_back(rr);
    const int limit = cur[r] >= 0 ? cur[r] : pb.cols;
    int chosen = cur[r];
    for (int c = 0; c < limit; ++c) {
      if (col_used[c] || !pb.ok(r, c)) continue;
      std::vector<int> rest_cols;
      for (int cc = 0; cc < pb.cols; ++cc)
        if (!col_used[cc] && cc != c) rest_cols.push_back(cc);
      const double w =
          fixed_weight + pb.weight(r, c) + solve_sub(pb, rest_rows, rest_cols, trial);
      if (w >= best - tol) {
        chosen = c;
        for (int rr : rest_rows) cur[rr] = trial[rr];
        break;
      }
    }
    final_match[r] = chosen;
    if (chosen >= 0) {
      col_used[chosen] = 1;
      fixed_weight += pb.weight(r, chosen);
    }
  }

  for (int r = 0; r < pb.rows; ++r) {
    if (final_match[r] >= 0)
      out.pairs.emplace_back(r, final_match[r]);
    else
      out.unmatched_rows.push_back(r);
  }
  for (int c = 0; c < pb.cols; ++c)
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  return out;
}

double assignment_cost(const Matrix& cost, const Assignment& a) {
  double s = 0.0;
  for (auto [r, c] : a.pairs) s += cost(r, c);
  return s;
}

}  // namespace clipmot
