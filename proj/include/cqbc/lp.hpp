#pragma once

// Double-precision two-phase simplex. Dantzig pricing with a switch to
// Bland's rule after a stall, which keeps the common case fast and still
// guarantees termination. All structural variables are nonnegative.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cqbc {

inline constexpr double kLpTol = 1e-9;

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpProblem {
  std::size_t nvars = 0;
  std::vector<std::vector<double>> a;  // m x nvars
  std::vector<double> b;               // m
  std::vector<char> sense;             // '<' (<=), '>' (>=), '=' per row
  std::vector<double> c;               // maximize c.x (empty = feasibility only)
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

class SimplexTableau {
 public:
  // rows already normalized to b >= 0 with slack/surplus appended;
  // artificial columns appended last
  std::vector<std::vector<double>> t;  // m rows of (ncols + 1); last entry rhs
  std::vector<double> obj;             // ncols + 1; maximize; last = value
  std::vector<std::size_t> basis;      // per row, basic column
  std::size_t ncols = 0;

  void pivot(std::size_t row, std::size_t col) {
    const double p = t[row][col];
    for (double& v : t[row]) v /= p;
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (r == row) continue;
      const double f = t[r][col];
      if (f == 0.0) continue;
      for (std::size_t cidx = 0; cidx <= ncols; ++cidx)
        t[r][cidx] -= f * t[row][cidx];
    }
    const double f = obj[col];
    if (f != 0.0)
      for (std::size_t cidx = 0; cidx <= ncols; ++cidx)
        obj[cidx] -= f * t[row][cidx];
    basis[row] = col;
  }

  // returns Optimal/Unbounded/IterLimit for the current objective
  LpStatus run(const std::vector<bool>& allowed) {
    const std::size_t iter_limit = 20000 + 50 * (t.size() + ncols);
    std::size_t stall = 0;
    double last_value = obj[ncols];
    for (std::size_t iter = 0; iter < iter_limit; ++iter) {
      const bool bland = stall > 200;
      std::size_t enter = ncols;
      double best = kLpTol;
      for (std::size_t cidx = 0; cidx < ncols; ++cidx) {
        if (!allowed[cidx]) continue;
        if (obj[cidx] > best) {
          enter = cidx;
          if (bland) break;
          best = obj[cidx];
        }
      }
      if (enter == ncols) return LpStatus::Optimal;

      std::size_t leave = t.size();
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < t.size(); ++r) {
        if (t[r][enter] <= kLpTol) continue;
        const double ratio = t[r][ncols] / t[r][enter];
        if (ratio < best_ratio - kLpTol ||
            (ratio < best_ratio + kLpTol &&
             (leave == t.size() || basis[r] < basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
      if (leave == t.size()) return LpStatus::Unbounded;
      pivot(leave, enter);
      if (std::abs(obj[ncols] - last_value) <= 1e-12)
        ++stall;
      else
        stall = 0;
      last_value = obj[ncols];
    }
    return LpStatus::IterLimit;
  }
};

}  // namespace detail

inline LpSolution simplex_solve(const LpProblem& p) {
  const std::size_t m = p.a.size();
  if (p.b.size() != m || p.sense.size() != m)
    throw std::invalid_argument("LP row data size mismatch");

  // column layout: structural | slack/surplus | artificial
  std::size_t nslack = 0;
  for (char s : p.sense)
    if (s == '<' || s == '>') ++nslack;

  std::vector<double> row_sign(m, 1.0);
  std::vector<char> sense(p.sense);
  for (std::size_t r = 0; r < m; ++r) {
    if (p.b[r] < 0.0) {
      row_sign[r] = -1.0;
      if (sense[r] == '<')
        sense[r] = '>';
      else if (sense[r] == '>')
        sense[r] = '<';
    }
  }

  std::vector<std::size_t> art_rows;
  for (std::size_t r = 0; r < m; ++r)
    if (sense[r] != '<') art_rows.push_back(r);

  const std::size_t ncols = p.nvars + nslack + art_rows.size();
  detail::SimplexTableau tab;
  tab.ncols = ncols;
  tab.t.assign(m, std::vector<double>(ncols + 1, 0.0));
  tab.basis.assign(m, 0);

  std::size_t slack_at = p.nvars;
  std::size_t art_at = p.nvars + nslack;
  for (std::size_t r = 0; r < m; ++r) {
    if (p.a[r].size() != p.nvars)
      throw std::invalid_argument("LP row width mismatch");
    for (std::size_t cidx = 0; cidx < p.nvars; ++cidx)
      tab.t[r][cidx] = row_sign[r] * p.a[r][cidx];
    tab.t[r][ncols] = row_sign[r] * p.b[r];
    if (sense[r] == '<') {
      tab.t[r][slack_at] = 1.0;
      tab.basis[r] = slack_at++;
    } else if (sense[r] == '>') {
      tab.t[r][slack_at++] = -1.0;
      tab.t[r][art_at] = 1.0;
      tab.basis[r] = art_at++;
    } else {
      tab.t[r][art_at] = 1.0;
      tab.basis[r] = art_at++;
    }
  }

  std::vector<bool> allowed(ncols, true);

  // phase 1: maximize -(sum of artificials)
  if (!art_rows.empty()) {
    tab.obj.assign(ncols + 1, 0.0);
    for (std::size_t cidx = p.nvars + nslack; cidx < ncols; ++cidx)
      tab.obj[cidx] = -1.0;
    // price out the artificial basis
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis[r] < p.nvars + nslack) continue;
      for (std::size_t cidx = 0; cidx <= ncols; ++cidx)
        tab.obj[cidx] += tab.t[r][cidx];
    }
    const LpStatus st = tab.run(allowed);
    if (st == LpStatus::IterLimit) return {LpStatus::IterLimit, 0.0, {}};
    // obj[ncols] carries the negated phase-1 value
    if (tab.obj[ncols] > kLpTol) return {LpStatus::Infeasible, 0.0, {}};
    // pivot remaining artificials out of the basis where possible
    for (std::size_t r = 0; r < m; ++r) {
      if (tab.basis[r] < p.nvars + nslack) continue;
      std::size_t cidx = 0;
      for (; cidx < p.nvars + nslack; ++cidx)
        if (std::abs(tab.t[r][cidx]) > kLpTol) break;
      if (cidx < p.nvars + nslack) tab.pivot(r, cidx);
    }
    for (std::size_t cidx = p.nvars + nslack; cidx < ncols; ++cidx)
      allowed[cidx] = false;
  }

  // phase 2
  tab.obj.assign(ncols + 1, 0.0);
  if (!p.c.empty()) {
    for (std::size_t cidx = 0; cidx < p.nvars && cidx < p.c.size(); ++cidx)
      tab.obj[cidx] = p.c[cidx];
    for (std::size_t r = 0; r < m; ++r) {
      const double f = tab.obj[tab.basis[r]];
      if (f == 0.0) continue;
      for (std::size_t cidx = 0; cidx <= ncols; ++cidx)
        tab.obj[cidx] -= f * tab.t[r][cidx];
    }
    const LpStatus st = tab.run(allowed);
    if (st != LpStatus::Optimal) return {st, 0.0, {}};
  }

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.x.assign(p.nvars, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (tab.basis[r] < p.nvars) sol.x[tab.basis[r]] = tab.t[r][ncols];
  sol.objective = 0.0;
  for (std::size_t cidx = 0; cidx < p.nvars && cidx < p.c.size(); ++cidx)
    sol.objective += p.c[cidx] * sol.x[cidx];
  return sol;
}

}  // namespace cqbc
