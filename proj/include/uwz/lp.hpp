#pragma once

// Small dense two-phase simplex for the desk-scale linear programs that show
// up here: bundle master problems, convex-hull membership checks and the
// fallback path of the worst-case-channel solver. Bland's rule throughout,
// so it terminates on degenerate instances.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace uwz {

enum class LpRel { LE, GE, EQ };

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded } status;
  double value = 0.0;
  std::vector<double> x;
};

namespace detail {

class SimplexTableau {
 public:
  SimplexTableau(int rows, int cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  double& obj(int c) { return at(m_, c); }

  void pivot(int pr, int pc) {
    const double piv = at(pr, pc);
    for (int c = 0; c <= n_; ++c) at(pr, c) /= piv;
    for (int r = 0; r <= m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= n_; ++c) at(r, c) -= f * at(pr, c);
    }
  }

  // Bland: entering column = smallest index with positive reduced profit.
  // Returns false when optimal, throws on unboundedness.
  bool step(const std::vector<bool>& usable, std::vector<int>& basis) {
    constexpr double eps = 1e-9;
    int pc = -1;
    for (int c = 0; c < n_; ++c) {
      if (!usable[c]) continue;
      if (obj(c) > eps) {
        pc = c;
        break;
      }
    }
    if (pc < 0) return false;
    int pr = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m_; ++r) {
      if (at(r, pc) > eps) {
        const double ratio = rhs(r) / at(r, pc);
        if (ratio < best - 1e-12 || (ratio < best + 1e-12 && (pr < 0 || basis[r] < basis[pr]))) {
          best = ratio;
          pr = r;
        }
      }
    }
    if (pr < 0) throw std::length_error("lp: unbounded");
    pivot(pr, pc);
    basis[pr] = pc;
    return true;
  }

  int m_, n_;
  std::vector<double> t_;
};

}  // namespace detail

// maximize c.x subject to A x (rel) b, x >= 0
inline LpResult solve_lp(std::vector<double> c, std::vector<std::vector<double>> A,
                         std::vector<LpRel> rel, std::vector<double> b) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  if (static_cast<int>(b.size()) != m || static_cast<int>(rel.size()) != m)
    throw std::invalid_argument("solve_lp: shape mismatch");
  for (int r = 0; r < m; ++r)
    if (static_cast<int>(A[r].size()) != n) throw std::invalid_argument("solve_lp: row width");

  for (int r = 0; r < m; ++r) {
    if (b[r] < 0.0) {
      for (auto& v : A[r]) v = -v;
      b[r] = -b[r];
      rel[r] = rel[r] == LpRel::LE ? LpRel::GE : (rel[r] == LpRel::GE ? LpRel::LE : LpRel::EQ);
    }
  }

  int slacks = 0, artificials = 0;
  for (auto rl : rel) {
    if (rl != LpRel::EQ) ++slacks;
    if (rl != LpRel::LE) ++artificials;
  }
  const int total = n + slacks + artificials;
  detail::SimplexTableau t(m, total);
  std::vector<int> basis(m, -1);
  std::vector<bool> is_artificial(total, false);

  int scol = n, acol = n + slacks;
  for (int r = 0; r < m; ++r) {
    for (int cidx = 0; cidx < n; ++cidx) t.at(r, cidx) = A[r][cidx];
    t.rhs(r) = b[r];
    switch (rel[r]) {
      case LpRel::LE:
        t.at(r, scol) = 1.0;
        basis[r] = scol++;
        break;
      case LpRel::GE:
        t.at(r, scol++) = -1.0;
        t.at(r, acol) = 1.0;
        is_artificial[acol] = true;
        basis[r] = acol++;
        break;
      case LpRel::EQ:
        t.at(r, acol) = 1.0;
        is_artificial[acol] = true;
        basis[r] = acol++;
        break;
    }
  }

  std::vector<bool> usable(total, true);
  LpResult res;

  if (artificials > 0) {
    // phase 1: maximize -(sum of artificials)
    for (int cidx = 0; cidx < total; ++cidx) t.obj(cidx) = is_artificial[cidx] ? -1.0 : 0.0;
    t.at(m, total) = 0.0;
    for (int r = 0; r < m; ++r)
      if (is_artificial[basis[r]])
        for (int cidx = 0; cidx <= total; ++cidx) t.at(m, cidx) += t.at(r, cidx);
    while (t.step(usable, basis)) {
    }
    double art_sum = 0.0;
    for (int r = 0; r < m; ++r)
      if (is_artificial[basis[r]]) art_sum += t.rhs(r);
    if (art_sum > 1e-7) {
      res.status = LpResult::Status::Infeasible;
      return res;
    }
    // drive remaining artificials out of the basis
    for (int r = 0; r < m; ++r) {
      if (!is_artificial[basis[r]]) continue;
      int pc = -1;
      for (int cidx = 0; cidx < total; ++cidx)
        if (!is_artificial[cidx] && std::fabs(t.at(r, cidx)) > 1e-9) {
          pc = cidx;
          break;
        }
      if (pc >= 0) {
        t.pivot(r, pc);
        basis[r] = pc;
      }
      // else: redundant row, harmless to leave
    }
    for (int cidx = 0; cidx < total; ++cidx)
      if (is_artificial[cidx]) usable[cidx] = false;
  }

  // phase 2: rebuild objective row for the original c
  for (int cidx = 0; cidx <= total; ++cidx) t.obj(cidx) = 0.0;
  for (int cidx = 0; cidx < n; ++cidx) t.obj(cidx) = c[cidx];
  for (int r = 0; r < m; ++r) {
    if (basis[r] < n && c[basis[r]] != 0.0) {
      const double f = c[basis[r]];
      for (int cidx = 0; cidx <= total; ++cidx) t.at(m, cidx) -= f * t.at(r, cidx);
    }
  }
  try {
    while (t.step(usable, basis)) {
    }
  } catch (const std::length_error&) {
    res.status = LpResult::Status::Unbounded;
    return res;
  }

  res.status = LpResult::Status::Optimal;
  res.x.assign(n, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < n) res.x[basis[r]] = t.rhs(r);
  res.value = 0.0;
  for (int cidx = 0; cidx < n; ++cidx) res.value += c[cidx] * res.x[cidx];
  return res;
}

// Is w in the convex hull of the given points? Feasibility LP with
// lambda >= 0, sum lambda = 1, sum lambda * points[k] = w.
inline bool in_convex_hull(const std::vector<std::vector<double>>& points,
                           const std::vector<double>& w, double tol = 1e-7) {
  if (points.empty()) return false;
  const int dim = static_cast<int>(w.size());
  const int k = static_cast<int>(points.size());
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<LpRel> rel;
  for (int d = 0; d < dim; ++d) {
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = points[j].at(d);
    // two-sided tolerance band instead of exact equality
    A.push_back(row);
    b.push_back(w[d] + tol);
    rel.push_back(LpRel::LE);
    A.push_back(row);
    b.push_back(w[d] - tol);
    rel.push_back(LpRel::GE);
  }
  A.emplace_back(k, 1.0);
  b.push_back(1.0);
  rel.push_back(LpRel::EQ);
  LpResult r = solve_lp(std::vector<double>(k, 0.0), A, rel, b);
  return r.status == LpResult::Status::Optimal;
}

}  // namespace uwz
