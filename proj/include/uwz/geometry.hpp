#pragma once

// Geometric objects of the robust Wyner-Ziv setup: the function alphabet U
// of all maps Y -> Xhat, distortion functionals d(V,W) and e(P_X,W), the
// channel polytope W1(E) and the worst-case-channel linear program that
// decides membership in the robust test-channel set V(E,D).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "uwz/lp.hpp"
#include "uwz/prob.hpp"

namespace uwz {

inline constexpr double kMembershipTol = 1e-9;
inline constexpr int kMaxFunctionAlphabet = 4096;

// All functions from Y to Xhat, indexed so that function u maps y to the
// y-th base-|Xhat| digit of u. The constant functions form Ubar.
struct FunctionAlphabet {
  Alphabet y_alphabet;
  Alphabet xhat_alphabet;
  std::vector<std::vector<int>> table;  // table[u][y] = u(y)
  std::vector<int> constant_subset;     // indices of Ubar, one per xhat

  FunctionAlphabet() = default;
  FunctionAlphabet(Alphabet y, Alphabet xhat)
      : y_alphabet(std::move(y)), xhat_alphabet(std::move(xhat)) {
    double count = std::pow(static_cast<double>(xhat_alphabet.size), y_alphabet.size);
    if (count > kMaxFunctionAlphabet)
      throw std::invalid_argument("FunctionAlphabet: |Xhat|^|Y| exceeds supported size");
    const int n = static_cast<int>(count + 0.5);
    table.resize(n, std::vector<int>(y_alphabet.size));
    for (int u = 0; u < n; ++u) {
      int rem = u;
      for (int yy = 0; yy < y_alphabet.size; ++yy) {
        table[u][yy] = rem % xhat_alphabet.size;
        rem /= xhat_alphabet.size;
      }
    }
    constant_subset.resize(xhat_alphabet.size, -1);
    for (int u = 0; u < n; ++u) {
      bool constant = true;
      for (int yy = 1; yy < y_alphabet.size; ++yy)
        if (table[u][yy] != table[u][0]) constant = false;
      if (constant) constant_subset[table[u][0]] = u;
    }
  }

  int size() const { return static_cast<int>(table.size()); }
  int apply(int u, int y) const { return table[u][y]; }
  bool is_constant(int u) const {
    for (int c : constant_subset)
      if (c == u) return true;
    return false;
  }
  Alphabet u_alphabet() const { return Alphabet(size(), "U"); }
};

// Nonnegative bounded per-letter distortion; every row has a zero entry so
// distortion 0 is always reachable.
struct DistortionMeasure {
  Alphabet row_alphabet;
  Alphabet col_alphabet;
  std::vector<double> matrix;  // row-major
  double max_value = 0.0;

  DistortionMeasure() = default;
  DistortionMeasure(Alphabet rows, Alphabet cols, std::vector<double> m)
      : row_alphabet(std::move(rows)), col_alphabet(std::move(cols)), matrix(std::move(m)) {
    if (matrix.size() != static_cast<std::size_t>(row_alphabet.size) * col_alphabet.size)
      throw std::invalid_argument("DistortionMeasure: shape mismatch");
    for (int x = 0; x < row_alphabet.size; ++x) {
      double row_min = HUGE_VAL;
      for (int y = 0; y < col_alphabet.size; ++y) {
        const double v = at(x, y);
        if (v < 0.0 || !std::isfinite(v))
          throw std::invalid_argument("DistortionMeasure: entries must be finite and >= 0");
        row_min = std::min(row_min, v);
        max_value = std::max(max_value, v);
      }
      if (row_min > 0.0)
        throw std::invalid_argument("DistortionMeasure: every row needs a zero entry");
    }
  }

  double at(int x, int y) const { return matrix[static_cast<std::size_t>(x) * col_alphabet.size + y]; }
  int zero_column(int x) const {
    for (int y = 0; y < col_alphabet.size; ++y)
      if (at(x, y) == 0.0) return y;
    return -1;
  }
};

inline DistortionMeasure hamming_measure(const Alphabet& a, const Alphabet& b) {
  if (a.size != b.size) throw std::invalid_argument("hamming_measure: needs equal sizes");
  std::vector<double> m(static_cast<std::size_t>(a.size) * b.size, 1.0);
  for (int x = 0; x < a.size; ++x) m[static_cast<std::size_t>(x) * b.size + x] = 0.0;
  return DistortionMeasure(a, b, std::move(m));
}

// Test channel V(u|x): a channel from X into the function alphabet.
using TestChannel = Channel;

// { W : e(P_X, W) <= E }, a polytope of channels X -> Y.
struct ChannelClassW1 {
  Distribution source;
  DistortionMeasure e;
  double budget = 0.0;  // E

  ChannelClassW1() = default;
  ChannelClassW1(Distribution px, DistortionMeasure em, double E)
      : source(std::move(px)), e(std::move(em)), budget(E) {
    if (E < 0.0) throw std::invalid_argument("ChannelClassW1: E must be >= 0");
    if (!(source.alphabet == e.row_alphabet))
      throw std::invalid_argument("ChannelClassW1: source/measure mismatch");
  }

  const Alphabet& x_alphabet() const { return source.alphabet; }
  const Alphabet& y_alphabet() const { return e.col_alphabet; }

  // the zero-distortion member built from e's zero entries
  Channel zero_distortion_member() const {
    const int nx = x_alphabet().size, ny = y_alphabet().size;
    std::vector<double> m(static_cast<std::size_t>(nx) * ny, 0.0);
    for (int x = 0; x < nx; ++x) m[static_cast<std::size_t>(x) * ny + e.zero_column(x)] = 1.0;
    return Channel(x_alphabet(), y_alphabet(), std::move(m));
  }
};

inline double side_distortion(const Distribution& px, const Channel& w,
                              const DistortionMeasure& e) {
  if (!(px.alphabet == w.input)) throw std::invalid_argument("side_distortion: alphabet mismatch");
  if (w.out_size() != e.col_alphabet.size || px.size() != e.row_alphabet.size)
    throw std::invalid_argument("side_distortion: measure mismatch");
  double s = 0.0;
  for (int x = 0; x < px.size(); ++x)
    for (int y = 0; y < w.out_size(); ++y) s += px(x) * w(y, x) * e.at(x, y);
  return s;
}

inline bool contains(const ChannelClassW1& cls, const Channel& w, double tol = kMembershipTol) {
  return side_distortion(cls.source, w, cls.e) <= cls.budget + tol;
}

// d(V,W) = sum_{u,x,y} P_X(x) V(u|x) W(y|x) d(x, u(y))
inline double reproduction_distortion(const TestChannel& v, const Channel& w,
                                      const Distribution& px, const DistortionMeasure& d,
                                      const FunctionAlphabet& fa) {
  if (!(px.alphabet == v.input) || !(px.alphabet == w.input))
    throw std::invalid_argument("reproduction_distortion: alphabet mismatch");
  if (v.out_size() != fa.size() || w.out_size() != fa.y_alphabet.size)
    throw std::invalid_argument("reproduction_distortion: function alphabet mismatch");
  double s = 0.0;
  for (int x = 0; x < px.size(); ++x) {
    if (px(x) <= 0.0) continue;
    for (int u = 0; u < fa.size(); ++u) {
      const double vu = v(u, x);
      if (vu <= 0.0) continue;
      double inner = 0.0;
      for (int y = 0; y < w.out_size(); ++y) inner += w(y, x) * d.at(x, fa.apply(u, y));
      s += px(x) * vu * inner;
    }
  }
  return s;
}

namespace detail {

// max <gain, W> over W1(E): one coupling constraint over a product of
// simplices. Solved parametrically: dual(t) = t E + sum_x max_y (gain - t
// cost) is piecewise linear convex; scan its breakpoints, then rebuild a
// primal with at most one fractional row. Falls back to the generic simplex
// when the duality check fails on a degenerate tie.
struct LinearOverW1 {
  double value = 0.0;
  Channel argmax;
};

inline LinearOverW1 max_linear_over_w1(const std::vector<double>& gain,
                                       const ChannelClassW1& cls) {
  const int nx = cls.x_alphabet().size, ny = cls.y_alphabet().size;
  const Distribution& px = cls.source;
  const double E = cls.budget;
  auto g = [&](int x, int y) { return gain[static_cast<std::size_t>(x) * ny + y]; };
  auto cost = [&](int x, int y) { return px(x) * cls.e.at(x, y); };

  std::vector<double> candidates{0.0};
  for (int x = 0; x < nx; ++x)
    for (int y1 = 0; y1 < ny; ++y1)
      for (int y2 = 0; y2 < ny; ++y2) {
        const double dc = cost(x, y1) - cost(x, y2);
        if (std::fabs(dc) < 1e-15) continue;
        const double t = (g(x, y1) - g(x, y2)) / dc;
        if (t > 0.0 && std::isfinite(t)) candidates.push_back(t);
      }

  auto dual = [&](double t) {
    double v = t * E;
    for (int x = 0; x < nx; ++x) {
      double best = -HUGE_VAL;
      for (int y = 0; y < ny; ++y) best = std::max(best, g(x, y) - t * cost(x, y));
      v += best;
    }
    return v;
  };

  double tstar = 0.0, dstar = dual(0.0);
  for (double t : candidates) {
    const double v = dual(t);
    if (v < dstar - 1e-13 || (v < dstar + 1e-13 && t < tstar)) {
      dstar = v;
      tstar = t;
    }
  }

  // primal construction at tstar
  std::vector<double> rows(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<int> lo(nx), hi(nx);
  double cost_now = 0.0;
  for (int x = 0; x < nx; ++x) {
    double best = -HUGE_VAL;
    for (int y = 0; y < ny; ++y) best = std::max(best, g(x, y) - tstar * cost(x, y));
    int lo_y = -1, hi_y = -1;
    for (int y = 0; y < ny; ++y) {
      if (g(x, y) - tstar * cost(x, y) < best - 1e-11) continue;
      if (lo_y < 0 || cost(x, y) < cost(x, lo_y)) lo_y = y;
      if (hi_y < 0 || cost(x, y) > cost(x, hi_y)) hi_y = y;
    }
    lo[x] = lo_y;
    hi[x] = hi_y;
    rows[static_cast<std::size_t>(x) * ny + lo_y] = 1.0;
    cost_now += cost(x, lo_y);
  }
  if (tstar > 0.0 && cost_now <= E) {
    // raise cost toward the budget; the Lagrangian is flat across S_x so
    // every unit of cost adds tstar to the objective
    for (int x = 0; x < nx && cost_now < E; ++x) {
      const double step = cost(x, hi[x]) - cost(x, lo[x]);
      if (step <= 0.0) continue;
      if (cost_now + step <= E) {
        rows[static_cast<std::size_t>(x) * ny + lo[x]] = 0.0;
        rows[static_cast<std::size_t>(x) * ny + hi[x]] = 1.0;
        cost_now += step;
      } else {
        const double frac = (E - cost_now) / step;
        rows[static_cast<std::size_t>(x) * ny + lo[x]] = 1.0 - frac;
        rows[static_cast<std::size_t>(x) * ny + hi[x]] = frac;
        cost_now = E;
      }
    }
  }

  bool ok = cost_now <= E + 1e-9;
  double obj = 0.0;
  if (ok) {
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) obj += g(x, y) * rows[static_cast<std::size_t>(x) * ny + y];
    // duality gap check; dstar - obj should be ~0 unless ties confused the
    // greedy construction
    if (dstar - obj > 1e-8 * (1.0 + std::fabs(dstar))) ok = false;
  }

  if (!ok) {
    // textbook simplex fallback
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<LpRel> rel;
    const int n = nx * ny;
    for (int x = 0; x < nx; ++x) {
      std::vector<double> row(n, 0.0);
      for (int y = 0; y < ny; ++y) row[static_cast<std::size_t>(x) * ny + y] = 1.0;
      A.push_back(std::move(row));
      b.push_back(1.0);
      rel.push_back(LpRel::EQ);
    }
    std::vector<double> coupling(n, 0.0);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) coupling[static_cast<std::size_t>(x) * ny + y] = cost(x, y);
    A.push_back(std::move(coupling));
    b.push_back(E);
    rel.push_back(LpRel::LE);
    LpResult r = solve_lp(gain, A, rel, b);
    if (r.status != LpResult::Status::Optimal)
      throw std::runtime_error("max_linear_over_w1: fallback LP failed");
    rows = r.x;
    obj = r.value;
  }

  return LinearOverW1{obj, Channel(cls.x_alphabet(), cls.y_alphabet(), std::move(rows))};
}

}  // namespace detail

// max over W in W1(E) of d(V,W); the optimizer is a vertex or a single
// fractional-edge point of the polytope.
struct WorstCase {
  double value = 0.0;
  Channel argmax;
};

inline WorstCase worst_case_distortion(const TestChannel& v, const ChannelClassW1& cls,
                                       const DistortionMeasure& d, const FunctionAlphabet& fa) {
  const int nx = cls.x_alphabet().size, ny = cls.y_alphabet().size;
  // gain(x,y) = P(x) sum_u V(u|x) d(x, u(y))
  std::vector<double> gain(static_cast<std::size_t>(nx) * ny, 0.0);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y) {
      double s = 0.0;
      for (int u = 0; u < fa.size(); ++u) {
        const double vu = v(u, x);
        if (vu > 0.0) s += vu * d.at(x, fa.apply(u, y));
      }
      gain[static_cast<std::size_t>(x) * ny + y] = cls.source(x) * s;
    }
  auto r = detail::max_linear_over_w1(gain, cls);
  return WorstCase{r.value, std::move(r.argmax)};
}

inline bool is_member_VED(const TestChannel& v, const ChannelClassW1& cls,
                          const DistortionMeasure& d, double D, const FunctionAlphabet& fa,
                          double tol = kMembershipTol) {
  if (D < 0.0) return false;
  return worst_case_distortion(v, cls, d, fa).value <= D + tol;
}

// All vertices of { row-stochastic W : e(P_X,W) <= E }: deterministic
// channels inside the budget plus points where exactly one row splits
// across two outputs with the budget tight.
inline std::vector<Channel> extreme_points_W1(const ChannelClassW1& cls) {
  const int nx = cls.x_alphabet().size, ny = cls.y_alphabet().size;
  if (nx * ny > 20)
    throw std::invalid_argument("extreme_points_W1: |X|*|Y| > 20 unsupported");
  const Distribution& px = cls.source;
  const double E = cls.budget;
  auto cost = [&](int x, int y) { return px(x) * cls.e.at(x, y); };

  std::vector<Channel> out;
  std::map<std::vector<int64_t>, bool> seen;
  auto push = [&](std::vector<double> rows) {
    std::vector<int64_t> key(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      key[i] = static_cast<int64_t>(std::llround(rows[i] * 1e10));
    if (seen.emplace(std::move(key), true).second)
      out.emplace_back(cls.x_alphabet(), cls.y_alphabet(), std::move(rows));
  };

  // deterministic channels
  std::vector<int> pick(nx, 0);
  while (true) {
    double c = 0.0;
    for (int x = 0; x < nx; ++x) c += cost(x, pick[x]);
    if (c <= E + 1e-12) {
      std::vector<double> rows(static_cast<std::size_t>(nx) * ny, 0.0);
      for (int x = 0; x < nx; ++x) rows[static_cast<std::size_t>(x) * ny + pick[x]] = 1.0;
      push(std::move(rows));
    }
    int pos = nx - 1;
    while (pos >= 0 && pick[pos] == ny - 1) pick[pos--] = 0;
    if (pos < 0) break;
    pick[pos]++;
  }

  // one fractional row with the coupling constraint active
  for (int xf = 0; xf < nx; ++xf) {
    for (int y1 = 0; y1 < ny; ++y1)
      for (int y2 = y1 + 1; y2 < ny; ++y2) {
        const double c1 = cost(xf, y1), c2 = cost(xf, y2);
        if (std::fabs(c1 - c2) < 1e-15) continue;
        // enumerate deterministic assignments of the remaining rows
        std::vector<int> other(nx, 0);
        while (true) {
          double crest = 0.0;
          for (int x = 0; x < nx; ++x)
            if (x != xf) crest += cost(x, other[x]);
          const double t = (E - crest - c2) / (c1 - c2);
          if (t > 1e-12 && t < 1.0 - 1e-12) {
            std::vector<double> rows(static_cast<std::size_t>(nx) * ny, 0.0);
            for (int x = 0; x < nx; ++x)
              if (x != xf) rows[static_cast<std::size_t>(x) * ny + other[x]] = 1.0;
            rows[static_cast<std::size_t>(xf) * ny + y1] = t;
            rows[static_cast<std::size_t>(xf) * ny + y2] = 1.0 - t;
            push(std::move(rows));
          }
          int pos = nx - 1;
          while (pos >= 0 && (pos == xf || other[pos] == ny - 1)) {
            if (pos != xf) other[pos] = 0;
            --pos;
          }
          if (pos < 0) break;
          other[pos]++;
        }
      }
  }
  return out;
}

}  // namespace uwz
