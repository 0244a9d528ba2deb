#pragma once

// Solver internals shared by the rate-distortion operations: alternating
// multiplicative updates for the two inner objectives (the conditional
// rate functional phi and plain mutual information), multiplier search for
// the distortion constraints, the cutting-plane engine over the robust set
// V(E,D), and the concave maximizations over the channel polytope W1(E).
//
// Everything is deterministic given the caller's seed. Values are bits.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "uwz/geometry.hpp"
#include "uwz/lp.hpp"
#include "uwz/prob.hpp"

namespace uwz {

struct SolverSettings {
  double tolerance = 1e-6;
  int max_iterations = 4000;          // per inner solve
  std::vector<double> lagrange_grid;  // optional multiplier hints for sweeps
  int multistart_count = 16;
  uint64_t rng_seed = 0x1d2c3b4a5ull;
};

namespace detail {

constexpr double kZeroD = 1e-12;
constexpr double kNegInf = -1e30;

struct Mat {
  int r = 0, c = 0;
  std::vector<double> a;
  Mat() = default;
  Mat(int rr, int cc, double fill = 0.0) : r(rr), c(cc), a(static_cast<std::size_t>(rr) * cc, fill) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * c + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * c + j]; }
};

enum class Objective { PhiGivenW, MutualInformation };

// One linear distortion constraint sum_x px(x) sum_u V(u|x) coef(x,u) <= bound.
struct Constraint {
  Mat coef;  // (x,u)
  double bound = 0.0;
};

// Immutable data for one inner solve.
struct InnerProblem {
  Objective objective = Objective::MutualInformation;
  const Distribution* px = nullptr;
  Mat w;  // (x,y) rows of the conditioning channel; unused for MI
  int nu = 0;
  std::vector<Constraint> constraints;
  std::vector<uint8_t> allowed;  // (x,u) support mask, empty = all allowed

  int nx() const { return px->size(); }
  int ny() const { return w.r > 0 ? w.c : 0; }
  bool is_allowed(int x, int u) const {
    return allowed.empty() || allowed[static_cast<std::size_t>(x) * nu + u] != 0;
  }
};

inline Mat uniform_v(const InnerProblem& ip) {
  Mat v(ip.nx(), ip.nu, 0.0);
  for (int x = 0; x < ip.nx(); ++x) {
    int cnt = 0;
    for (int u = 0; u < ip.nu; ++u)
      if (ip.is_allowed(x, u)) ++cnt;
    if (cnt == 0) throw std::runtime_error("inner: empty support row");
    for (int u = 0; u < ip.nu; ++u)
      if (ip.is_allowed(x, u)) v.at(x, u) = 1.0 / cnt;
  }
  return v;
}

inline double constraint_value(const InnerProblem& ip, const Mat& v, const Constraint& con) {
  double s = 0.0;
  for (int x = 0; x < ip.nx(); ++x) {
    const double p = (*ip.px)(x);
    if (p <= 0.0) continue;
    for (int u = 0; u < ip.nu; ++u) s += p * v.at(x, u) * con.coef.at(x, u);
  }
  return s;
}

// objective value in bits at V
inline double objective_value(const InnerProblem& ip, const Mat& v) {
  const int nx = ip.nx(), nu = ip.nu;
  const Distribution& px = *ip.px;
  if (ip.objective == Objective::MutualInformation) {
    std::vector<double> q(nu, 0.0);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) q[u] += px(x) * v.at(x, u);
    double mi = 0.0;
    for (int x = 0; x < nx; ++x) {
      if (px(x) <= 0.0) continue;
      for (int u = 0; u < nu; ++u) {
        const double vv = v.at(x, u);
        if (vv > 0.0 && q[u] > 0.0) mi += px(x) * vv * std::log2(vv / q[u]);
      }
    }
    return mi < 0.0 ? 0.0 : mi;
  }
  // phi = H(U|Y) - H(U|X) for the Markov joint px * V * W
  const int ny = ip.ny();
  std::vector<double> joint(static_cast<std::size_t>(nu) * ny, 0.0);
  std::vector<double> py(ny, 0.0);
  double hux = 0.0;
  for (int x = 0; x < nx; ++x) {
    const double p = px(x);
    if (p <= 0.0) continue;
    for (int u = 0; u < nu; ++u) {
      const double vv = v.at(x, u);
      if (vv <= 0.0) continue;
      hux -= p * xlog2x(vv);
      for (int y = 0; y < ny; ++y) joint[static_cast<std::size_t>(u) * ny + y] += p * vv * ip.w.at(x, y);
    }
  }
  for (int y = 0; y < ny; ++y)
    for (int u = 0; u < nu; ++u) py[y] += joint[static_cast<std::size_t>(u) * ny + y];
  double huy = 0.0;
  for (int u = 0; u < nu; ++u)
    for (int y = 0; y < ny; ++y) {
      const double j = joint[static_cast<std::size_t>(u) * ny + y];
      if (j > 0.0 && py[y] > 0.0) huy -= j * std::log2(j / py[y]);
    }
  const double val = huy - hux;
  return val < 0.0 ? 0.0 : val;
}

inline Mat mix(const Mat& a, const Mat& b, double wa) {
  Mat r(a.r, a.c);
  for (std::size_t i = 0; i < a.a.size(); ++i) r.a[i] = wa * a.a[i] + (1.0 - wa) * b.a[i];
  return r;
}

// gradient of the objective in V up to per-row constants, which cancel over
// the row simplex and under the full-row LP constraints
inline Mat objective_gradient(const InnerProblem& ip, const Mat& v) {
  const int nx = ip.nx(), nu = ip.nu;
  const Distribution& px = *ip.px;
  Mat g(nx, nu, 0.0);
  if (ip.objective == Objective::MutualInformation) {
    std::vector<double> q(nu, 0.0);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) q[u] += px(x) * v.at(x, u);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u)
        g.at(x, u) = px(x) * (std::log2(std::max(v.at(x, u), 1e-300)) -
                              std::log2(std::max(q[u], 1e-300)));
  } else {
    const int ny = ip.ny();
    std::vector<double> joint(static_cast<std::size_t>(nu) * ny, 0.0);
    std::vector<double> py(ny, 0.0);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) {
        const double pv = px(x) * v.at(x, u);
        if (pv <= 0.0) continue;
        for (int y = 0; y < ny; ++y) joint[static_cast<std::size_t>(u) * ny + y] += pv * ip.w.at(x, y);
      }
    for (int u = 0; u < nu; ++u)
      for (int y = 0; y < ny; ++y) py[y] += joint[static_cast<std::size_t>(u) * ny + y];
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) {
        double s = std::log2(std::max(v.at(x, u), 1e-300));
        for (int y = 0; y < ny; ++y) {
          const double wxy = ip.w.at(x, y);
          if (wxy <= 0.0) continue;
          const double q = py[y] > 0.0 ? joint[static_cast<std::size_t>(u) * ny + y] / py[y] : 1.0 / nu;
          s -= wxy * std::log2(std::max(q, 1e-300));
        }
        g.at(x, u) = px(x) * s;
      }
  }
  if (!ip.allowed.empty())
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u)
        if (!ip.is_allowed(x, u)) g.at(x, u) = 1e6;  // LP must avoid masked entries
  return g;
}

struct BaOutcome {
  double value = 0.0;        // objective at the final V
  double lagrangian = 0.0;   // value + sum_j s_j * d_j
  double cert_lower = 0.0;   // valid lower bound on min_V L(V, s)
  std::vector<double> dvals;
  int iterations = 0;
};

// Alternating minimization of obj(V) + sum_j s_j d_j(V) with the output
// distribution held between half-steps. The certificate comes from one
// linearization step of the convex function min_V F(V, q) in q.
inline BaOutcome ba_solve(const InnerProblem& ip, const std::vector<double>& s, Mat& v,
                          int max_iter, double eps) {
  const int nx = ip.nx(), nu = ip.nu, ny = ip.ny();
  const Distribution& px = *ip.px;
  const int m = static_cast<int>(ip.constraints.size());

  // per-row penalty exponents are shared across iterations
  Mat penalty(nx, nu, 0.0);
  for (int j = 0; j < m; ++j)
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) penalty.at(x, u) += s[j] * ip.constraints[j].coef.at(x, u);

  std::vector<double> qy;              // MI: q(u); phi: q(u|y) row-major u*ny+y
  std::vector<double> zrow(nu, 0.0);   // scratch
  double cert = kNegInf;
  int it = 0;

  auto run_updates = [&](int budget) {
  double delta = 1.0;
  for (int used = 0; used < budget && delta > eps; ++used, ++it) {
    // q step (exact minimizer given V)
    if (ip.objective == Objective::MutualInformation) {
      qy.assign(nu, 0.0);
      for (int x = 0; x < nx; ++x)
        for (int u = 0; u < nu; ++u) qy[u] += px(x) * v.at(x, u);
    } else {
      qy.assign(static_cast<std::size_t>(nu) * ny, 0.0);
      std::vector<double> py(ny, 0.0);
      for (int x = 0; x < nx; ++x) {
        if (px(x) <= 0.0) continue;
        for (int u = 0; u < nu; ++u) {
          const double pv = px(x) * v.at(x, u);
          if (pv <= 0.0) continue;
          for (int y = 0; y < ny; ++y) qy[static_cast<std::size_t>(u) * ny + y] += pv * ip.w.at(x, y);
        }
      }
      for (int u = 0; u < nu; ++u)
        for (int y = 0; y < ny; ++y) py[y] += qy[static_cast<std::size_t>(u) * ny + y];
      for (int u = 0; u < nu; ++u)
        for (int y = 0; y < ny; ++y) {
          auto& q = qy[static_cast<std::size_t>(u) * ny + y];
          q = py[y] > 0.0 ? q / py[y] : (ip.is_allowed(0, u) ? 1.0 / nu : 0.0);
        }
    }

    // V step (exact minimizer given q), plus the dual certificate pieces
    delta = 0.0;
    double gq = 0.0;  // sum_x px * (-log2 Z_x)
    for (int x = 0; x < nx; ++x) {
      if (px(x) <= 0.0) {
        for (int u = 0; u < nu; ++u) v.at(x, u) = ip.is_allowed(x, u) ? 1.0 / nu : 0.0;
        continue;
      }
      double zmax = kNegInf;
      for (int u = 0; u < nu; ++u) {
        if (!ip.is_allowed(x, u)) {
          zrow[u] = kNegInf;
          continue;
        }
        double beta = -penalty.at(x, u);
        if (ip.objective == Objective::MutualInformation) {
          beta += qy[u] > 0.0 ? std::log2(qy[u]) : kNegInf;
        } else {
          for (int y = 0; y < ny; ++y) {
            const double wxy = ip.w.at(x, y);
            if (wxy <= 0.0) continue;
            const double q = qy[static_cast<std::size_t>(u) * ny + y];
            beta += q > 0.0 ? wxy * std::log2(q) : kNegInf;
          }
        }
        zrow[u] = beta;
        zmax = std::max(zmax, beta);
      }
      if (zmax <= kNegInf / 2) throw std::runtime_error("inner: row lost all support");
      double z = 0.0;
      for (int u = 0; u < nu; ++u)
        if (zrow[u] > kNegInf / 2) z += std::exp2(zrow[u] - zmax);
      gq += px(x) * -(std::log2(z) + zmax);
      // tiny floor on allowed entries so no symbol is absorbed at zero
      // between multiplier updates; far below every reported precision
      double rowsum = 0.0;
      for (int u = 0; u < nu; ++u) {
        double nv = zrow[u] > kNegInf / 2 ? std::exp2(zrow[u] - zmax) / z : 0.0;
        if (ip.is_allowed(x, u) && nv < 1e-100) nv = 1e-100;
        zrow[u] = nv;
        rowsum += nv;
      }
      for (int u = 0; u < nu; ++u) {
        const double nv = zrow[u] / rowsum;
        delta = std::max(delta, std::fabs(nv - v.at(x, u)));
        v.at(x, u) = nv;
      }
    }

    // linearized lower bound on min_q min_V F: gq + min over the q simplex
    // of the gradient drop; amortized, the bound only sharpens near the end
    if (used % 8 == 7 || delta <= eps) {
      double corr = 0.0;
      if (ip.objective == Objective::MutualInformation) {
        double worst = 0.0;
        std::vector<double> qplus(nu, 0.0);
        for (int x = 0; x < nx; ++x)
          for (int u = 0; u < nu; ++u) qplus[u] += px(x) * v.at(x, u);
        for (int u = 0; u < nu; ++u)
          if (qplus[u] > 0.0) worst = std::max(worst, qy[u] > 0.0 ? qplus[u] / qy[u] : HUGE_VAL);
        corr = worst > 0.0 && std::isfinite(worst) ? (1.0 - worst) / std::log(2.0) : kNegInf;
        corr = std::min(corr, 0.0);
      } else {
        std::vector<double> jplus(static_cast<std::size_t>(nu) * ny, 0.0);
        for (int x = 0; x < nx; ++x) {
          if (px(x) <= 0.0) continue;
          for (int u = 0; u < nu; ++u) {
            const double pv = px(x) * v.at(x, u);
            if (pv <= 0.0) continue;
            for (int y = 0; y < ny; ++y)
              jplus[static_cast<std::size_t>(u) * ny + y] += pv * ip.w.at(x, y);
          }
        }
        corr = 1.0 / std::log(2.0);
        for (int y = 0; y < ny; ++y) {
          double worst = 0.0;
          bool dead = false;
          for (int u = 0; u < nu; ++u) {
            const double jp = jplus[static_cast<std::size_t>(u) * ny + y];
            if (jp <= 0.0) continue;
            const double q = qy[static_cast<std::size_t>(u) * ny + y];
            if (q <= 0.0) {
              dead = true;
              break;
            }
            worst = std::max(worst, jp / q);
          }
          if (dead) {
            corr = kNegInf;
            break;
          }
          corr -= worst / std::log(2.0);
        }
      }
      if (corr > kNegInf / 2) cert = std::max(cert, gq + corr);
    }
  }
  };  // run_updates

  auto penalized_value = [&](const Mat& vv) {
    double L = objective_value(ip, vv);
    for (int j = 0; j < m; ++j) L += s[j] * constraint_value(ip, vv, ip.constraints[j]);
    return L;
  };

  // Conditional-gradient pass on the convex Lagrangian. The alternating
  // updates can settle at a partial optimum of the biconvex surrogate; the
  // linear subproblem here is a per-row argmin, so escaping costs little,
  // and the linearization gap certifies global optimality of min_V L.
  auto polish = [&](int rounds) {
    double gap = HUGE_VAL;
    double fv = penalized_value(v);
    for (int r = 0; r < rounds; ++r) {
      Mat g = objective_gradient(ip, v);
      for (int j = 0; j < m; ++j)
        if (s[j] != 0.0)
          for (int x = 0; x < nx; ++x)
            for (int u = 0; u < nu; ++u)
              g.at(x, u) += px(x) * s[j] * ip.constraints[j].coef.at(x, u);
      Mat dir(nx, nu, 0.0);
      double inner = 0.0;
      for (int x = 0; x < nx; ++x) {
        int umin = -1;
        for (int u = 0; u < nu; ++u) {
          if (!ip.is_allowed(x, u)) continue;
          if (umin < 0 || g.at(x, u) < g.at(x, umin)) umin = u;
        }
        dir.at(x, umin) = 1.0;
        for (int u = 0; u < nu; ++u) inner += g.at(x, u) * v.at(x, u);
        inner -= g.at(x, umin);
      }
      gap = std::max(inner, 0.0);
      if (gap <= std::max(1e-13, 0.1 * eps)) break;
      const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
      double lo = 0.0, hi = 1.0;
      double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
      double fa = penalized_value(mix(dir, v, a)), fb = penalized_value(mix(dir, v, b));
      for (int k = 0; k < 46; ++k) {
        if (fa < fb) {
          hi = b;
          b = a;
          fb = fa;
          a = hi - gr * (hi - lo);
          fa = penalized_value(mix(dir, v, a));
        } else {
          lo = a;
          a = b;
          fa = fb;
          b = lo + gr * (hi - lo);
          fb = penalized_value(mix(dir, v, b));
        }
      }
      Mat cand = mix(dir, v, 0.5 * (lo + hi));
      const double fc = penalized_value(cand);
      if (fc >= fv - 1e-15) break;
      v = cand;
      fv = fc;
    }
    return gap;
  };

  run_updates(max_iter);
  const int polish_rounds = eps <= 2e-11 ? 90 : 30;
  double fw_gap = polish(polish_rounds);
  for (int cycle = 0; cycle < 3 && fw_gap > std::max(1e-12, eps); ++cycle) {
    run_updates(std::min(max_iter, 800));
    fw_gap = polish(polish_rounds);
  }
  cert = std::max(cert, penalized_value(v) - fw_gap);

  BaOutcome out;
  out.iterations = it;
  out.value = objective_value(ip, v);
  out.dvals.resize(m);
  out.lagrangian = out.value;
  for (int j = 0; j < m; ++j) {
    out.dvals[j] = constraint_value(ip, v, ip.constraints[j]);
    out.lagrangian += s[j] * out.dvals[j];
  }
  out.cert_lower = cert;
  return out;
}

struct InnerResult {
  Mat v;
  double value = 0.0;          // objective at the reported (feasible) V
  double dual_lower = 0.0;     // lower bound on the constrained optimum
  std::vector<double> dvals;
  std::vector<double> multipliers;
  bool feasible = true;
};

// Conditional-gradient polish over the cut polytope; returns the final
// linearization gap, a valid bound on the remaining suboptimality.
inline double primal_polish(const InnerProblem& ip, Mat& v, int rounds) {
  const int nx = ip.nx(), nu = ip.nu;
  const int m = static_cast<int>(ip.constraints.size());
  const int n = nx * nu;
  double gap = HUGE_VAL;
  double fv = objective_value(ip, v);
  for (int r = 0; r < rounds; ++r) {
    Mat g = objective_gradient(ip, v);
    std::vector<double> c(n);
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) c[static_cast<std::size_t>(x) * nu + u] = -g.at(x, u);
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<LpRel> rel;
    for (int x = 0; x < nx; ++x) {
      std::vector<double> row(n, 0.0);
      for (int u = 0; u < nu; ++u) row[static_cast<std::size_t>(x) * nu + u] = 1.0;
      A.push_back(std::move(row));
      b.push_back(1.0);
      rel.push_back(LpRel::EQ);
    }
    for (int j = 0; j < m; ++j) {
      std::vector<double> row(n, 0.0);
      for (int x = 0; x < nx; ++x)
        for (int u = 0; u < nu; ++u)
          row[static_cast<std::size_t>(x) * nu + u] = (*ip.px)(x) * ip.constraints[j].coef.at(x, u);
      A.push_back(std::move(row));
      b.push_back(ip.constraints[j].bound);
      rel.push_back(LpRel::LE);
    }
    LpResult lp = solve_lp(c, A, rel, b);
    if (lp.status != LpResult::Status::Optimal) break;
    Mat s(nx, nu);
    double inner = 0.0;
    for (int x = 0; x < nx; ++x)
      for (int u = 0; u < nu; ++u) {
        s.at(x, u) = lp.x[static_cast<std::size_t>(x) * nu + u];
        inner += g.at(x, u) * (v.at(x, u) - s.at(x, u));
      }
    gap = inner;  // f(v) - f* <= <grad, v - S>
    if (gap <= 1e-12) break;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0;
    auto value_at = [&](double th) { return objective_value(ip, mix(s, v, th)); };
    double a = hi - gr * (hi - lo), bq = lo + gr * (hi - lo);
    double fa = value_at(a), fb = value_at(bq);
    for (int k = 0; k < 50; ++k) {
      if (fa < fb) {
        hi = bq;
        bq = a;
        fb = fa;
        a = hi - gr * (hi - lo);
        fa = value_at(a);
      } else {
        lo = a;
        a = bq;
        fa = fb;
        bq = lo + gr * (hi - lo);
        fb = value_at(bq);
      }
    }
    const double th = 0.5 * (lo + hi);
    Mat cand = mix(s, v, th);
    const double fc = objective_value(ip, cand);
    if (fc >= fv - 1e-14) break;
    v = cand;
    fv = fc;
  }
  return std::max(gap, 0.0);
}

// Strictly feasible reference point: every row on a zero-cost symbol.
// Exists whenever each constraint coefficient row has a zero column, which
// the distortion-measure invariants guarantee for distortion constraints.
inline std::optional<Mat> zero_cost_v(const InnerProblem& ip) {
  Mat v0(ip.nx(), ip.nu, 0.0);
  for (int x = 0; x < ip.nx(); ++x) {
    int pick = -1;
    for (int u = 0; u < ip.nu && pick < 0; ++u) {
      if (!ip.is_allowed(x, u)) continue;
      bool zero = true;
      for (const auto& con : ip.constraints)
        if (con.coef.at(x, u) > kZeroD) zero = false;
      if (zero) pick = u;
    }
    if (pick < 0) return std::nullopt;
    v0.at(x, pick) = 1.0;
  }
  return v0;
}

// Pull V back into the feasible region by mixing toward the zero-cost
// point; constraints are linear so the blend factor is explicit.
inline void repair_feasibility(const InnerProblem& ip, const Mat& v0, Mat& v,
                               std::vector<double>& dvals) {
  double lam = 0.0;
  for (std::size_t j = 0; j < ip.constraints.size(); ++j) {
    const double d = dvals[j], b = ip.constraints[j].bound;
    if (d > b && d > 0.0) lam = std::max(lam, 1.0 - b / d);
  }
  if (lam <= 0.0) return;
  lam = std::min(1.0, lam + 1e-15);
  v = mix(v0, v, lam);
  for (std::size_t j = 0; j < ip.constraints.size(); ++j)
    dvals[j] = constraint_value(ip, v, ip.constraints[j]);
}

// min objective subject to the constraints. Dispatches on the number of
// constraints: plain descent, single-multiplier bisection, or a Kelley
// bundle on the concave dual for several coupled constraints.
inline InnerResult constrained_min(const InnerProblem& ip_in, const SolverSettings& st,
                                   const Mat* warm = nullptr) {
  InnerProblem ip = ip_in;

  // Constraints with a zero bound force support restriction; they cannot be
  // priced by a finite multiplier.
  const int nu = ip.nu;
  bool any_zero = false;
  for (const auto& con : ip.constraints)
    if (con.bound <= kZeroD) any_zero = true;
  if (any_zero) {
    std::vector<uint8_t> allowed(static_cast<std::size_t>(ip.nx()) * nu, 1);
    if (!ip.allowed.empty()) allowed = ip.allowed;
    for (int x = 0; x < ip.nx(); ++x)
      for (int u = 0; u < nu; ++u)
        for (const auto& con : ip.constraints)
          if (con.bound <= kZeroD && con.coef.at(x, u) > kZeroD)
            allowed[static_cast<std::size_t>(x) * nu + u] = 0;
    std::vector<Constraint> rest;
    for (auto& con : ip.constraints)
      if (con.bound > kZeroD) rest.push_back(con);
    ip.allowed = std::move(allowed);
    ip.constraints = std::move(rest);
    for (int x = 0; x < ip.nx(); ++x) {
      bool any = false;
      for (int u = 0; u < nu; ++u) any = any || ip.is_allowed(x, u);
      if (!any) {
        InnerResult bad;
        bad.feasible = false;
        return bad;
      }
    }
  }

  const int m = static_cast<int>(ip.constraints.size());
  const double tol = st.tolerance;
  const int iters = st.max_iterations;
  const bool fast = tol > 1e-5;
  const double inner_eps = std::clamp(tol * 1e-5, 1e-12, 1e-9);
  const double gap_trigger = std::max(1e-6, 0.5 * tol);

  Mat v = warm && warm->r == ip.nx() && warm->c == nu ? *warm : uniform_v(ip);
  // warm starts must respect the mask
  if (!ip.allowed.empty()) {
    for (int x = 0; x < ip.nx(); ++x) {
      double s = 0.0;
      for (int u = 0; u < nu; ++u) {
        if (!ip.is_allowed(x, u)) v.at(x, u) = 0.0;
        s += v.at(x, u);
      }
      if (s <= 1e-9) {
        v = uniform_v(ip);
        break;
      }
      for (int u = 0; u < nu; ++u) v.at(x, u) /= s;
    }
  }

  auto v0opt = zero_cost_v(ip);

  // one Lagrangian solve with its own optimality check: warm starts from a
  // different basin of the biconvex surrogate can stall, so a solve whose
  // certificate gap stays open is retried from the uniform point
  auto solve_at = [&](const std::vector<double>& sv, Mat& vio) {
    auto out = ba_solve(ip, sv, vio, iters, inner_eps);
    if (out.lagrangian - out.cert_lower > gap_trigger) {
      Mat v2 = uniform_v(ip);
      auto out2 = ba_solve(ip, sv, v2, iters, inner_eps);
      if (out2.lagrangian < out.lagrangian) {
        vio = v2;
        out = out2;
      }
    }
    return out;
  };

  InnerResult res;
  res.multipliers.assign(m, 0.0);

  if (m == 0) {
    auto out = solve_at({}, v);
    res.v = v;
    res.value = out.value;
    res.dual_lower = std::max(out.cert_lower, 0.0);
    return res;
  }

  if (m == 1) {
    const double bound = ip.constraints[0].bound;
    auto out0 = solve_at({0.0}, v);
    if (out0.dvals[0] <= bound + kZeroD) {
      res.v = v;
      res.value = out0.value;
      res.dvals = out0.dvals;
      res.dual_lower = std::max(out0.cert_lower, 0.0);
      return res;
    }
    double s_lo = 0.0, s_hi = 1.0;
    Mat v_hi = v;
    double d_hi;
    for (;;) {
      auto out = solve_at({s_hi}, v_hi);
      d_hi = out.dvals[0];
      if (d_hi <= bound || s_hi > 1e8) break;
      s_lo = s_hi;
      s_hi *= 4.0;
    }
    if (d_hi > bound + 1e-9) {
      // cannot push below the bound: infeasible target
      res.feasible = false;
      return res;
    }
    Mat v_lo = v;
    double d_lo = out0.dvals[0], f_lo = out0.value, f_hi = objective_value(ip, v_hi);
    double best_cert = 0.0;
    for (int itb = 0; itb < 80 && s_hi - s_lo > 1e-13 * (1.0 + s_hi); ++itb) {
      const double s_mid = 0.5 * (s_lo + s_hi);
      Mat v_mid = mix(v_lo, v_hi, 0.5);
      auto out = solve_at({s_mid}, v_mid);
      best_cert = std::max(best_cert, out.cert_lower - s_mid * bound);
      if (out.dvals[0] > bound) {
        s_lo = s_mid;
        v_lo = v_mid;
        d_lo = out.dvals[0];
        f_lo = out.value;
      } else {
        s_hi = s_mid;
        v_hi = v_mid;
        d_hi = out.dvals[0];
        f_hi = out.value;
      }
    }
    // exact time-sharing mix onto the boundary
    Mat v_star = v_hi;
    double f_star = f_hi;
    std::vector<double> dv{d_hi};
    if (d_lo > d_hi + 1e-15) {
      const double lam = (bound - d_hi) / (d_lo - d_hi);
      Mat v_mix = mix(v_lo, v_hi, lam);
      const double f_mix = objective_value(ip, v_mix);
      const double d_mix = constraint_value(ip, v_mix, ip.constraints[0]);
      if (d_mix <= bound + 1e-12 && f_mix < f_star) {
        v_star = v_mix;
        f_star = f_mix;
        dv[0] = d_mix;
      }
    }
    res.v = v_star;
    res.value = f_star;
    res.dvals = dv;
    res.multipliers = {0.5 * (s_lo + s_hi)};
    res.dual_lower = std::max(0.0, best_cert);
    return res;
  }

  // m >= 2: Kelley bundle on the concave dual g(s) = min_V L(V,s) - s.b,
  // then a column-generation style primal recovery: the optimum may live on
  // a flat face of the Lagrangian, so it is rebuilt as the best feasible
  // mixture of all evaluated pure iterates.
  std::vector<double> cap(m);
  for (int j = 0; j < m; ++j)
    cap[j] = std::max(16.0, 8.0 * std::log2(static_cast<double>(std::max(2, ip.nx()))) /
                                std::max(ip.constraints[j].bound, 1e-3));
  struct Cut {
    double g;
    std::vector<double> sub;
    std::vector<double> s;
  };
  struct Column {
    Mat v;
    double f;
    std::vector<double> d;
  };
  std::vector<Cut> bundle;
  std::vector<Column> columns;
  std::vector<double> s(m, 0.0);
  double best_cert = 0.0;  // rates are nonnegative, so 0 is always valid

  // cuts carry the primal Lagrangian value (an upper estimate, which keeps
  // the Kelley model an over-estimator); certified lower bounds are tracked
  // separately
  auto evaluate = [&](const std::vector<double>& sv) {
    auto out = solve_at(sv, v);
    double g_model = out.lagrangian;
    double g_cert = out.cert_lower;
    std::vector<double> sub(m);
    for (int j = 0; j < m; ++j) {
      g_model -= sv[j] * ip.constraints[j].bound;
      g_cert -= sv[j] * ip.constraints[j].bound;
      sub[j] = out.dvals[j] - ip.constraints[j].bound;
    }
    if (g_cert > kNegInf / 4) best_cert = std::max(best_cert, g_cert);
    bundle.push_back(Cut{g_model, sub, sv});
    columns.push_back(Column{v, out.value, out.dvals});
    return g_model;
  };

  evaluate(s);
  std::vector<double> s_best = s;
  double g_best_here = bundle.back().g;

  // trust-region stabilized cutting planes: plain Kelley zigzags across the
  // multiplier box and stalls on kinked duals
  const double tol_dual = std::max(1e-11, 0.005 * tol);
  double radius = 1.0;
  const int max_master = 160;
  for (int round = 0; round < max_master; ++round) {
    const double B = 64.0;
    std::vector<double> lo(m), hi(m);
    for (int j = 0; j < m; ++j) {
      lo[j] = std::max(0.0, s_best[j] - radius);
      hi[j] = std::min(cap[j], s_best[j] + radius);
    }
    // master vars: (t + B, z_j = s_j - lo_j); maximize t
    std::vector<double> c(1 + m, 0.0);
    c[0] = 1.0;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<LpRel> rel;
    for (const auto& cut : bundle) {
      std::vector<double> row(1 + m, 0.0);
      row[0] = 1.0;
      double rhs = cut.g + B;
      for (int j = 0; j < m; ++j) {
        row[1 + j] = -cut.sub[j];
        rhs += cut.sub[j] * (lo[j] - cut.s[j]);
      }
      A.push_back(std::move(row));
      b.push_back(rhs);
      rel.push_back(LpRel::LE);
    }
    for (int j = 0; j < m; ++j) {
      std::vector<double> row(1 + m, 0.0);
      row[1 + j] = 1.0;
      A.push_back(std::move(row));
      b.push_back(hi[j] - lo[j]);
      rel.push_back(LpRel::LE);
    }
    LpResult lp = solve_lp(c, A, rel, b);
    if (lp.status != LpResult::Status::Optimal) break;
    const double model = lp.value - B;
    std::vector<double> snew(m);
    bool on_edge = false;
    for (int j = 0; j < m; ++j) {
      snew[j] = lo[j] + lp.x[1 + j];
      if (hi[j] < cap[j] - 1e-12 &&
          (lp.x[1 + j] < 1e-9 || lp.x[1 + j] > hi[j] - lo[j] - 1e-9))
        on_edge = s_best[j] > 0.0 || lp.x[1 + j] > 1e-9 ? true : on_edge;
    }
    if (model - g_best_here <= tol_dual) {
      if (!on_edge || radius >= 8.0 * (1.0 + g_best_here)) break;
      radius *= 2.0;
      continue;
    }
    const double gnew = evaluate(snew);
    if (gnew >= g_best_here + 0.05 * (model - g_best_here)) {
      s_best = snew;
      g_best_here = gnew;
      radius = std::min(radius * 1.6, 64.0);
    } else {
      radius = std::max(radius * 0.55, 1e-5);
    }
  }

  // harvest the endpoints of flat dual directions around the best point:
  // the optimum often time-shares across minimizers that only appear just
  // off the kink
  for (int j = 0; j < m; ++j) {
    for (double scale : {0.9999, 1.0001, 0.999, 1.001, 0.99, 1.01}) {
      std::vector<double> sp = s_best;
      sp[j] = sp[j] * scale + (sp[j] == 0.0 ? (scale - 1.0) : 0.0);
      if (sp[j] < 0.0) sp[j] = 0.0;
      evaluate(sp);
    }
  }
  for (double scale : {0.9999, 1.0001, 0.999, 1.001, 0.99, 1.01}) {
    std::vector<double> sp = s_best;
    for (int j = 0; j < m; ++j) sp[j] *= scale;
    evaluate(sp);
  }
  if (v0opt) {
    Column c0;
    c0.v = *v0opt;
    c0.f = objective_value(ip, c0.v);
    c0.d.assign(m, 0.0);
    for (int j = 0; j < m; ++j) c0.d[j] = constraint_value(ip, c0.v, ip.constraints[j]);
    columns.push_back(std::move(c0));
  }

  // best feasible mixture of the columns: linear in the weights since the
  // constraints are linear and the objective is convex
  const int K = static_cast<int>(columns.size());
  std::vector<double> cobj(K);
  for (int k = 0; k < K; ++k) cobj[k] = -columns[k].f;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<LpRel> rel;
  for (int j = 0; j < m; ++j) {
    std::vector<double> row(K);
    for (int k = 0; k < K; ++k) row[k] = columns[k].d[j];
    A.push_back(std::move(row));
    b.push_back(ip.constraints[j].bound);
    rel.push_back(LpRel::LE);
  }
  A.emplace_back(K, 1.0);
  b.push_back(1.0);
  rel.push_back(LpRel::EQ);
  LpResult mixlp = solve_lp(cobj, A, rel, b);

  Mat v_star;
  if (mixlp.status == LpResult::Status::Optimal) {
    v_star = Mat(ip.nx(), nu, 0.0);
    for (int k = 0; k < K; ++k) {
      if (mixlp.x[k] <= 0.0) continue;
      for (std::size_t i = 0; i < v_star.a.size(); ++i)
        v_star.a[i] += mixlp.x[k] * columns[k].v.a[i];
    }
    // LP weights carry simplex-solver noise; restore exact row masses
    for (int x = 0; x < ip.nx(); ++x) {
      double rs = 0.0;
      for (int u = 0; u < nu; ++u) rs += v_star.at(x, u);
      if (rs > 0.0)
        for (int u = 0; u < nu; ++u) v_star.at(x, u) /= rs;
    }
  } else if (v0opt) {
    v_star = *v0opt;
  } else {
    res.feasible = false;
    return res;
  }
  // refine the split between the two heaviest columns by exact golden
  // search; the LP only sees linearized objectives
  if (mixlp.status == LpResult::Status::Optimal) {
    int k1 = -1, k2 = -1;
    for (int k = 0; k < K; ++k) {
      if (k1 < 0 || mixlp.x[k] > mixlp.x[k1]) {
        k2 = k1;
        k1 = k;
      } else if (k2 < 0 || mixlp.x[k] > mixlp.x[k2]) {
        k2 = k;
      }
    }
    if (k2 >= 0 && mixlp.x[k2] > 1e-9) {
      double th_lo = 0.0, th_hi = 1.0;  // theta = weight on column k1
      for (int j = 0; j < m; ++j) {
        const double da = columns[k1].d[j], db = columns[k2].d[j], bd = ip.constraints[j].bound;
        const double diff = da - db;
        if (std::fabs(diff) < 1e-15) {
          if (std::min(da, db) > bd + 1e-12) th_lo = 1.0, th_hi = 0.0;
          continue;
        }
        const double th = (bd - db) / diff;  // feasibility boundary
        if (diff > 0.0) th_hi = std::min(th_hi, th);
        else th_lo = std::max(th_lo, th);
      }
      if (th_lo <= th_hi) {
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo2 = th_lo, hi2 = th_hi;
        auto value_at = [&](double th) {
          Mat vm = mix(columns[k1].v, columns[k2].v, th);
          return objective_value(ip, vm);
        };
        double a = hi2 - gr * (hi2 - lo2), b = lo2 + gr * (hi2 - lo2);
        double fa2 = value_at(a), fb2 = value_at(b);
        for (int k = 0; k < 60; ++k) {
          if (fa2 < fb2) {
            hi2 = b;
            b = a;
            fb2 = fa2;
            a = hi2 - gr * (hi2 - lo2);
            fa2 = value_at(a);
          } else {
            lo2 = a;
            a = b;
            fa2 = fb2;
            b = lo2 + gr * (hi2 - lo2);
            fb2 = value_at(b);
          }
        }
        const double th = 0.5 * (lo2 + hi2);
        Mat vm = mix(columns[k1].v, columns[k2].v, th);
        if (objective_value(ip, vm) < objective_value(ip, v_star)) v_star = vm;
      }
    }
  }

  const double fw_gap = primal_polish(ip, v_star, 24);

  std::vector<double> dvals(m);
  for (int j = 0; j < m; ++j) dvals[j] = constraint_value(ip, v_star, ip.constraints[j]);
  if (v0opt) repair_feasibility(ip, *v0opt, v_star, dvals);

  res.v = v_star;
  res.value = objective_value(ip, v_star);
  res.dvals = dvals;
  res.multipliers = s_best;
  res.dual_lower = std::max(best_cert, res.value - fw_gap);
  return res;
}

// ---------------------------------------------------------------------------
// Nelder-Mead, minimizing, dimension <= ~8, budgeted.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double step, int budget,
                                       double* out_val = nullptr) {
  const int k = static_cast<int>(x0.size());
  std::vector<std::vector<double>> pts(k + 1, x0);
  std::vector<double> val(k + 1);
  for (int i = 1; i <= k; ++i) pts[i][i - 1] += step;
  int used = 0;
  for (int i = 0; i <= k; ++i) {
    val[i] = f(pts[i]);
    ++used;
  }
  while (used < budget) {
    int hi = 0, lo = 0, second = -1;
    for (int i = 1; i <= k; ++i) {
      if (val[i] > val[hi]) hi = i;
      if (val[i] < val[lo]) lo = i;
    }
    for (int i = 0; i <= k; ++i)
      if (i != hi && (second < 0 || val[i] > val[second])) second = i;
    if (val[hi] - val[lo] < 1e-12) break;
    std::vector<double> centroid(k, 0.0);
    for (int i = 0; i <= k; ++i)
      if (i != hi)
        for (int j = 0; j < k; ++j) centroid[j] += pts[i][j] / k;
    auto blend = [&](double a) {
      std::vector<double> p(k);
      for (int j = 0; j < k; ++j) p[j] = centroid[j] + a * (pts[hi][j] - centroid[j]);
      return p;
    };
    auto refl = blend(-1.0);
    double fr = f(refl);
    ++used;
    if (fr < val[lo]) {
      auto expd = blend(-2.0);
      double fe = f(expd);
      ++used;
      if (fe < fr) {
        pts[hi] = expd;
        val[hi] = fe;
      } else {
        pts[hi] = refl;
        val[hi] = fr;
      }
    } else if (fr < val[second]) {
      pts[hi] = refl;
      val[hi] = fr;
    } else {
      auto ctr = blend(fr < val[hi] ? -0.5 : 0.5);
      double fc = f(ctr);
      ++used;
      if (fc < std::min(fr, val[hi])) {
        pts[hi] = ctr;
        val[hi] = fc;
      } else {
        for (int i = 0; i <= k; ++i) {
          if (i == lo) continue;
          for (int j = 0; j < k; ++j) pts[i][j] = 0.5 * (pts[i][j] + pts[lo][j]);
          val[i] = f(pts[i]);
          ++used;
        }
      }
    }
  }
  int lo = 0;
  for (int i = 1; i <= k; ++i)
    if (val[i] < val[lo]) lo = i;
  if (out_val) *out_val = val[lo];
  return pts[lo];
}

// Logit parametrization of W1(E): softmax rows, then an exact blend toward
// the zero-distortion member whenever the budget is exceeded.
struct W1Param {
  const ChannelClassW1* cls;
  Channel w0;

  explicit W1Param(const ChannelClassW1& c) : cls(&c), w0(c.zero_distortion_member()) {}

  int dim() const { return cls->x_alphabet().size * (cls->y_alphabet().size - 1); }

  Channel decode(const std::vector<double>& theta) const {
    const int nx = cls->x_alphabet().size, ny = cls->y_alphabet().size;
    std::vector<double> rows(static_cast<std::size_t>(nx) * ny);
    for (int x = 0; x < nx; ++x) {
      double mx = 0.0;
      for (int y = 1; y < ny; ++y)
        mx = std::max(mx, std::min(30.0, std::max(-30.0, theta[static_cast<std::size_t>(x) * (ny - 1) + y - 1])));
      double z = std::exp(0.0 - mx);
      for (int y = 1; y < ny; ++y) {
        const double t = std::min(30.0, std::max(-30.0, theta[static_cast<std::size_t>(x) * (ny - 1) + y - 1]));
        z += std::exp(t - mx);
      }
      rows[static_cast<std::size_t>(x) * ny + 0] = std::exp(0.0 - mx) / z;
      for (int y = 1; y < ny; ++y) {
        const double t = std::min(30.0, std::max(-30.0, theta[static_cast<std::size_t>(x) * (ny - 1) + y - 1]));
        rows[static_cast<std::size_t>(x) * ny + y] = std::exp(t - mx) / z;
      }
    }
    Channel w(cls->x_alphabet(), cls->y_alphabet(), std::move(rows));
    const double cost = side_distortion(cls->source, w, cls->e);
    if (cost <= cls->budget) return w;
    const double c0 = side_distortion(cls->source, w0, cls->e);  // = 0
    const double lam = (cls->budget - c0) / (cost - c0);
    std::vector<double> mixed(w.rows.size());
    for (std::size_t i = 0; i < mixed.size(); ++i)
      mixed[i] = lam * w.rows[i] + (1.0 - lam) * w0.rows[i];
    return Channel(cls->x_alphabet(), cls->y_alphabet(), std::move(mixed));
  }

  std::vector<double> encode(const Channel& w) const {
    const int nx = cls->x_alphabet().size, ny = cls->y_alphabet().size;
    std::vector<double> theta(static_cast<std::size_t>(nx) * (ny - 1));
    for (int x = 0; x < nx; ++x) {
      const double base = std::max(w(0, x), 1e-9);
      for (int y = 1; y < ny; ++y)
        theta[static_cast<std::size_t>(x) * (ny - 1) + y - 1] =
            std::log(std::max(w(y, x), 1e-9) / base);
    }
    return theta;
  }
};

}  // namespace detail
}  // namespace uwz
