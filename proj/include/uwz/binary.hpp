#pragma once

// Closed-form and parametric ground truth for the doubly-symmetric binary
// source with Hamming distortions. The generic solvers are validated
// against these oracles; nothing here calls back into them.

#include <cmath>
#include <stdexcept>

#include "uwz/geometry.hpp"
#include "uwz/prob.hpp"

namespace uwz {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// binary convolution a * b = a(1-b) + b(1-a), exact at the endpoints
inline double binary_convolve(double a, double b) {
  if (a == 0.0) return b;
  if (b == 0.0) return a;
  return a * (1.0 - b) + b * (1.0 - a);
}

inline Channel bsc(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("bsc: crossover out of range");
  Alphabet a(2, "X"), b(2, "Y");
  return Channel(a, b, {1.0 - p, p, p, 1.0 - p});
}

struct WZParametric {
  double rate = 0.0;
  double lambda = 0.0;  // time-sharing weight on the quantization branch
  double q = 0.0;       // crossover of the quantizer
};

namespace detail {

// rate at the minimal feasible time-sharing weight for a given q
inline double binary_wz_objective(double E, double D, double q) {
  const double lam = (E - D) / (E - q);
  return lam * (h2(binary_convolve(E, q)) - h2(q));
}

}  // namespace detail

// min over (lambda, q) of lambda (h2(E*q) - h2(q)) subject to
// lambda q + (1-lambda) E <= D. The objective grows with lambda, so the
// constraint is tight and the search is one-dimensional in q.
inline WZParametric wz_binary_oracle_point(double E, double D) {
  if (E <= 0.0 || E > 0.5) throw std::invalid_argument("wz_binary_oracle: E must be in (0, 1/2]");
  if (D < 0.0 || D > 1.0) throw std::invalid_argument("wz_binary_oracle: D must be in [0, 1]");
  if (D >= E) return WZParametric{0.0, 0.0, 0.0};

  const double q_hi = std::min(D, 0.5);
  const int grid = 2000;
  double best_q = 0.0, best = detail::binary_wz_objective(E, D, 0.0);
  for (int i = 1; i <= grid; ++i) {
    const double q = q_hi * i / grid;
    const double v = detail::binary_wz_objective(E, D, q);
    if (v < best) {
      best = v;
      best_q = q;
    }
  }
  // golden-section refinement around the grid minimum
  double lo = std::max(0.0, best_q - q_hi / grid);
  double hi = std::min(q_hi, best_q + q_hi / grid);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = detail::binary_wz_objective(E, D, a), fb = detail::binary_wz_objective(E, D, b);
  for (int it = 0; it < 80; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = detail::binary_wz_objective(E, D, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = detail::binary_wz_objective(E, D, b);
    }
  }
  const double q_star = 0.5 * (lo + hi);
  const double v_star = detail::binary_wz_objective(E, D, q_star);
  if (v_star < best) {
    best = v_star;
    best_q = q_star;
  }
  const double lam = (E - D) / (E - best_q);
  return WZParametric{std::max(0.0, best), lam, best_q};
}

inline double wz_binary_oracle(double E, double D) { return wz_binary_oracle_point(E, D).rate; }

// Lower convex envelope of the classic binary rate-distortion curve and the
// estimation-only point (E, 0): 1 - h2(D) up to the tangency distortion,
// then the straight line into (E, 0).
inline double ra_upper_binary_oracle(double E, double D) {
  if (E <= 0.0 || E > 0.5) throw std::invalid_argument("ra_upper_binary_oracle: E out of range");
  if (D < 0.0) throw std::invalid_argument("ra_upper_binary_oracle: D must be >= 0");
  if (D >= E) return 0.0;

  // tangency: h2'(Dc) (E - Dc) = 1 - h2(Dc)
  auto f = [&](double dc) {
    return std::log2((1.0 - dc) / dc) * (E - dc) - (1.0 - h2(dc));
  };
  double lo = 1e-12, hi = E - 1e-12;
  double dc;
  if (f(hi) >= 0.0) {
    dc = E;  // degenerate segment, pure rate-distortion curve (E = 1/2)
  } else {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > 0.0 ? lo : hi) = mid;
    }
    dc = 0.5 * (lo + hi);
  }
  if (D <= dc) return 1.0 - h2(D);
  const double r_dc = 1.0 - h2(dc);
  return r_dc * (E - D) / (E - dc);
}

// The two extreme asymmetric members of W1(E) for the binary Hamming class:
// one flips only zeros, the other only ones, both at the full budget.
inline std::pair<Channel, Channel> fig4_channels(double E) {
  if (E < 0.0 || E > 0.5) throw std::invalid_argument("fig4_channels: E must be in [0, 1/2]");
  Alphabet a(2, "X"), b(2, "Y");
  Channel w1(a, b, {1.0 - 2.0 * E, 2.0 * E, 0.0, 1.0});
  Channel w2(a, b, {1.0, 0.0, 2.0 * E, 1.0 - 2.0 * E});
  return {w1, w2};
}

// The parametric test channel of the binary example: mass lambda(1-q) on the
// matching constant function, lambda q on the crossed one, 1-lambda on the
// identity function.
inline TestChannel binary_wz_test_channel(const FunctionAlphabet& fa, double lambda, double q) {
  if (fa.y_alphabet.size != 2 || fa.xhat_alphabet.size != 2)
    throw std::invalid_argument("binary_wz_test_channel: needs binary alphabets");
  int id = -1;
  for (int u = 0; u < fa.size(); ++u)
    if (fa.apply(u, 0) == 0 && fa.apply(u, 1) == 1) id = u;
  std::vector<double> rows(static_cast<std::size_t>(2) * fa.size(), 0.0);
  for (int x = 0; x < 2; ++x) {
    rows[static_cast<std::size_t>(x) * fa.size() + fa.constant_subset[x]] += lambda * (1.0 - q);
    rows[static_cast<std::size_t>(x) * fa.size() + fa.constant_subset[1 - x]] += lambda * q;
    rows[static_cast<std::size_t>(x) * fa.size() + id] += 1.0 - lambda;
  }
  return TestChannel(Alphabet(2, "X"), fa.u_alphabet(), std::move(rows));
}

}  // namespace uwz
