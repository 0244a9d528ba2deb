#pragma once

// Method-of-types utilities: types of sequences, conditional types, shell
// sizes, typical sets and empirical distortions. Shell sizes and type-class
// probabilities are computed in log2 domain so blocklengths up to ~64 work
// without overflow.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "uwz/prob.hpp"

namespace uwz {

using Sequence = std::vector<int>;

struct SequenceType {
  Alphabet alphabet;
  std::vector<int64_t> counts;
  int64_t n = 0;

  Distribution induced() const {
    std::vector<double> p(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = static_cast<double>(counts[i]) / n;
    return Distribution(alphabet, std::move(p));
  }
};

// counts[x][y], row x sums to inputType.counts[x]
struct ConditionalType {
  SequenceType input_type;
  Alphabet output;
  std::vector<int64_t> counts;  // row-major |X| x |Y|

  int64_t at(int x, int y) const { return counts[static_cast<std::size_t>(x) * output.size + y]; }
};

inline SequenceType type_of(const Sequence& x, const Alphabet& a) {
  if (x.empty()) throw std::invalid_argument("type_of: empty sequence");
  std::vector<int64_t> c(a.size, 0);
  for (int s : x) {
    if (s < 0 || s >= a.size) throw std::invalid_argument("type_of: symbol out of alphabet");
    ++c[s];
  }
  return SequenceType{a, std::move(c), static_cast<int64_t>(x.size())};
}

inline ConditionalType conditional_type_of(const Sequence& x, const Sequence& y,
                                           const Alphabet& ax, const Alphabet& ay) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("conditional_type_of: length mismatch");
  SequenceType tx = type_of(x, ax);
  std::vector<int64_t> c(static_cast<std::size_t>(ax.size) * ay.size, 0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (y[t] < 0 || y[t] >= ay.size) throw std::invalid_argument("conditional_type_of: symbol out of alphabet");
    ++c[static_cast<std::size_t>(x[t]) * ay.size + y[t]];
  }
  return ConditionalType{std::move(tx), ay, std::move(c)};
}

// All compositions of n into |alphabet| parts; count = C(n+|X|-1, |X|-1).
inline std::vector<SequenceType> enumerate_types(const Alphabet& a, int64_t n) {
  if (n < 1) throw std::invalid_argument("enumerate_types: n must be >= 1");
  std::vector<SequenceType> out;
  std::vector<int64_t> cur(a.size, 0);
  std::function<void(int, int64_t)> rec = [&](int pos, int64_t left) {
    if (pos == a.size - 1) {
      cur[pos] = left;
      out.push_back(SequenceType{a, cur, n});
      return;
    }
    for (int64_t k = 0; k <= left; ++k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, n);
  return out;
}

namespace detail {

inline double log2_factorial(int64_t n) {
  static std::vector<double> table{0.0, 0.0};  // log2(0!)=log2(1!)=0
  while (static_cast<int64_t>(table.size()) <= n)
    table.push_back(table.back() + std::log2(static_cast<double>(table.size())));
  return table[n];
}

inline double log2_multinomial(int64_t n, const std::vector<int64_t>& parts) {
  double v = log2_factorial(n);
  int64_t sum = 0;
  for (int64_t k : parts) {
    v -= log2_factorial(k);
    sum += k;
  }
  if (sum != n) throw std::invalid_argument("log2_multinomial: parts do not sum to n");
  return v;
}

}  // namespace detail

// log2 |T_W(x^n)| = sum over x of log2 multinomial(n_x; counts[x][.])
inline double shell_log2_size(const ConditionalType& ct) {
  const int nx = ct.input_type.alphabet.size;
  const int ny = ct.output.size;
  double v = 0.0;
  for (int x = 0; x < nx; ++x) {
    std::vector<int64_t> row(ny);
    int64_t rsum = 0;
    for (int y = 0; y < ny; ++y) {
      row[y] = ct.at(x, y);
      if (row[y] < 0) throw std::invalid_argument("shell_log2_size: negative count");
      rsum += row[y];
    }
    if (rsum != ct.input_type.counts[x])
      throw std::invalid_argument("shell_log2_size: row sum != input count");
    v += detail::log2_multinomial(rsum, row);
  }
  return v;
}

// Exact shell size when it fits in uint64; throws otherwise.
inline uint64_t shell_size(const ConditionalType& ct) {
  double lg = shell_log2_size(ct);
  if (lg > 62.5) throw std::overflow_error("shell_size: exceeds uint64, use shell_log2_size");
  const int nx = ct.input_type.alphabet.size;
  const int ny = ct.output.size;
  uint64_t total = 1;
  for (int x = 0; x < nx; ++x) {
    // multinomial via iterative binomials
    int64_t left = ct.input_type.counts[x];
    for (int y = 0; y < ny; ++y) {
      int64_t k = ct.at(x, y);
      // C(left, k)
      uint64_t c = 1;
      for (int64_t i = 1; i <= k; ++i) c = c * static_cast<uint64_t>(left - k + i) / i;
      total *= c;
      left -= k;
    }
  }
  return total;
}

// T_{X,delta} membership: closed inequality on every letter and no
// zero-probability symbol occurring.
inline bool is_typical(const Sequence& x, const Distribution& p, double delta) {
  if (delta <= 0) throw std::invalid_argument("is_typical: delta must be > 0");
  SequenceType t = type_of(x, p.alphabet);
  for (int a = 0; a < p.size(); ++a) {
    const double emp = static_cast<double>(t.counts[a]) / t.n;
    if (p(a) == 0.0 && t.counts[a] > 0) return false;
    if (std::fabs(emp - p(a)) > delta) return false;
  }
  return true;
}

inline double empirical_distortion(const Sequence& x, const Sequence& y,
                                   const std::vector<std::vector<double>>& measure) {
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("empirical_distortion: length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) s += measure.at(x[t]).at(y[t]);
  return s / static_cast<double>(x.size());
}

// log2 probability of one sequence in the shell under W^{x n}: products of
// W(y|x)^{count}; -inf encoded as -HUGE_VAL when a zero-probability
// transition is demanded.
inline double shell_sequence_log2_prob(const ConditionalType& ct, const Channel& w) {
  double v = 0.0;
  for (int x = 0; x < w.in_size(); ++x)
    for (int y = 0; y < w.out_size(); ++y) {
      const int64_t k = ct.at(x, y);
      if (k == 0) continue;
      if (w(y, x) <= 0.0) return -HUGE_VAL;
      v += static_cast<double>(k) * std::log2(w(y, x));
    }
  return v;
}

// Streams every conditional type with the given input type; the visitor
// returns false to stop. Enumeration is lazy so callers can iterate large
// families without materializing them.
inline void for_each_conditional_type(const SequenceType& input_type, const Alphabet& out,
                                      const std::function<bool(const ConditionalType&)>& visit) {
  const int nx = input_type.alphabet.size;
  const int ny = out.size;
  ConditionalType ct{input_type, out,
                     std::vector<int64_t>(static_cast<std::size_t>(nx) * ny, 0)};
  bool stop = false;
  std::function<void(int)> per_row = [&](int x) {
    if (stop) return;
    if (x == nx) {
      if (!visit(ct)) stop = true;
      return;
    }
    std::function<void(int, int64_t)> fill = [&](int y, int64_t left) {
      if (stop) return;
      if (y == ny - 1) {
        ct.counts[static_cast<std::size_t>(x) * ny + y] = left;
        per_row(x + 1);
        return;
      }
      for (int64_t k = 0; k <= left; ++k) {
        ct.counts[static_cast<std::size_t>(x) * ny + y] = k;
        fill(y + 1, left - k);
      }
    };
    fill(0, input_type.counts[x]);
  };
  per_row(0);
}

}  // namespace uwz
