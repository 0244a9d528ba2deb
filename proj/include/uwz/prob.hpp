#pragma once

// Exact finite-alphabet probability primitives: distributions, channels,
// joint tensors and the information measures built on them. All rates and
// entropies are in bits (log base 2). Values are immutable after
// construction and every operation here is pure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwz {

inline constexpr double kSimplexTol = 1e-12;   // post-normalization consistency
inline constexpr double kAcceptTol = 1e-9;     // how far off an input may be before rejection

struct Alphabet {
  int size = 0;
  std::string label;

  Alphabet() = default;
  Alphabet(int n, std::string name) : size(n), label(std::move(name)) {
    if (n < 1) throw std::invalid_argument("Alphabet: size must be >= 1 (" + label + ")");
  }
  bool operator==(const Alphabet& o) const { return size == o.size && label == o.label; }
};

// 0*log2(0) = 0 by explicit branch; no epsilon smoothing.
inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) h -= xlog2x(x);
  return h < 0.0 ? 0.0 : h;  // clamp -0.0 from rounding
}

namespace detail {

inline void normalize_block(std::vector<double>& v, std::size_t begin, std::size_t len,
                            const char* what) {
  double sum = 0.0;
  for (std::size_t i = begin; i < begin + len; ++i) {
    if (v[i] < 0.0) {
      if (v[i] < -kAcceptTol) throw std::invalid_argument(std::string(what) + ": negative entry");
      v[i] = 0.0;
    }
    sum += v[i];
  }
  if (std::fabs(sum - 1.0) > kAcceptTol)
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(sum) +
                                " not within 1e-9 of 1");
  for (std::size_t i = begin; i < begin + len; ++i) v[i] /= sum;
}

}  // namespace detail

struct Distribution {
  Alphabet alphabet;
  std::vector<double> probs;

  Distribution() = default;
  Distribution(Alphabet a, std::vector<double> p) : alphabet(std::move(a)), probs(std::move(p)) {
    if (static_cast<int>(probs.size()) != alphabet.size)
      throw std::invalid_argument("Distribution: length mismatch with alphabet " + alphabet.label);
    detail::normalize_block(probs, 0, probs.size(), "Distribution");
  }

  double operator()(int x) const { return probs[x]; }
  int size() const { return alphabet.size; }
};

inline Distribution uniform(const Alphabet& a) {
  return Distribution(a, std::vector<double>(a.size, 1.0 / a.size));
}

inline Distribution point_mass(const Alphabet& a, int x) {
  std::vector<double> p(a.size, 0.0);
  p.at(x) = 1.0;
  return Distribution(a, std::move(p));
}

// Row-stochastic matrix, one row per input symbol.
struct Channel {
  Alphabet input;
  Alphabet output;
  std::vector<double> rows;  // row-major, input.size x output.size

  Channel() = default;
  Channel(Alphabet in, Alphabet out, std::vector<double> m)
      : input(std::move(in)), output(std::move(out)), rows(std::move(m)) {
    if (rows.size() != static_cast<std::size_t>(input.size) * output.size)
      throw std::invalid_argument("Channel: matrix shape mismatch");
    for (int x = 0; x < input.size; ++x)
      detail::normalize_block(rows, static_cast<std::size_t>(x) * output.size, output.size,
                              "Channel row");
  }

  double operator()(int y, int x) const {  // W(y|x)
    return rows[static_cast<std::size_t>(x) * output.size + y];
  }
  int in_size() const { return input.size; }
  int out_size() const { return output.size; }
};

inline Channel identity_channel(const Alphabet& a) {
  std::vector<double> m(static_cast<std::size_t>(a.size) * a.size, 0.0);
  for (int x = 0; x < a.size; ++x) m[static_cast<std::size_t>(x) * a.size + x] = 1.0;
  return Channel(a, a, std::move(m));
}

inline Distribution output_distribution(const Distribution& p, const Channel& w) {
  if (!(p.alphabet == w.input)) throw std::invalid_argument("output_distribution: alphabet mismatch");
  std::vector<double> q(w.out_size(), 0.0);
  for (int x = 0; x < w.in_size(); ++x)
    for (int y = 0; y < w.out_size(); ++y) q[y] += p(x) * w(y, x);
  return Distribution(w.output, std::move(q));
}

// Dense joint law over an ordered list of alphabets. Marginalization is
// closed under the type; axes keep their labels.
struct Joint {
  std::vector<Alphabet> axes;
  std::vector<double> probs;  // row-major over axes in order

  Joint() = default;
  Joint(std::vector<Alphabet> ax, std::vector<double> p)
      : axes(std::move(ax)), probs(std::move(p)) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
    if (probs.size() != n) throw std::invalid_argument("Joint: tensor shape mismatch");
    detail::normalize_block(probs, 0, probs.size(), "Joint");
  }

  int rank() const { return static_cast<int>(axes.size()); }

  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int i = rank() - 1; i > axis; --i) s *= static_cast<std::size_t>(axes[i].size);
    return s;
  }

  Joint marginalize(int axis) const {
    if (axis < 0 || axis >= rank()) throw std::invalid_argument("Joint: bad axis");
    std::vector<Alphabet> ax;
    for (int i = 0; i < rank(); ++i)
      if (i != axis) ax.push_back(axes[i]);
    std::size_t n = 1;
    for (const auto& a : ax) n *= static_cast<std::size_t>(a.size);
    std::vector<double> out(n, 0.0);
    const std::size_t inner = stride(axis);
    const std::size_t k = static_cast<std::size_t>(axes[axis].size);
    const std::size_t outer = probs.size() / (inner * k);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < inner; ++i)
          out[o * inner + i] += probs[(o * k + j) * inner + i];
    return Joint(std::move(ax), std::move(out));
  }

  Distribution marginal_distribution(int axis) const {
    Joint j = *this;
    // peel off all other axes, highest index first so positions stay valid
    for (int i = rank() - 1; i >= 0; --i)
      if (i != axis) j = j.marginalize(i);
    return Distribution(j.axes[0], j.probs);
  }
};

// P(u,x,y) = px(x) v(u|x) w(y|x); the Markov joint used throughout.
inline Joint make_joint_uxy(const Distribution& px, const Channel& v, const Channel& w) {
  if (!(px.alphabet == v.input) || !(px.alphabet == w.input))
    throw std::invalid_argument("make_joint_uxy: alphabet mismatch");
  const int nu = v.out_size(), nx = px.size(), ny = w.out_size();
  std::vector<double> t(static_cast<std::size_t>(nu) * nx * ny);
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y)
        t[(static_cast<std::size_t>(u) * nx + x) * ny + y] = px(x) * v(u, x) * w(y, x);
  return Joint({v.output, px.alphabet, w.output}, std::move(t));
}

inline double entropy(const Distribution& p) { return entropy_of(p.probs); }

// I(X;Y) of the joint p(x) w(y|x), in bits.
inline double mutual_information(const Distribution& p, const Channel& w) {
  if (!(p.alphabet == w.input)) throw std::invalid_argument("mutual_information: alphabet mismatch");
  std::vector<double> q(w.out_size(), 0.0);
  for (int x = 0; x < w.in_size(); ++x)
    for (int y = 0; y < w.out_size(); ++y) q[y] += p(x) * w(y, x);
  double mi = 0.0;
  for (int x = 0; x < w.in_size(); ++x) {
    if (p(x) <= 0.0) continue;
    for (int y = 0; y < w.out_size(); ++y) {
      const double wyx = w(y, x);
      if (wyx > 0.0 && q[y] > 0.0) mi += p(x) * wyx * std::log2(wyx / q[y]);
    }
  }
  return mi < 0.0 ? 0.0 : mi;
}

// I(U;X|Y) from a three-dimensional joint over (U,X,Y), in bits.
inline double conditional_mutual_information(const Joint& j) {
  if (j.rank() != 3) throw std::invalid_argument("conditional_mutual_information: need rank-3 joint");
  const int nu = j.axes[0].size, nx = j.axes[1].size, ny = j.axes[2].size;
  std::vector<double> puy(static_cast<std::size_t>(nu) * ny, 0.0);
  std::vector<double> pxy(static_cast<std::size_t>(nx) * ny, 0.0);
  std::vector<double> py(ny, 0.0);
  auto at = [&](int u, int x, int y) {
    return j.probs[(static_cast<std::size_t>(u) * nx + x) * ny + y];
  };
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        const double p = at(u, x, y);
        puy[static_cast<std::size_t>(u) * ny + y] += p;
        pxy[static_cast<std::size_t>(x) * ny + y] += p;
        py[y] += p;
      }
  double cmi = 0.0;
  for (int u = 0; u < nu; ++u)
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        const double p = at(u, x, y);
        if (p <= 0.0) continue;
        const double denom = puy[static_cast<std::size_t>(u) * ny + y] *
                             pxy[static_cast<std::size_t>(x) * ny + y];
        cmi += p * std::log2(p * py[y] / denom);
      }
  return cmi < 0.0 ? 0.0 : cmi;
}

// Unnormalized L1 distance Sum |p - q|; range [0,2] for probability inputs.
inline double variational_distance(const Joint& p, const Joint& q) {
  if (p.probs.size() != q.probs.size()) throw std::invalid_argument("variational_distance: shape mismatch");
  for (std::size_t i = 0; i < p.axes.size(); ++i)
    if (!(p.axes[i].size == q.axes[i].size))
      throw std::invalid_argument("variational_distance: axis mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) s += std::fabs(p.probs[i] - q.probs[i]);
  return s;
}

inline double variational_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw std::invalid_argument("variational_distance: shape mismatch");
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::fabs(p(i) - q(i));
  return s;
}

inline double variational_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("variational_distance: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
  return s;
}

}  // namespace uwz
