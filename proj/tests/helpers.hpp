#pragma once

#include <random>
#include <vector>

#include "uwz/prob.hpp"

namespace testutil {

inline std::mt19937_64 rng(uint64_t seed) { return std::mt19937_64(seed); }

inline std::vector<double> random_simplex(std::mt19937_64& g, int n, double floor = 0.0) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = ex(g) + floor;
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

inline uwz::Distribution random_distribution(std::mt19937_64& g, const uwz::Alphabet& a,
                                             double floor = 0.0) {
  return uwz::Distribution(a, random_simplex(g, a.size, floor));
}

inline uwz::Channel random_channel(std::mt19937_64& g, const uwz::Alphabet& in,
                                   const uwz::Alphabet& out, double floor = 0.0) {
  std::vector<double> m;
  m.reserve(static_cast<size_t>(in.size) * out.size);
  for (int x = 0; x < in.size; ++x) {
    auto row = random_simplex(g, out.size, floor);
    m.insert(m.end(), row.begin(), row.end());
  }
  return uwz::Channel(in, out, std::move(m));
}

}  // namespace testutil
