#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "uwz/prob.hpp"

using namespace uwz;
using Catch::Approx;

namespace {
const Alphabet B{2, "X"};
const Alphabet T{3, "X"};
}  // namespace

TEST_CASE("entropy basics") {
  CHECK(entropy(uniform(B)) == Approx(1.0).margin(1e-15));
  CHECK(entropy(point_mass(B, 1)) == Approx(0.0).margin(1e-15));
  // direct evaluation of -0.25 log2 0.25 - 0.75 log2 0.75
  CHECK(entropy(Distribution(B, {0.25, 0.75})) == Approx(0.8112781244591328).epsilon(1e-13));
  CHECK(entropy(uniform(T)) == Approx(std::log2(3.0)).epsilon(1e-13));
}

TEST_CASE("entropy range and concavity") {
  auto g = testutil::rng(11);
  for (int it = 0; it < 200; ++it) {
    auto p = testutil::random_distribution(g, T);
    auto q = testutil::random_distribution(g, T);
    double h = entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log2(3.0) + 1e-12);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    double lam = ur(g);
    std::vector<double> mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = lam * p(i) + (1 - lam) * q(i);
    CHECK(entropy(Distribution(T, mix)) >= lam * entropy(p) + (1 - lam) * entropy(q) - 1e-10);
  }
}

TEST_CASE("distribution construction rules") {
  CHECK_THROWS(Distribution(B, {0.7, 0.7}));          // mass far from 1
  CHECK_THROWS(Distribution(B, {-0.1, 1.1}));         // negative entry
  CHECK_NOTHROW(Distribution(B, {0.5 + 4e-10, 0.5})); // renormalized
  Distribution d(B, {0.5 + 4e-10, 0.5});
  CHECK(d(0) + d(1) == Approx(1.0).margin(1e-15));
  CHECK_THROWS(Alphabet(0, "empty"));
}

TEST_CASE("channel construction and row stochasticity") {
  CHECK_THROWS(Channel(B, B, {0.5, 0.4, 0.5, 0.5}));
  Channel w(B, B, {0.9, 0.1, 0.2, 0.8});
  CHECK(w(1, 0) == Approx(0.1));
  CHECK(w(0, 1) == Approx(0.2));
}

TEST_CASE("mutual information basics") {
  auto g = testutil::rng(12);
  auto p = testutil::random_distribution(g, T);
  CHECK(mutual_information(p, identity_channel(T)) == Approx(entropy(p)).margin(1e-12));

  // constant-output channel: Y independent of X
  Channel constant(T, B, {1, 0, 1, 0, 1, 0});
  CHECK(mutual_information(p, constant) == Approx(0.0).margin(1e-12));

  // BSC(0.1) with uniform input: 1 - h2(0.1), h2 evaluated via the entropy op
  Channel bsc(B, B, {0.9, 0.1, 0.1, 0.9});
  double h2 = entropy(Distribution(B, {0.1, 0.9}));
  CHECK(mutual_information(uniform(B), bsc) == Approx(1.0 - h2).epsilon(1e-13));

  Alphabet Y{2, "Y"};
  CHECK_THROWS(mutual_information(testutil::random_distribution(g, Y), constant));
}

TEST_CASE("mutual information convex in channel, concave in input") {
  auto g = testutil::rng(13);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 60; ++it) {
    auto p = testutil::random_distribution(g, T);
    auto w1 = testutil::random_channel(g, T, B);
    auto w2 = testutil::random_channel(g, T, B);
    double lam = ur(g);
    std::vector<double> m(w1.rows.size());
    for (size_t i = 0; i < m.size(); ++i) m[i] = lam * w1.rows[i] + (1 - lam) * w2.rows[i];
    Channel wm(T, B, m);
    CHECK(mutual_information(p, wm) <=
          lam * mutual_information(p, w1) + (1 - lam) * mutual_information(p, w2) + 1e-10);

    auto p2 = testutil::random_distribution(g, T);
    std::vector<double> pm(3);
    for (int i = 0; i < 3; ++i) pm[i] = lam * p(i) + (1 - lam) * p2(i);
    CHECK(mutual_information(Distribution(T, pm), w1) >=
          lam * mutual_information(p, w1) + (1 - lam) * mutual_information(p2, w1) - 1e-10);
  }
}

TEST_CASE("conditional mutual information") {
  // full independence
  Joint prod({B, B, B}, std::vector<double>(8, 0.125));
  CHECK(conditional_mutual_information(prod) == Approx(0.0).margin(1e-12));

  // U = X, Y independent of X: I(U;X|Y) = H(X)
  {
    std::vector<double> t(8, 0.0);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) t[(static_cast<size_t>(x) * 2 + x) * 2 + y] = 0.25;
    CHECK(conditional_mutual_information(Joint({B, B, B}, t)) == Approx(1.0).margin(1e-12));
  }

  // Markov joints: equals I(U;X) - I(U;Y) to 1e-10
  auto g = testutil::rng(14);
  for (int it = 0; it < 100; ++it) {
    auto px = testutil::random_distribution(g, T);
    Alphabet U{4, "U"};
    Alphabet Y{2, "Y"};
    auto v = testutil::random_channel(g, T, U);
    auto w = testutil::random_channel(g, T, Y);
    Joint j = make_joint_uxy(px, v, w);
    double cmi = conditional_mutual_information(j);
    double iux = mutual_information(px, v);
    double iuy = 0.0;
    {
      // I(U;Y) from the (U,Y) marginal of the same tensor
      Joint juy = j.marginalize(1);
      Distribution pu = juy.marginal_distribution(0);
      Distribution py = juy.marginal_distribution(1);
      for (int u = 0; u < 4; ++u)
        for (int y = 0; y < 2; ++y) {
          double p = juy.probs[static_cast<size_t>(u) * 2 + y];
          if (p > 0) iuy += p * std::log2(p / (pu(u) * py(y)));
        }
    }
    CHECK(cmi == Approx(iux - iuy).margin(1e-10));
    CHECK(cmi >= -1e-12);
  }

  CHECK_THROWS(conditional_mutual_information(prod.marginalize(0)));
}

TEST_CASE("variational distance") {
  Joint p({B, B}, {0.25, 0.25, 0.25, 0.25});
  CHECK(variational_distance(p, p) == 0.0);
  Joint a({B}, {1.0, 0.0});
  Joint b({B}, {0.0, 1.0});
  CHECK(variational_distance(a, b) == Approx(2.0));
  CHECK(variational_distance(Distribution(B, {0.5, 0.5}), Distribution(B, {0.25, 0.75})) ==
        Approx(0.5));

  auto g = testutil::rng(15);
  for (int it = 0; it < 100; ++it) {
    auto x = testutil::random_distribution(g, T);
    auto y = testutil::random_distribution(g, T);
    auto z = testutil::random_distribution(g, T);
    CHECK(variational_distance(x, z) <=
          variational_distance(x, y) + variational_distance(y, z) + 1e-14);
  }
  Joint c({B, B}, {0.5, 0.5, 0.0, 0.0});
  CHECK_THROWS(variational_distance(a, c));
}

TEST_CASE("joint marginalization closes over the type") {
  auto g = testutil::rng(16);
  Alphabet U{4, "U"};
  auto px = testutil::random_distribution(g, T);
  auto v = testutil::random_channel(g, T, U);
  auto w = testutil::random_channel(g, T, B);
  Joint j = make_joint_uxy(px, v, w);
  Joint jux = j.marginalize(2);
  REQUIRE(jux.rank() == 2);
  // marginal over u recovers px
  Distribution mx = jux.marginal_distribution(1);
  for (int x = 0; x < 3; ++x) CHECK(mx(x) == Approx(px(x)).margin(1e-12));
  double total = 0.0;
  for (double q : j.probs) total += q;
  CHECK(total == Approx(1.0).margin(1e-12));
}
