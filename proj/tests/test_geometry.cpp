#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "uwz/geometry.hpp"

using namespace uwz;
using Catch::Approx;

namespace {
const Alphabet X{2, "X"};
const Alphabet Y{2, "Y"};
const Alphabet XH{2, "Xhat"};

Channel bsc2(double p) { return Channel(X, Y, {1 - p, p, p, 1 - p}); }

int identity_function_index(const FunctionAlphabet& fa) {
  for (int u = 0; u < fa.size(); ++u) {
    bool id = true;
    for (int y = 0; y < fa.y_alphabet.size; ++y)
      if (fa.apply(u, y) != y) id = false;
    if (id) return u;
  }
  return -1;
}

// the parametric binary test channel: mass on own constant, crossed
// constant, and the identity function
TestChannel vhat(const FunctionAlphabet& fa, double lambda, double q) {
  std::vector<double> rows(static_cast<size_t>(2) * fa.size(), 0.0);
  int id = identity_function_index(fa);
  for (int x = 0; x < 2; ++x) {
    rows[static_cast<size_t>(x) * fa.size() + fa.constant_subset[x]] = lambda * (1 - q);
    rows[static_cast<size_t>(x) * fa.size() + fa.constant_subset[1 - x]] = lambda * q;
    rows[static_cast<size_t>(x) * fa.size() + id] = 1 - lambda;
  }
  return TestChannel(X, Alphabet(fa.size(), "U"), rows);
}

// dense-grid oracle for the worst case over binary channels, step 1e-3
double grid_worst_case(const TestChannel& v, const ChannelClassW1& cls,
                       const DistortionMeasure& d, const FunctionAlphabet& fa) {
  // d(V,W) and e(P,W) are both linear in the two free parameters
  double g00 = 0, g01 = 0, g10 = 0, g11 = 0;
  for (int u = 0; u < fa.size(); ++u) {
    g00 += cls.source(0) * v(u, 0) * d.at(0, fa.apply(u, 0));
    g01 += cls.source(0) * v(u, 0) * d.at(0, fa.apply(u, 1));
    g10 += cls.source(1) * v(u, 1) * d.at(1, fa.apply(u, 0));
    g11 += cls.source(1) * v(u, 1) * d.at(1, fa.apply(u, 1));
  }
  double best = -1.0;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; j <= 1000; ++j) {
      double a = i / 1000.0, b = j / 1000.0;
      double cost = cls.source(0) * (cls.e.at(0, 0) * (1 - a) + cls.e.at(0, 1) * a) +
                    cls.source(1) * (cls.e.at(1, 0) * b + cls.e.at(1, 1) * (1 - b));
      if (cost > cls.budget + 1e-12) continue;
      best = std::max(best, g00 * (1 - a) + g01 * a + g10 * b + g11 * (1 - b));
    }
  return best;
}
}  // namespace

TEST_CASE("function alphabet structure") {
  FunctionAlphabet fa(Y, XH);
  REQUIRE(fa.size() == 4);
  REQUIRE(fa.constant_subset.size() == 2);
  for (int c = 0; c < 2; ++c)
    for (int y = 0; y < 2; ++y) CHECK(fa.apply(fa.constant_subset[c], y) == c);
  CHECK(identity_function_index(fa) >= 0);
  CHECK_THROWS(FunctionAlphabet(Alphabet(7, "Y"), Alphabet(4, "Xhat")));  // 4^7 too big
}

TEST_CASE("distortion measure invariants") {
  CHECK_THROWS(DistortionMeasure(X, Y, {0.5, 1.0, 1.0, 0.5}));  // wait, has zeros? no: min 0.5
  DistortionMeasure ham = hamming_measure(X, XH);
  CHECK(ham.max_value == 1.0);
  CHECK(ham.zero_column(1) == 1);
  CHECK_THROWS(DistortionMeasure(X, Y, {0.0, -1.0, 1.0, 0.0}));
}

TEST_CASE("side distortion") {
  DistortionMeasure e = hamming_measure(X, Y);
  CHECK(side_distortion(uniform(X), identity_channel(X), e) == 0.0);
  CHECK(side_distortion(uniform(X), bsc2(0.3), e) == Approx(0.3));

  auto g = testutil::rng(41);
  for (int it = 0; it < 20; ++it) {
    auto px = testutil::random_distribution(g, X);
    auto w = testutil::random_channel(g, X, Y);
    double brute = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) brute += px(x) * w(y, x) * e.at(x, y);
    CHECK(side_distortion(px, w, e) == Approx(brute).margin(1e-12));
  }
}

TEST_CASE("reproduction distortion") {
  FunctionAlphabet fa(Y, XH);
  DistortionMeasure d = hamming_measure(X, XH);
  int id = identity_function_index(fa);

  TestChannel vid(X, fa.u_alphabet(),
                  {id == 0 ? 1.0 : 0.0, id == 1 ? 1.0 : 0.0, id == 2 ? 1.0 : 0.0,
                   id == 3 ? 1.0 : 0.0, id == 0 ? 1.0 : 0.0, id == 1 ? 1.0 : 0.0,
                   id == 2 ? 1.0 : 0.0, id == 3 ? 1.0 : 0.0});
  CHECK(reproduction_distortion(vid, bsc2(0.1), uniform(X), d, fa) == Approx(0.1));

  // constant-function support: value independent of the channel
  auto g = testutil::rng(42);
  std::vector<double> rows(8, 0.0);
  rows[fa.constant_subset[0]] = 0.4;
  rows[fa.constant_subset[1]] = 0.6;
  rows[4 + fa.constant_subset[0]] = 0.7;
  rows[4 + fa.constant_subset[1]] = 0.3;
  TestChannel vconst(X, fa.u_alphabet(), rows);
  double ref = reproduction_distortion(vconst, bsc2(0.5), uniform(X), d, fa);
  for (int it = 0; it < 10; ++it) {
    auto w = testutil::random_channel(g, X, Y);
    CHECK(reproduction_distortion(vconst, w, uniform(X), d, fa) == Approx(ref).margin(1e-12));
  }

  // point mass on constant-0 under the uniform source
  std::vector<double> r0(8, 0.0);
  r0[fa.constant_subset[0]] = 1.0;
  r0[4 + fa.constant_subset[0]] = 1.0;
  CHECK(reproduction_distortion(TestChannel(X, fa.u_alphabet(), r0), bsc2(0.2), uniform(X), d,
                                fa) == Approx(0.5));
}

TEST_CASE("reproduction distortion is bilinear") {
  FunctionAlphabet fa(Y, XH);
  DistortionMeasure d = hamming_measure(X, XH);
  auto g = testutil::rng(43);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 40; ++it) {
    auto px = testutil::random_distribution(g, X);
    auto v1 = testutil::random_channel(g, X, fa.u_alphabet());
    auto v2 = testutil::random_channel(g, X, fa.u_alphabet());
    auto w1 = testutil::random_channel(g, X, Y);
    auto w2 = testutil::random_channel(g, X, Y);
    double lam = ur(g);
    std::vector<double> vm(v1.rows.size()), wm(w1.rows.size());
    for (size_t i = 0; i < vm.size(); ++i) vm[i] = lam * v1.rows[i] + (1 - lam) * v2.rows[i];
    for (size_t i = 0; i < wm.size(); ++i) wm[i] = lam * w1.rows[i] + (1 - lam) * w2.rows[i];
    TestChannel vmix(X, fa.u_alphabet(), vm);
    Channel wmix(X, Y, wm);
    CHECK(reproduction_distortion(vmix, w1, px, d, fa) ==
          Approx(lam * reproduction_distortion(v1, w1, px, d, fa) +
                 (1 - lam) * reproduction_distortion(v2, w1, px, d, fa))
              .margin(1e-10));
    CHECK(reproduction_distortion(v1, wmix, px, d, fa) ==
          Approx(lam * reproduction_distortion(v1, w1, px, d, fa) +
                 (1 - lam) * reproduction_distortion(v1, w2, px, d, fa))
              .margin(1e-10));
  }
}

TEST_CASE("worst case distortion vs grid oracle") {
  FunctionAlphabet fa(Y, XH);
  auto g = testutil::rng(44);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 25; ++it) {
    auto px = testutil::random_distribution(g, X, 0.05);
    // random e with per-row zeros, random scale
    std::vector<double> em(4, 0.0);
    em[ur(g) < 0.5 ? 0 : 1] = 0.3 + ur(g);
    em[2 + (ur(g) < 0.5 ? 0 : 1)] = 0.3 + ur(g);
    DistortionMeasure e(X, Y, em);
    ChannelClassW1 cls(px, e, 0.05 + 0.4 * ur(g));
    DistortionMeasure d = hamming_measure(X, XH);
    auto v = testutil::random_channel(g, X, fa.u_alphabet());
    auto wc = worst_case_distortion(v, cls, d, fa);
    double oracle = grid_worst_case(v, cls, d, fa);
    CHECK(wc.value >= oracle - 1e-9);            // grid point never beats the LP
    CHECK(wc.value <= oracle + 2.5e-3);          // and the LP is within grid resolution
    CHECK(contains(cls, wc.argmax, 1e-9));       // optimizer feasible
    CHECK(reproduction_distortion(v, wc.argmax, px, d, fa) == Approx(wc.value).margin(1e-9));
  }
}

TEST_CASE("worst case special structure") {
  FunctionAlphabet fa(Y, XH);
  DistortionMeasure d = hamming_measure(X, XH);
  DistortionMeasure e = hamming_measure(X, Y);
  ChannelClassW1 cls(uniform(X), e, 0.25);

  // constant-function support: worst case equals the channel-free value
  std::vector<double> r(8, 0.0);
  r[fa.constant_subset[0]] = 0.8;
  r[fa.constant_subset[1]] = 0.2;
  r[4 + fa.constant_subset[1]] = 1.0;
  TestChannel vconst(X, fa.u_alphabet(), r);
  auto wc = worst_case_distortion(vconst, cls, d, fa);
  CHECK(wc.value == Approx(reproduction_distortion(vconst, bsc2(0.1), uniform(X), d, fa))
                        .margin(1e-10));

  // identity-function point mass with d = e: objective equals the
  // constrained functional, so the max sits on the budget boundary
  int id = identity_function_index(fa);
  std::vector<double> ri(8, 0.0);
  ri[id] = 1.0;
  ri[4 + id] = 1.0;
  TestChannel vid(X, fa.u_alphabet(), ri);
  CHECK(worst_case_distortion(vid, cls, d, fa).value == Approx(0.25).margin(1e-10));

  CHECK(is_member_VED(vid, cls, d, 0.25, fa));
  CHECK_FALSE(is_member_VED(vid, cls, d, 0.2499, fa));
  CHECK(is_member_VED(vconst, cls, d, d.max_value, fa));

  // section III-C form satisfies lambda q + (1-lambda) E <= D
  TestChannel vh = vhat(fa, 0.6, 0.05);
  double D = 0.6 * 0.05 + 0.4 * 0.25;
  CHECK(worst_case_distortion(vh, cls, d, fa).value == Approx(D).margin(1e-10));
  CHECK(is_member_VED(vh, cls, d, D + 1e-12, fa));

  // a single constant function can never beat its fixed distortion
  std::vector<double> rc(8, 0.0);
  rc[fa.constant_subset[0]] = 1.0;
  rc[4 + fa.constant_subset[0]] = 1.0;
  TestChannel vc0(X, fa.u_alphabet(), rc);
  CHECK_FALSE(is_member_VED(vc0, cls, d, 0.49, fa));
}

TEST_CASE("worst case value convex in v") {
  FunctionAlphabet fa(Y, XH);
  DistortionMeasure d = hamming_measure(X, XH);
  auto g = testutil::rng(45);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  ChannelClassW1 cls(uniform(X), hamming_measure(X, Y), 0.3);
  for (int it = 0; it < 30; ++it) {
    auto v1 = testutil::random_channel(g, X, fa.u_alphabet());
    auto v2 = testutil::random_channel(g, X, fa.u_alphabet());
    double lam = ur(g);
    std::vector<double> vm(v1.rows.size());
    for (size_t i = 0; i < vm.size(); ++i) vm[i] = lam * v1.rows[i] + (1 - lam) * v2.rows[i];
    TestChannel vmix(X, fa.u_alphabet(), vm);
    CHECK(worst_case_distortion(vmix, cls, d, fa).value <=
          lam * worst_case_distortion(v1, cls, d, fa).value +
              (1 - lam) * worst_case_distortion(v2, cls, d, fa).value + 1e-9);
    // dominates the value at any sampled member
    auto w = testutil::random_channel(g, X, Y);
    if (contains(cls, w))
      CHECK(worst_case_distortion(v1, cls, d, fa).value >=
            reproduction_distortion(v1, w, uniform(X), d, fa) - 1e-9);
  }
}

TEST_CASE("extreme points of W1") {
  DistortionMeasure e = hamming_measure(X, Y);

  // inactive constraint: exactly the deterministic channels
  ChannelClassW1 loose(uniform(X), e, 1.5);
  auto verts = extreme_points_W1(loose);
  CHECK(verts.size() == 4);  // |Y|^|X|

  // binary Hamming with E < 1/2 includes the two extreme asymmetric channels
  double E = 0.2;
  ChannelClassW1 cls(uniform(X), e, E);
  auto vs = extreme_points_W1(cls);
  bool has1 = false, has2 = false;
  for (const auto& w : vs) {
    CHECK(contains(cls, w, 1e-9));
    if (std::fabs(w(1, 0) - 2 * E) < 1e-9 && std::fabs(w(0, 1) - 0) < 1e-9) has1 = true;
    if (std::fabs(w(1, 0) - 0) < 1e-9 && std::fabs(w(0, 1) - 2 * E) < 1e-9) has2 = true;
  }
  CHECK(has1);
  CHECK(has2);

  // random feasible channels lie in the convex hull of the vertex list
  auto g = testutil::rng(46);
  std::vector<std::vector<double>> pts;
  for (const auto& w : vs) pts.push_back(w.rows);
  int tested = 0;
  while (tested < 20) {
    auto w = testutil::random_channel(g, X, Y);
    if (!contains(cls, w)) continue;
    ++tested;
    CHECK(in_convex_hull(pts, w.rows));
  }

  ChannelClassW1 big(uniform(Alphabet(5, "X")), hamming_measure(Alphabet(5, "X"), Alphabet(5, "Y")),
                     0.2);
  CHECK_THROWS(extreme_points_W1(big));
}

TEST_CASE("robust set nests inside per-channel sets") {
  FunctionAlphabet fa(Y, XH);
  DistortionMeasure d = hamming_measure(X, XH);
  ChannelClassW1 cls(uniform(X), hamming_measure(X, Y), 0.3);
  auto g = testutil::rng(47);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 40; ++it) {
    auto v = testutil::random_channel(g, X, fa.u_alphabet());
    double D = ur(g);
    if (!is_member_VED(v, cls, d, D, fa)) continue;
    for (int k = 0; k < 5; ++k) {
      auto w = testutil::random_channel(g, X, Y);
      if (!contains(cls, w)) continue;
      CHECK(reproduction_distortion(v, w, uniform(X), d, fa) <= D + 1e-9);
    }
  }
}
