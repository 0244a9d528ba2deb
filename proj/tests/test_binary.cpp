#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "uwz/binary.hpp"

using namespace uwz;
using Catch::Approx;

TEST_CASE("bsc") {
  Channel w0 = bsc(0.0);
  CHECK(w0(0, 0) == 1.0);
  CHECK(w0(1, 1) == 1.0);
  Channel wh = bsc(0.5);
  CHECK(wh(0, 0) == 0.5);
  DistortionMeasure e = hamming_measure(Alphabet(2, "X"), Alphabet(2, "Y"));
  CHECK(side_distortion(uniform(Alphabet(2, "X")), bsc(0.3), e) == Approx(0.3));
  CHECK_THROWS(bsc(1.2));
}

TEST_CASE("binary WZ oracle endpoints") {
  CHECK(wz_binary_oracle(0.25, 0.25) == 0.0);
  CHECK(wz_binary_oracle(0.25, 0.5) == 0.0);
  CHECK(wz_binary_oracle(0.25, 0.0) == Approx(h2(0.25)).margin(1e-9));
  CHECK(wz_binary_oracle(0.1, 0.0) == Approx(h2(0.1)).margin(1e-9));
  // a mid-curve point is strictly between the endpoints
  double v = wz_binary_oracle(0.25, 0.1);
  CHECK(v > 0.0);
  CHECK(v < h2(0.25));
  CHECK_THROWS(wz_binary_oracle(0.7, 0.1));
}

TEST_CASE("binary WZ oracle shape") {
  for (double E : {0.1, 0.25, 0.4}) {
    double prev = 1e9;
    std::vector<double> vals;
    for (int i = 0; i <= 20; ++i) {
      double D = E * i / 20.0;
      double v = wz_binary_oracle(E, D);
      CHECK(v <= prev + 1e-12);  // nonincreasing in D
      prev = v;
      vals.push_back(v);
    }
    // convex along the grid
    for (size_t i = 1; i + 1 < vals.size(); ++i)
      CHECK(vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-9);
    // dominated by the average-class upper bound
    for (int i = 0; i <= 20; ++i) {
      double D = E * i / 20.0;
      CHECK(ra_upper_binary_oracle(E, D) >= wz_binary_oracle(E, D) - 1e-9);
    }
  }
}

TEST_CASE("average-class binary envelope") {
  CHECK(ra_upper_binary_oracle(0.25, 0.0) == Approx(1.0).margin(1e-12));
  CHECK(ra_upper_binary_oracle(0.25, 0.25) == 0.0);
  CHECK(ra_upper_binary_oracle(0.25, 0.3) == 0.0);
  // with E = 1/2 the envelope is the classic curve itself
  for (double D : {0.05, 0.1, 0.2}) {
    CHECK(ra_upper_binary_oracle(0.5, D) == Approx(1.0 - h2(D)).margin(1e-6));
  }
  // envelope is convex and between its endpoints
  std::vector<double> vals;
  for (int i = 0; i <= 25; ++i) vals.push_back(ra_upper_binary_oracle(0.25, 0.25 * i / 25.0));
  for (size_t i = 1; i + 1 < vals.size(); ++i)
    CHECK(vals[i] <= 0.5 * (vals[i - 1] + vals[i + 1]) + 1e-9);
  // it sits below the classic curve
  for (int i = 1; i <= 24; ++i) {
    double D = 0.25 * i / 25.0;
    CHECK(ra_upper_binary_oracle(0.25, D) <= 1.0 - h2(D) + 1e-12);
  }
}

TEST_CASE("fig4 channels") {
  double E = 0.25;
  auto [w1, w2] = fig4_channels(E);
  DistortionMeasure e = hamming_measure(Alphabet(2, "X"), Alphabet(2, "Y"));
  Distribution px = uniform(Alphabet(2, "X"));
  CHECK(side_distortion(px, w1, e) == Approx(E));
  CHECK(side_distortion(px, w2, e) == Approx(E));
  ChannelClassW1 cls(px, e, E);
  CHECK(contains(cls, w1));
  CHECK(contains(cls, w2));
  // every sampled convex combination stays feasible
  auto g = testutil::rng(51);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    double lam = ur(g);
    std::vector<double> m(4);
    for (int i = 0; i < 4; ++i) m[i] = lam * w1.rows[i] + (1 - lam) * w2.rows[i];
    CHECK(contains(cls, Channel(Alphabet(2, "X"), Alphabet(2, "Y"), m)));
  }
}

TEST_CASE("binary test channel distortion identity") {
  FunctionAlphabet fa(Alphabet(2, "Y"), Alphabet(2, "Xhat"));
  DistortionMeasure d = hamming_measure(Alphabet(2, "X"), Alphabet(2, "Xhat"));
  Distribution px = uniform(Alphabet(2, "X"));
  auto g = testutil::rng(52);
  std::uniform_real_distribution<double> ur(0.0, 1.0);
  for (int it = 0; it < 20; ++it) {
    double lam = ur(g), q = 0.5 * ur(g), E = 0.05 + 0.4 * ur(g);
    TestChannel v = binary_wz_test_channel(fa, lam, q);
    // d(V, W) = lambda q + (1-lambda) e(P,W) for any binary channel
    auto w = testutil::random_channel(g, Alphabet(2, "X"), Alphabet(2, "Y"));
    DistortionMeasure e = hamming_measure(Alphabet(2, "X"), Alphabet(2, "Y"));
    double expected = lam * q + (1 - lam) * side_distortion(px, w, e);
    CHECK(reproduction_distortion(v, w, px, d, fa) == Approx(expected).margin(1e-12));
    (void)E;
  }
}
