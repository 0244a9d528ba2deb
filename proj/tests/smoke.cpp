#include <chrono>
#include <cstdio>

#include "uwz/solvers.hpp"

using namespace uwz;

int main() {
  SolverSettings st;
  auto t0 = std::chrono::steady_clock::now();
  for (double E : {0.1, 0.25, 0.4}) {
    RDProblem pr = binary_problem(E);
    RobustCache cache;
    for (int i = 0; i <= 4; ++i) {
      double D = E * i / 4.0;
      auto up = rm_upper(D, pr, st, &cache);
      auto lo = rm_lower(D, pr, st, {up.w_star});
      auto match = check_matching(up, D, pr, st);
      auto ra = ra_upper(D, pr, st, &cache);
      std::printf(
          "E=%.2f D=%.3f rm_up=%.6f rm_lo=%.6f or=%.6f gap=%.1e c1=%d ra=%.6f ra_or=%.6f ok=%d\n",
          E, D, up.rate, lo.rate, wz_binary_oracle(E, D), up.saddle_gap, match.c1, ra.rate,
          ra_upper_binary_oracle(E, D),
          lo.rate <= up.rate + 1e-6 && std::fabs(up.rate - wz_binary_oracle(E, D)) < 1e-3);
    }
  }
  auto t1 = std::chrono::steady_clock::now();
  std::printf("elapsed %.2fs\n", std::chrono::duration<double>(t1 - t0).count());
  return 0;
}
