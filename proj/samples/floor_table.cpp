// Prints the closed-form BER floors of the three CPR algorithms for 8-PSK
// at a few phase-noise variances, plus the spectral efficiency left after
// ideal hard-decision FEC.

#include <cstdio>

#include "cprlab/analytics.hpp"

int main() {
  using namespace cprlab;
  const unsigned order = 8;
  const unsigned block = 11;
  std::printf("%-10s %-14s %-14s %-14s %s\n", "sigma2", "nlms", "bwa(N=11)", "vv(N=11)", "SE_vv [b/sym]");
  for (double s2 : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
    const double fn = floor_nlms(order, s2);
    const double fb = floor_bwa(order, block, s2);
    const double fv = floor_vv(order, block, s2);
    std::printf("%-10g %-14.4e %-14.4e %-14.4e %.4f\n", s2, fn, fb, fv, spectral_efficiency(fv, order, 2));
  }
  std::printf("\ncomplex multiplications per symbol: nlms %u, bwa %u, vv %u\n", complexity(Algorithm::nlms, order),
              complexity(Algorithm::bwa, order), complexity(Algorithm::vv, order));
}
