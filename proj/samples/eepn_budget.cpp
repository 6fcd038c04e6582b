// Phase-noise budget of a 32 Gbaud link versus distance, and a short
// simulation of the physical EEPN path checking the predicted variance.

#include <cstdio>

#include "cprlab/experiments.hpp"

int main() {
  using namespace cprlab;
  auto link = LinkParams::from_engineering_units(1e6, 1e6, 32e9, 1550.0, 17.0, 0.0);
  std::printf("crossover distance L0 = %.2f km\n\n", crossover_distance(link) / 1e3);
  std::printf("%-8s %-12s %-12s %-12s %s\n", "km", "laser", "eepn", "total", "eff. linewidth [MHz]");
  for (double km : {0.0, 50.0, 500.0, 1000.0, 2000.0, 5000.0}) {
    link.fiber_length = km * 1e3;
    std::printf("%-8g %-12.4e %-12.4e %-12.4e %.3f\n", km, laser_pn_variance(link), eepn_variance(link),
                total_variance(link), effective_linewidth(link) / 1e6);
  }

  link.fiber_length = 1000e3;
  const auto m = measure_eepn(link, 200000, 42);
  std::printf("\n1000 km signal path, %llu symbols:\n", static_cast<unsigned long long>(m.symbols));
  std::printf("  predicted EEPN variance  %.4e rad^2\n", m.predicted);
  std::printf("  measured phase variance  %.4e (%.2f of prediction)\n", m.phase_variance, m.phase_variance / m.predicted);
  std::printf("  measured error power     %.4e (%.2f of prediction)\n", m.error_power, m.error_power / m.predicted);
}
