#pragma once

#include <cstdint>

namespace corona {

// First-order radio model coefficients. Energies are joules, distances meters.
//
// eps_fs is sometimes quoted as "10 pJ/bit/4m^2"; here it is the usual 10 pJ/bit/m^2.
struct RadioParams {
  double e_elec = 50e-9;      // J/bit, shared by transmitter and receiver electronics
  double eps_fs = 10e-12;     // J/bit/m^2, free-space amplifier
  double eps_mp = 0.0013e-12; // J/bit/m^4, multipath amplifier
  double e_agg = 5e-9;        // J/bit/signal
  double d0 = 0.0;            // crossover distance; see crossover_distance()

  // Default constants with d0 = sqrt(eps_fs / eps_mp) (about 87.7 m).
  static RadioParams defaults();

  // Distance at which both amplifier branches cost the same.
  static double crossover_distance(double eps_fs, double eps_mp);

  // Throws std::invalid_argument unless every coefficient is strictly positive.
  void validate() const;
};

// k * (e_elec + eps_fs d^2) below d0, k * (e_elec + eps_mp d^4) at or above it.
double tx_energy(const RadioParams& radio, std::int64_t bits, double distance);

double rx_energy(const RadioParams& radio, std::int64_t bits);

double agg_energy(const RadioParams& radio, std::int64_t bits, std::int64_t signals);

}  // namespace corona
