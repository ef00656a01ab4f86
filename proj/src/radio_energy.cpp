#include "corona/radio_energy.hpp"

#include <cmath>
#include <stdexcept>

namespace corona {

RadioParams RadioParams::defaults() {
  RadioParams p;
  p.d0 = crossover_distance(p.eps_fs, p.eps_mp);
  return p;
}

double RadioParams::crossover_distance(double eps_fs, double eps_mp) {
  if (!(eps_fs > 0.0) || !(eps_mp > 0.0)) {
    throw std::invalid_argument("amplifier coefficients must be positive");
  }
  return std::sqrt(eps_fs / eps_mp);
}

void RadioParams::validate() const {
  if (!(e_elec > 0.0) || !(eps_fs > 0.0) || !(eps_mp > 0.0) || !(e_agg > 0.0) ||
      !(d0 > 0.0)) {
    throw std::invalid_argument("radio coefficients must be strictly positive");
  }
}

double tx_energy(const RadioParams& radio, std::int64_t bits, double distance) {
  if (bits < 0) throw std::invalid_argument("tx_energy: negative bit count");
  if (!(distance >= 0.0)) throw std::invalid_argument("tx_energy: negative distance");
  const double k = static_cast<double>(bits);
  const double d2 = distance * distance;
  if (distance < radio.d0) return k * (radio.e_elec + radio.eps_fs * d2);
  return k * (radio.e_elec + radio.eps_mp * d2 * d2);
}

double rx_energy(const RadioParams& radio, std::int64_t bits) {
  if (bits < 0) throw std::invalid_argument("rx_energy: negative bit count");
  return radio.e_elec * static_cast<double>(bits);
}

double agg_energy(const RadioParams& radio, std::int64_t bits, std::int64_t signals) {
  if (bits < 0 || signals < 0) throw std::invalid_argument("agg_energy: negative input");
  return radio.e_agg * static_cast<double>(bits) * static_cast<double>(signals);
}

}  // namespace corona
