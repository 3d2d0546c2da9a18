#include "mirroreyes/rng.hpp"

#include <cmath>

namespace mirroreyes {

double Rng::normal(double mean, double sd) {
  // Marsaglia polar method.
  if (has_spare_) {
    has_spare_ = false;
    return mean + sd * spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = uniform(-1.0, 1.0);
    v = uniform(-1.0, 1.0);
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return mean + sd * u * f;
}

}  // namespace mirroreyes
