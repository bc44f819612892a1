#ifndef DENJOY_ROTATION_HPP
#define DENJOY_ROTATION_HPP

#include <vector>

#include "denjoy/map_descriptor.hpp"

namespace denjoy {

// Two-sided rotation number bracket from a single orbit segment. For a
// monotone degree-one lift, (F^n(x0) - x0 - 1)/n <= rho <= (F^n(x0) - x0 + 1)/n
// unconditionally, so width() is 2/n by construction.
struct EnclosureResult {
  double delta = 0.0;  // F^n(x0) - x0
  long n = 0;
  double x0 = 0.0;

  double lower() const { return (delta - 1.0) / static_cast<double>(n); }
  double upper() const { return (delta + 1.0) / static_cast<double>(n); }
  double width() const { return 2.0 / static_cast<double>(n); }
  double mid() const { return delta / static_cast<double>(n); }
  bool contains(double rho) const { return lower() <= rho && rho <= upper(); }
  bool intersects(double lo, double hi) const { return lower() <= hi && lo <= upper(); }
};

struct TuneResult {
  double t0 = 0.0;
  EnclosureResult enclosure;
  int bisection_steps = 0;
  double residual_half_width = 0.0;
};

EnclosureResult rotation_enclosure(const MapDescriptor& M, long n, double x0);

// Bisection on the translation family F + t for a target rotation number.
// Requires tol >= 2/n: the enclosure cannot certify finer than its width.
TuneResult tune_translation(const MapDescriptor& M, double rho_star, double tol, long n);

// First K continued-fraction convergent denominators q_1 < q_2 < ... of
// rho in (0,1). Throws RationalDetected if the expansion terminates early.
std::vector<long> return_times(double rho_star, int K);

}  // namespace denjoy

#endif
