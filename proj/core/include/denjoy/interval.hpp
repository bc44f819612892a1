#ifndef DENJOY_INTERVAL_HPP
#define DENJOY_INTERVAL_HPP

#include <cmath>

namespace denjoy {

inline double frac_part(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;  // guards against rounding at integers
  return f;
}

// Arc on the circle given in lift coordinates: lo <= hi, hi - lo < 1.
// Zero length is allowed and means a single point (degenerate image of an
// interval through a flat piece).
struct IntervalOnCircle {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool is_point() const { return hi == lo; }
  double mid() const { return 0.5 * (lo + hi); }

  // Membership of a circle point (x taken mod 1) in the open arc.
  bool contains_point(double x) const {
    double f = frac_part(x - lo);
    return f > 0.0 && f < hi - lo;
  }
  // Closed-arc membership with tolerance.
  bool contains_point_closed(double x, double tol = 0.0) const {
    double f = frac_part(x - lo);
    return f <= hi - lo + tol || f >= 1.0 - tol;
  }
};

// Signed circle distance from x to the arc [lo,hi]: 0 if inside (closed),
// otherwise the shorter of the circular gaps to the endpoints.
inline double circle_distance_to(const IntervalOnCircle& I, double x) {
  double f = frac_part(x - I.lo);
  double len = I.hi - I.lo;
  if (f <= len) return 0.0;
  double beyond = f - len;        // gap past hi going forward
  double before = 1.0 - f;        // gap to lo going forward
  return beyond < before ? beyond : before;
}

inline double circle_dist(double x, double y) {
  double d = frac_part(x - y);
  return d < 0.5 ? d : 1.0 - d;
}

// Do two arcs on the circle intersect as open sets?
inline bool arcs_intersect_open(const IntervalOnCircle& A, const IntervalOnCircle& B) {
  if (A.is_point()) return B.contains_point(A.lo);
  if (B.is_point()) return A.contains_point(B.lo);
  // Shift both to a frame where A starts at 0.
  double alen = A.length(), blen = B.length();
  double b0 = frac_part(B.lo - A.lo);
  return b0 < alen || b0 + blen > 1.0;
}

}  // namespace denjoy

#endif
