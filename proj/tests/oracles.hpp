#ifndef DENJOY_TESTS_ORACLES_HPP
#define DENJOY_TESTS_ORACLES_HPP

// Independent oracles used to freeze expected values. These deliberately
// avoid the implementation paths they check.

#include <cmath>
#include <functional>
#include <vector>

#include "denjoy/interval.hpp"
#include "denjoy/map_descriptor.hpp"

namespace oracles {

// Central finite differences with two upward Richardson levels. The stencils
// act on g(t) = f(x+t) - f(x) so the constant part cancels exactly instead of
// through floating subtraction; steps widen with the order to keep the
// remaining cancellation below the truncation error.
inline double fd_derivative(const std::function<double(double)>& f, int m, double x,
                            double h = 0.0) {
  if (h <= 0.0) h = m <= 2 ? 1e-4 : 2e-3;
  const double fx = f(x);
  auto g = [&](double t) { return f(x + t) - fx; };
  auto stencil = [&](double hh) -> double {
    switch (m) {
      case 1:
        return (g(hh) - g(-hh)) / (2 * hh);
      case 2:
        return (g(hh) - 2 * g(0.0) + g(-hh)) / (hh * hh);
      case 3:
        return (g(2 * hh) - 2 * g(hh) + 2 * g(-hh) - g(-2 * hh)) / (2 * hh * hh * hh);
      case 4:
        return (g(2 * hh) - 4 * g(hh) + 6 * g(0.0) - 4 * g(-hh) + g(-2 * hh)) /
               (hh * hh * hh * hh);
      default:
        return 0.0;
    }
  };
  auto rich1 = [&](double hh) { return (4.0 * stencil(hh) - stencil(2 * hh)) / 3.0; };
  return (16.0 * rich1(h) - rich1(2 * h)) / 15.0;
}

// Brute-force hit time of the interval orbit under pure endpoint iteration.
inline long brute_hit_time(const std::function<double(double)>& lift, double j_lo, double j_hi,
                           double u_lo, double u_hi, long m_max) {
  using denjoy::frac_part;
  double lo = j_lo, hi = j_hi;
  double ulen = u_hi - u_lo;
  for (long m = 1; m <= m_max; ++m) {
    double flo = lift(lo), fhi = lift(hi);
    double len = fhi - flo;
    lo = frac_part(flo);
    hi = lo + len;
    double off = frac_part(lo - u_lo);
    bool meet = (len == 0.0) ? (off > 0 && off < ulen) : (off < ulen || off + len > 1.0);
    if (meet) return m;
  }
  return -1;
}

// Continued-fraction denominators by direct long-double expansion.
inline std::vector<long> cf_denominators(long double x, int K) {
  std::vector<long> qs;
  long qp = 0, qc = 1;
  for (int i = 0; i < K; ++i) {
    long double inv = 1.0L / x;
    long a = static_cast<long>(std::floor(inv));
    long qn = a * qc + qp;
    qs.push_back(qn);
    qp = qc;
    qc = qn;
    x = inv - a;
    if (x < 1e-15L) break;
  }
  return qs;
}

// Piecewise-linear interpolant of a lift on a dense grid.
struct DenseInterp {
  std::vector<double> values;
  int n = 0;
  explicit DenseInterp(const denjoy::MapDescriptor& M, int grid = 100000) : n(grid) {
    values.resize(grid + 1);
    for (int i = 0; i <= grid; ++i) values[i] = M.eval(static_cast<double>(i) / grid);
  }
  double operator()(double x) const {
    double k = std::floor(x);
    double f = (x - k) * n;
    int i = static_cast<int>(f);
    if (i >= n) i = n - 1;
    double t = f - i;
    return values[i] * (1 - t) + values[i + 1] * t + k;
  }
};

// Telescoped flat length: l - 2*eps*sum_{i<n} 2^{-i}.
inline double telescoped_length(double l, double eps, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::pow(0.5, i);
  return l - 2.0 * eps * s;
}

}  // namespace oracles

#endif
