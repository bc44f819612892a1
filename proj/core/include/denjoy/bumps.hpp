#ifndef DENJOY_BUMPS_HPP
#define DENJOY_BUMPS_HPP

#include <vector>

#include "denjoy/expr.hpp"
#include "denjoy/interval.hpp"

namespace denjoy {

// Smooth monotone connectors. Both are scale-invariant in shape: the inner
// mollifier scale equals the window width, so derivative magnitudes grow only
// by the expected 1/width^m factor.
ExprPtr rise01(double p, double q);  // 0 at p, 1 at q, all orders vanish at both ends
ExprPtr fall10(double p, double q);  // 1 at p, 0 at q, all orders vanish at both ends

// sup of |d^m e| over [lo,hi] for m = 0..max_order (sampled with edge refinement).
std::vector<double> measure_norms(const ExprPtr& e, double lo, double hi, int max_order);

// Minimum of f'(x)/g(x) over (lo,hi) for positive g; used to size amplitudes
// against monotonicity margins. Returns +inf when g vanishes identically.
double min_ratio(const ExprPtr& numer, const ExprPtr& denom, double lo, double hi);

// Dense linear solve with partial pivoting (small systems only).
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b);

// Junction polynomial: value v and vanishing derivatives 1..k-1 at the
// junction coordinate jc, leading order exactly k, and prescribed one-sided
// data (value, derivatives 1..data.size()-1) at the far coordinate.
// erase_left: piece lives on [far, jc] and rises to v (junction on the right);
// otherwise it lives on [jc, far] rising from v.
struct JunctionPoly {
  ExprPtr expr;
  std::vector<double> gamma;  // coefficients of u^{k+j}, u = |x - jc|
  double leading_derivative;  // |d^k P| at the junction
  bool monotone;              // P' >= 0 sampled over the span
};
JunctionPoly solve_junction_poly(double jc, double far, double v, int k_lead,
                                 const std::vector<double>& data, bool erase_left);

// Two-sided Hermite polynomial matching data0 at x1 and data1 at x2
// (value, d1, d2, ...). Returned in monomial form centered at x1.
ExprPtr hermite_poly(double x1, double x2, const std::vector<double>& data0,
                     const std::vector<double>& data1);

enum class BumpKind { FlatToFlat, FlatToOrderK };

// Monotone connector expression on a window, per operator contracts:
// FlatToFlat -> amplitude * rise01; FlatToOrderK -> amplitude * (x-lo)^k.
ExprPtr bump_primitive(BumpKind kind, const IntervalOnCircle& window, double amplitude,
                       int k = 2);

}  // namespace denjoy

#endif
