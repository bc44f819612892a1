#include "denjoy/bumps.hpp"

#include <cmath>
#include <limits>

#include "denjoy/errors.hpp"

namespace denjoy {

ExprPtr rise01(double p, double q) {
  if (!(q > p)) throw Error("rise01: empty window");
  double w = q - p;
  double C = std::exp(-1.0);
  ExprPtr phi = sum({kconst(C), prod({kconst(-1.0), molll(w, q)})});
  return prod({kconst(std::exp(1.0)), comp(mollr(C, 0.0), phi)});
}

ExprPtr fall10(double p, double q) {
  if (!(q > p)) throw Error("fall10: empty window");
  double w = q - p;
  double C = std::exp(-1.0);
  ExprPtr phi = sum({kconst(C), prod({kconst(-1.0), mollr(w, p)})});
  return prod({kconst(std::exp(1.0)), comp(mollr(C, 0.0), phi)});
}

std::vector<double> measure_norms(const ExprPtr& e, double lo, double hi, int max_order) {
  std::vector<double> out(max_order + 1, 0.0);
  ExprPtr cur = e;
  double w = hi - lo;
  for (int m = 0; m <= max_order; ++m) {
    double best = 0.0;
    for (int s = 0; s < 512; ++s) {
      double x = lo + w * (s + 0.5) / 512;
      double v = std::abs(cur->eval(x));
      if (v > best) best = v;
    }
    for (int g = 1; g <= 40; ++g) {
      double off = w * std::pow(0.5, 1 + 0.5 * g);
      for (double x : {lo + off, hi - off}) {
        double v = std::abs(cur->eval(x));
        if (v > best) best = v;
      }
    }
    out[m] = best;
    if (m < max_order) cur = derivative(cur);
  }
  return out;
}

double min_ratio(const ExprPtr& numer, const ExprPtr& denom, double lo, double hi) {
  double best = std::numeric_limits<double>::infinity();
  double w = hi - lo;
  auto probe = [&](double x) {
    double d = denom->eval(x);
    if (d <= 0.0) return;
    double n = numer->eval(x);
    double r = n / d;
    if (r < best) best = r;
  };
  for (int s = 0; s < 1024; ++s) probe(lo + w * (s + 0.5) / 1024);
  for (int g = 1; g <= 40; ++g) {
    double off = w * std::pow(0.5, 1 + 0.5 * g);
    probe(lo + off);
    probe(hi - off);
  }
  return best;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) throw Error("solve_dense: singular system");
    std::swap(A[col], A[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= A[ri][c] * x[c];
    x[ri] = s / A[ri][ri];
  }
  return x;
}

JunctionPoly solve_junction_poly(double jc, double far, double v, int k_lead,
                                 const std::vector<double>& data, bool erase_left) {
  if (data.empty()) throw Error("solve_junction_poly: no data");
  const int nd = static_cast<int>(data.size()) - 1;  // highest matched derivative order
  const int nc = nd + 1;
  double W = erase_left ? jc - far : far - jc;
  if (!(W > 0.0)) throw Error("solve_junction_poly: empty span");

  auto fall = [](int a, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= static_cast<double>(a - i);
    return r;
  };

  // In junction coordinates u (= jc - x or x - jc) the piece is
  //   P = v +- Q(u),  Q(u) = gamma0 u^k + sum_j s_j u^{K + j*stride},
  // with targets Q^{(m)}(W) = q_m derived from the far-side data. The small
  // leading term fixes the tangency order; the high-power tail carries the
  // rise, with K large enough that the slope demanded at the far knot is
  // reachable by a monotone profile (the span crosses the erased flat, where
  // the rise must stay near zero).
  std::vector<double> q(nc, 0.0);
  q[0] = erase_left ? v - data[0] : data[0] - v;
  double Wm = 1.0;
  for (int m = 1; m < nc; ++m) {
    Wm *= W;
    double sgn = erase_left ? ((m % 2 == 0) ? -1.0 : 1.0) : 1.0;
    q[m] = sgn * data[m] * Wm;  // stored as Q^{(m)}(W) * W^m for scaling
  }
  const double rise = q[0];
  if (!(rise > 0.0)) throw Error("solve_junction_poly: far value does not leave room to rise");
  if (nc > 1 && q[1] < 0.0) throw Error("solve_junction_poly: far slope is negative");

  const double gamma0 = 0.05 * rise / std::pow(W, k_lead);
  double slope_ratio = nc > 1 ? q[1] / rise : 1.0;
  int K = std::max(k_lead + 2, static_cast<int>(std::ceil(slope_ratio)) + 2);

  for (int attempt = 0; attempt < 10; ++attempt) {
    int stride = std::max(1, K / 16);
    // Unknowns tau_j = s_j * W^{K + j*stride}; row m: sum_j tau_j *
    // fall(K+j*stride, m) = q_m * W^m-scaled rhs minus the leading term.
    std::vector<std::vector<double>> A(nc, std::vector<double>(nc, 0.0));
    std::vector<double> rhs(nc, 0.0);
    for (int m = 0; m < nc; ++m) {
      for (int j = 0; j < nc; ++j) A[m][j] = fall(K + j * stride, m);
      rhs[m] = q[m] - gamma0 * fall(k_lead, m) * std::pow(W, k_lead);
    }
    std::vector<double> tau = solve_dense(A, rhs);

    std::vector<double> gamma{gamma0};
    std::vector<int> powers{k_lead};
    for (int j = 0; j < nc; ++j) {
      powers.push_back(K + j * stride);
      gamma.push_back(tau[j] / std::pow(W, K + j * stride));
    }

    std::vector<ExprPtr> terms{kconst(v)};
    for (std::size_t i = 0; i < gamma.size(); ++i) {
      int p = powers[i];
      double coef = gamma[i];
      if (erase_left) coef = -coef * ((p % 2 == 0) ? 1.0 : -1.0);  // (jc-x)^p
      if (coef != 0.0) terms.push_back(prod({kconst(coef), mon(jc, p)}));
    }
    ExprPtr P = sum(std::move(terms));

    ExprPtr dP = derivative(P);
    double lo = erase_left ? far : jc;
    double hi = erase_left ? jc : far;
    bool monotone = true;
    for (int s = 0; s < 768 && monotone; ++s) {
      double x = lo + (hi - lo) * (s + 0.5) / 768;
      if (dP->eval(x) < -1e-18) monotone = false;
    }
    for (int g = 1; g <= 40 && monotone; ++g) {
      double off = (hi - lo) * std::pow(0.5, 1 + 0.5 * g);
      if (dP->eval(lo + off) < -1e-18 || dP->eval(hi - off) < -1e-18) monotone = false;
    }
    if (monotone || attempt == 9) {
      double lead = gamma0;
      for (int i = 0; i < k_lead; ++i) lead *= static_cast<double>(k_lead - i);
      return {P, gamma, std::abs(lead), monotone};
    }
    K = K + K / 2 + 1;
  }
  throw Error("solve_junction_poly: unreachable");
}

ExprPtr hermite_poly(double x1, double x2, const std::vector<double>& data0,
                     const std::vector<double>& data1) {
  const int n0 = static_cast<int>(data0.size());
  const int n1 = static_cast<int>(data1.size());
  const int n = n0 + n1;
  double W = x2 - x1;
  if (!(W > 0.0)) throw Error("hermite_poly: empty span");

  // P(x) = sum c_i u^i, u = (x - x1)/W; conditions in u-space.
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  auto fall = [](int a, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= static_cast<double>(a - i);
    return r;
  };
  for (int m = 0; m < n0; ++m) {
    A[m][m] = fall(m, m);  // d^m u^i at u=0 is nonzero only at i=m
    b[m] = data0[m] * std::pow(W, m);
  }
  for (int m = 0; m < n1; ++m) {
    for (int i = 0; i < n; ++i) A[n0 + m][i] = fall(i, m);  // at u=1
    b[n0 + m] = data1[m] * std::pow(W, m);
  }
  std::vector<double> c = solve_dense(A, b);
  std::vector<ExprPtr> terms;
  for (int i = 0; i < n; ++i) {
    double coef = c[i] / std::pow(W, i);
    if (coef == 0.0) continue;
    terms.push_back(i == 0 ? kconst(coef) : prod({kconst(coef), mon(x1, i)}));
  }
  return sum(std::move(terms));
}

ExprPtr bump_primitive(BumpKind kind, const IntervalOnCircle& window, double amplitude,
                       int k) {
  if (!(window.length() > 0.0)) throw Error("bump_primitive: window must have positive length");
  if (amplitude == 0.0) return kconst(0.0);
  switch (kind) {
    case BumpKind::FlatToFlat:
      return prod({kconst(amplitude), rise01(window.lo, window.hi)});
    case BumpKind::FlatToOrderK:
      if (k < 1) throw Error("bump_primitive: order must be >= 1");
      return prod({kconst(amplitude), mon(window.lo, k)});
  }
  return kconst(0.0);
}

}  // namespace denjoy
