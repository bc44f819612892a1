#include "denjoy/rotation.hpp"

#include <cmath>

#include "denjoy/errors.hpp"

namespace denjoy {

EnclosureResult rotation_enclosure(const MapDescriptor& M, long n, double x0) {
  if (n < 1) throw Error("rotation_enclosure: n must be >= 1");
  double x = frac_part(x0);
  long winding = 0;
  for (long i = 0; i < n; ++i) x = M.step_reduced(x, winding);
  double delta = static_cast<double>(winding) + x - frac_part(x0);
  return {delta, n, x0};
}

TuneResult tune_translation(const MapDescriptor& M, double rho_star, double tol, long n) {
  if (!(rho_star >= 0.0 && rho_star < 1.0)) throw Error("tune_translation: target outside [0,1)");
  if (tol < 2.0 / static_cast<double>(n))
    throw Error("tune_translation: tol below enclosure resolution 2/n (tol=" +
                format_double(tol) + ", 2/n=" + format_double(2.0 / static_cast<double>(n)) +
                ")");

  // translated() renormalizes F(0) into [0,1); add the dropped integer back
  // so the swept rotation number is monotone in t (rho_0 up to rho_0 + 1).
  const double f0 = M.eval(0.0);
  struct Probe {
    EnclosureResult enc;
    double off;
  };
  auto enc_at = [&](double t) -> Probe {
    return {rotation_enclosure(M.translated(t), n, 0.0), std::floor(f0 + t)};
  };

  double lo = 0.0, hi = 1.0 - 1e-12;
  Probe plo = enc_at(lo);
  Probe phi = enc_at(hi);
  // lift the target into the swept window (rotation number is mod 1)
  double target = rho_star + std::ceil(plo.enc.mid() + plo.off - rho_star - 2.0 / n);
  auto hits = [&](const Probe& p) {
    return p.enc.intersects(target - p.off - tol, target - p.off + tol);
  };
  if (plo.enc.lower() + plo.off > target + tol || phi.enc.upper() + phi.off < target - tol)
    throw NotBracketed("tune_translation: rotation numbers at t=0 and t->1 do not straddle the "
                       "target (corrupt descriptor?)");
  if (hits(plo)) return {lo, plo.enc, 0, 0.5 * (hi - lo)};

  // The staircase is flat on rational plateaus, so the bracket has to shrink
  // well past tol/4 until the candidate's enclosure actually meets the
  // window; both termination conditions are required.
  int steps = 0;
  Probe pm = plo;
  double mid = lo;
  while (steps < 200) {
    mid = 0.5 * (lo + hi);
    pm = enc_at(mid);
    ++steps;
    if (hits(pm) && hi - lo < tol / 4.0) return {mid, pm.enc, steps, 0.5 * (hi - lo)};
    if (pm.enc.mid() + pm.off < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-17) break;
  }
  mid = 0.5 * (lo + hi);
  pm = enc_at(mid);
  if (!hits(pm))
    throw NotBracketed("tune_translation: bisection converged but the enclosure misses the "
                       "target window");
  return {mid, pm.enc, steps, 0.5 * (hi - lo)};
}

std::vector<long> return_times(double rho_star, int K) {
  if (!(rho_star > 0.0 && rho_star < 1.0)) throw Error("return_times: rho must be in (0,1)");
  if (K < 1) throw Error("return_times: K must be >= 1");
  std::vector<long> qs;
  long q_prev = 0, q_cur = 1;  // q_{-1}, q_0
  double x = rho_star;
  for (int i = 0; i < K; ++i) {
    // partial quotient of 1/x
    if (x < 1e-13)
      throw RationalDetected("continued fraction terminated after " + std::to_string(i) +
                             " terms");
    double inv = 1.0 / x;
    double a_d = std::floor(inv);
    double rem = inv - a_d;
    // Treat near-integer reciprocals as termination (rational input).
    if (rem < 1e-10 || rem > 1.0 - 1e-10) {
      if (rem > 1.0 - 1e-10) a_d += 1.0;
      long a = static_cast<long>(a_d);
      long q_next = a * q_cur + q_prev;
      qs.push_back(q_next);
      if (static_cast<int>(qs.size()) < K)
        throw RationalDetected("continued fraction terminated after " +
                               std::to_string(qs.size()) + " terms");
      return qs;
    }
    long a = static_cast<long>(a_d);
    long q_next = a * q_cur + q_prev;
    if (q_next < q_cur)  // overflow guard
      throw Error("return_times: denominator overflow");
    qs.push_back(q_next);
    q_prev = q_cur;
    q_cur = q_next;
    x = rem;  // next term operates on frac(1/x)
  }
  return qs;
}

}  // namespace denjoy
