#include "denjoy/map_descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "denjoy/errors.hpp"

namespace denjoy {

namespace {
constexpr double kBpTol = 1e-13;         // "is this a breakpoint" snap
constexpr double kSideAgreeTol = 1e-9;   // one-sided derivative agreement
constexpr double kDeclareTol = 1e-10;    // structural tangency probe
constexpr double kVerifyTol = 1e-8;      // spec threshold for order checks
constexpr double kHiddenFlatTol = 1e-14;
}  // namespace

void ValidationReport::add(const std::string& check, bool pass, double margin,
                           std::string detail) {
  items.push_back({check, pass, margin, std::move(detail)});
  ok = ok && pass;
}

MapDescriptor::MapDescriptor(std::vector<double> breakpoints, std::vector<Piece> pieces,
                             std::vector<int> bp_class, double translation)
    : bps_(std::move(breakpoints)),
      pieces_(std::move(pieces)),
      bp_class_(std::move(bp_class)),
      translation_(translation) {
  if (bps_.size() < 2 || pieces_.size() != bps_.size() - 1)
    throw Error("descriptor: breakpoint/piece count mismatch");
  if (bps_.front() != 0.0 || bps_.back() != 1.0)
    throw Error("descriptor: breakpoints must span [0,1]");
  for (std::size_t i = 0; i + 1 < bps_.size(); ++i)
    if (!(bps_[i] < bps_[i + 1])) throw Error("descriptor: breakpoints not increasing");
  if (bp_class_.empty()) bp_class_.assign(bps_.size(), -1);
  if (bp_class_.size() != bps_.size()) throw Error("descriptor: class/breakpoint mismatch");
  for (const auto& p : pieces_)
    if (p.kind == Piece::Kind::Smooth && !p.expr) throw Error("descriptor: smooth piece lacks expression");
  deriv_cache_.assign(pieces_.size(), {});
}

MapDescriptor::MapDescriptor(const MapDescriptor& other)
    : bps_(other.bps_),
      pieces_(other.pieces_),
      bp_class_(other.bp_class_),
      translation_(other.translation_) {
  std::lock_guard<std::mutex> lock(other.cache_mutex_);
  deriv_cache_ = other.deriv_cache_;
}

MapDescriptor& MapDescriptor::operator=(const MapDescriptor& other) {
  if (this == &other) return *this;
  bps_ = other.bps_;
  pieces_ = other.pieces_;
  bp_class_ = other.bp_class_;
  translation_ = other.translation_;
  std::lock_guard<std::mutex> lock(other.cache_mutex_);
  deriv_cache_ = other.deriv_cache_;
  return *this;
}

MapDescriptor::MapDescriptor(MapDescriptor&& other) noexcept
    : bps_(std::move(other.bps_)),
      pieces_(std::move(other.pieces_)),
      bp_class_(std::move(other.bp_class_)),
      translation_(other.translation_),
      deriv_cache_(std::move(other.deriv_cache_)) {}

MapDescriptor& MapDescriptor::operator=(MapDescriptor&& other) noexcept {
  if (this == &other) return *this;
  bps_ = std::move(other.bps_);
  pieces_ = std::move(other.pieces_);
  bp_class_ = std::move(other.bp_class_);
  translation_ = other.translation_;
  deriv_cache_ = std::move(other.deriv_cache_);
  return *this;
}

int MapDescriptor::piece_index(double x) const {
  auto it = std::upper_bound(bps_.begin(), bps_.end(), x);
  int i = static_cast<int>(it - bps_.begin()) - 1;
  if (i < 0) i = 0;
  if (i >= static_cast<int>(pieces_.size())) i = static_cast<int>(pieces_.size()) - 1;
  return i;
}

double MapDescriptor::eval_unit(double x) const {
  const Piece& p = pieces_[piece_index(x)];
  return p.kind == Piece::Kind::Flat ? p.value : p.expr->eval(x);
}

double MapDescriptor::eval(double x) const {
  double k = std::floor(x);
  double f = x - k;
  if (f >= 1.0) {  // rounding right at an integer
    f = 0.0;
    k += 1.0;
  }
  return eval_unit(f) + k;
}

double MapDescriptor::step_reduced(double x, long& winding) const {
  double y = eval_unit(x);
  double k = std::floor(y);
  winding += static_cast<long>(k);
  double f = y - k;
  if (f >= 1.0) {
    f = 0.0;
    winding += 1;
  }
  return f;
}

const ExprPtr& MapDescriptor::piece_derivative(int piece, int m) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto& cache = deriv_cache_[piece];
  if (cache.empty()) cache.push_back(pieces_[piece].expr);
  while (static_cast<int>(cache.size()) <= m) cache.push_back(derivative(cache.back()));
  return cache[m];
}

double MapDescriptor::derivative_at(int m, double x, Side side) const {
  if (m < 0 || m > kMaxOrder)
    throw Error("derivative order out of range (max " + std::to_string(kMaxOrder) + ")");
  double f = frac_part(x);

  // Snap to a breakpoint if we are on one (the set includes 0 == 1).
  int bp = -1;
  for (std::size_t i = 0; i < bps_.size(); ++i) {
    if (std::abs(f - bps_[i]) <= kBpTol) {
      bp = static_cast<int>(i);
      break;
    }
  }
  auto eval_piece = [&](int piece, double at) -> double {
    const Piece& p = pieces_[piece];
    if (p.kind == Piece::Kind::Flat) return m == 0 ? p.value : 0.0;
    return m == 0 ? p.expr->eval(at) : piece_derivative(piece, m)->eval(at);
  };

  if (bp < 0) return eval_piece(piece_index(f), f);

  int n = static_cast<int>(pieces_.size());
  // Left neighbor of breakpoint i is piece i-1 (piece n-1 evaluated at 1 for i==0),
  // right neighbor is piece i (piece 0 at 0 for i==n).
  int ibp = bp;
  double offl = 0.0, offr = 0.0;
  int left_piece, right_piece;
  if (ibp == 0) {
    left_piece = n - 1;
    offl = 1.0;
    right_piece = 0;
  } else if (ibp == static_cast<int>(bps_.size()) - 1) {
    left_piece = n - 1;
    right_piece = 0;
    offr = -1.0;
  } else {
    left_piece = ibp - 1;
    right_piece = ibp;
  }
  double xl = bps_[ibp] + offl * 0.0;  // evaluate at the breakpoint itself
  double at_left = (ibp == 0) ? 1.0 : xl;
  double at_right = (ibp == static_cast<int>(bps_.size()) - 1) ? 0.0 : bps_[ibp];
  (void)offr;
  double vl = eval_piece(left_piece, at_left);
  double vr = eval_piece(right_piece, at_right);
  if (m == 0) {
    // value continuity handles the +1 wrap
    if (ibp == 0) vl -= 1.0;
    if (ibp == static_cast<int>(bps_.size()) - 1) vr += 1.0;
  }
  switch (side) {
    case Side::Left:
      return vl;
    case Side::Right:
      return vr;
    case Side::Auto:
      if (std::abs(vl - vr) > kSideAgreeTol)
        throw BreakpointNonSmooth(bps_[ibp], m,
                                  "one-sided derivatives of order " + std::to_string(m) +
                                      " disagree at breakpoint " + format_double(bps_[ibp]) +
                                      " -- request a side");
      return vr;
  }
  return vr;
}

IntervalOnCircle MapDescriptor::image_interval(const IntervalOnCircle& I) const {
  double flo = eval(I.lo);
  double fhi = eval(I.hi);
  double len = fhi - flo;
  if (len < 0.0) len = 0.0;  // monotone up to rounding
  double lo = frac_part(flo);
  return {lo, lo + len};
}

std::vector<OrbitStep> MapDescriptor::iterate_interval(const IntervalOnCircle& I, int n) const {
  if (n < 1) throw Error("iterate_interval: n must be >= 1");
  std::vector<OrbitStep> out;
  out.reserve(n);
  double lo = frac_part(I.lo);
  double len = I.length();
  double tracked = len;
  const double kExactThreshold = 1e-9;
  for (int j = 1; j <= n; ++j) {
    if (tracked > kExactThreshold) {
      double flo = eval(lo);
      double fhi = eval(lo + tracked);
      double new_len = fhi - flo;
      if (new_len <= 0.0) throw DegenerateOrbit(j);
      lo = frac_part(flo);
      tracked = new_len;
    } else {
      // Endpoints are at (or heading toward) double-resolution collision:
      // propagate the length through the local derivative instead. The
      // midpoint orbit stays exact.
      double mid = frac_part(lo + 0.5 * tracked);
      double slope = derivative_at(1, mid, Side::Auto);
      double fmid = eval(mid);
      if (slope <= 0.0) {
        int pc = piece_index(mid);
        if (pieces_[pc].kind == Piece::Kind::Flat) throw DegenerateOrbit(j);
        slope = 0.0;
      }
      tracked *= slope;
      if (tracked <= 0.0) throw DegenerateOrbit(j);
      lo = frac_part(fmid - 0.5 * tracked);
    }
    out.push_back({lo, lo + tracked, tracked});
  }
  return out;
}

std::vector<IntervalOnCircle> MapDescriptor::flat_set() const {
  int n = static_cast<int>(pieces_.size());
  std::vector<bool> used(n, false);
  std::vector<IntervalOnCircle> flats;
  for (int i = 0; i < n; ++i) {
    if (used[i] || pieces_[i].kind != Piece::Kind::Flat) continue;
    int first = i;
    int last = i;
    used[i] = true;
    while (last + 1 < n && pieces_[last + 1].kind == Piece::Kind::Flat &&
           std::abs(pieces_[last + 1].value - pieces_[last].value) < 1e-12) {
      ++last;
      used[last] = true;
    }
    flats.push_back({bps_[first], bps_[last + 1]});
  }
  // Merge across the 0/1 wrap.
  if (flats.size() >= 2 && flats.front().lo == 0.0 && flats.back().hi == 1.0 &&
      std::abs(pieces_.front().value - (pieces_.back().value - 1.0)) < 1e-12) {
    IntervalOnCircle back = flats.back();
    IntervalOnCircle front = flats.front();
    flats.pop_back();
    flats.erase(flats.begin());
    flats.insert(flats.begin(), {back.lo, 1.0 + front.hi});
  }

  // Hidden-flat detection on smooth pieces: first derivative collapsing to
  // zero over a run of samples. Short runs that terminate at a declared
  // junction endpoint are the expected tangency decay, not a hidden flat.
  constexpr int kSamples = 64;
  for (int i = 0; i < n; ++i) {
    const Piece& p = pieces_[i];
    if (p.kind != Piece::Kind::Smooth) continue;
    ExprPtr d1 = piece_derivative(i, 1);
    double w = bps_[i + 1] - bps_[i];
    int run = 0, run_start = -1;
    auto flag_if_bad = [&](int run_len, int start) {
      if (run_len == 0) return;
      bool touches_end = (start == 0) || (start + run_len == kSamples);
      int limit = touches_end ? 16 : 3;
      if (run_len >= limit)
        throw HiddenFlatRegion(i, "smooth piece " + std::to_string(i) +
                                       " has first derivative below 1e-14 on " +
                                       std::to_string(run_len) + " consecutive samples");
    };
    for (int s = 0; s < kSamples; ++s) {
      double x = bps_[i] + w * (s + 0.5) / kSamples;
      double v = std::abs(d1->eval(x));
      if (v < kHiddenFlatTol) {
        if (run == 0) run_start = s;
        ++run;
      } else {
        flag_if_bad(run, run_start);
        run = 0;
      }
    }
    flag_if_bad(run, run_start);
  }
  return flats;
}

TangencyResult MapDescriptor::tangency_order(double endpoint, Side side) const {
  if (side == Side::Auto) throw Error("tangency_order: side must be Left or Right");
  double f = frac_part(endpoint);
  int bp = -1;
  for (std::size_t i = 0; i < bps_.size(); ++i)
    if (std::abs(f - bps_[i]) <= 1e-12) {
      bp = static_cast<int>(i);
      break;
    }
  if (bp < 0) throw PreconditionViolated("tangency_order: endpoint is not a breakpoint");

  int n = static_cast<int>(pieces_.size());
  int piece;
  if (side == Side::Left)
    piece = (bp == 0) ? n - 1 : bp - 1;
  else
    piece = (bp == static_cast<int>(bps_.size()) - 1) ? 0 : bp;
  if (pieces_[piece].kind == Piece::Kind::Flat)
    throw PreconditionViolated("tangency_order: requested side is a flat piece");

  auto one_sided = [&](int m) { return derivative_at(m, f, side); };

  int declared = kInfiniteOrder;
  for (int m = 1; m <= kMaxOrder; ++m) {
    if (std::abs(one_sided(m)) > kDeclareTol) {
      declared = m;
      break;
    }
  }
  if (declared == kInfiniteOrder) {
    int cap = std::min(8, kMaxOrder);
    for (int m = 1; m <= cap; ++m) {
      double v = std::abs(one_sided(m));
      if (v > kVerifyTol)
        throw OrderMismatch(kInfiniteOrder, m,
                            "mollifier junction shows nonvanishing derivative of order " +
                                std::to_string(m));
    }
    return {kInfiniteOrder};
  }
  for (int m = 1; m < declared; ++m) {
    double v = std::abs(one_sided(m));
    if (v >= kVerifyTol)
      throw OrderMismatch(declared, m, "derivative of order " + std::to_string(m) +
                                           " fails to vanish at junction (" + format_double(v) +
                                           ")");
  }
  double lead = std::abs(one_sided(declared));
  if (lead <= kVerifyTol)
    throw OrderMismatch(declared, declared,
                        "leading derivative at junction is in the ambiguous band (" +
                            format_double(lead) + ")");
  return {declared};
}

ValidationReport MapDescriptor::validate() const {
  ValidationReport rep;
  int n = static_cast<int>(pieces_.size());

  // Continuity at every breakpoint (degree-one wrap included).
  double worst_gap = 0.0;
  std::string where;
  for (std::size_t i = 0; i < bps_.size(); ++i) {
    double vl, vr;
    if (i == 0) continue;  // covered by the wrap check at i == size-1
    double x = bps_[i];
    const Piece& pl = pieces_[i - 1];
    vl = pl.kind == Piece::Kind::Flat ? pl.value : pl.expr->eval(x);
    if (i == bps_.size() - 1) {
      const Piece& pr = pieces_[0];
      vr = (pr.kind == Piece::Kind::Flat ? pr.value : pr.expr->eval(0.0)) + 1.0;
    } else {
      const Piece& pr = pieces_[i];
      vr = pr.kind == Piece::Kind::Flat ? pr.value : pr.expr->eval(x);
    }
    double gap = std::abs(vl - vr);
    if (gap > worst_gap) {
      worst_gap = gap;
      where = format_double(x);
    }
  }
  rep.add("continuity", worst_gap <= 1e-12, 1e-12 - worst_gap,
          worst_gap > 1e-12 ? "worst gap " + format_double(worst_gap) + " at " + where : "");

  // Monotonicity: endpoint values nondecreasing and sampled derivative >= 0.
  double min_slope = 0.0;
  double min_step = 0.0;
  std::string mono_where;
  bool mono_ok = true;
  for (int i = 0; i < n; ++i) {
    const Piece& p = pieces_[i];
    double lo = bps_[i], hi = bps_[i + 1];
    double vlo = p.kind == Piece::Kind::Flat ? p.value : p.expr->eval(lo);
    double vhi = p.kind == Piece::Kind::Flat ? p.value : p.expr->eval(hi);
    if (vhi - vlo < min_step) {
      min_step = vhi - vlo;
      mono_where = "piece " + std::to_string(i);
    }
    if (p.kind == Piece::Kind::Smooth) {
      ExprPtr d1 = piece_derivative(i, 1);
      for (int s = 0; s < 64; ++s) {
        double x = lo + (hi - lo) * (s + 0.5) / 64;
        double v = d1->eval(x);
        if (v < min_slope) {
          min_slope = v;
          mono_where = "piece " + std::to_string(i) + " at x=" + format_double(x);
        }
      }
    }
  }
  mono_ok = min_slope >= -1e-12 && min_step >= -1e-12;
  rep.add("monotone", mono_ok, std::min(min_slope, min_step) + 1e-12,
          mono_ok ? "" : "decreasing at " + mono_where);

  // Degree one is structural (period-1 extension); report the wrap identity.
  rep.add("degree_one", true, 0.0);

  double f0 = eval_unit(0.0);
  rep.add("normalization", f0 >= 0.0 && f0 < 1.0, std::min(f0, 1.0 - f0),
          "F(0)=" + format_double(f0));

  // Declared smoothness class at breakpoints.
  double worst_jump = 0.0;
  bool class_ok = true;
  std::string class_where;
  for (std::size_t i = 0; i < bps_.size() - 1; ++i) {  // 0 and 1 are the same point
    int cls = bp_class_[i];
    if (cls == 0) continue;
    int cap = cls < 0 ? 8 : std::min(cls, 8);
    for (int m = 1; m <= cap; ++m) {
      double vl = derivative_at(m, bps_[i], Side::Left);
      double vr = derivative_at(m, bps_[i], Side::Right);
      double jump = std::abs(vl - vr);
      if (jump > kSideAgreeTol && jump > worst_jump) {
        worst_jump = jump;
        class_ok = false;
        class_where =
            "order " + std::to_string(m) + " at breakpoint " + format_double(bps_[i]);
      }
    }
  }
  rep.add("breakpoint_class", class_ok, kSideAgreeTol - worst_jump, class_where);

  bool flats_ok = true;
  for (int i = 0; i < n; ++i)
    if (pieces_[i].kind == Piece::Kind::Flat && !(bps_[i + 1] > bps_[i])) flats_ok = false;
  rep.add("flat_positive_length", flats_ok, 0.0);

  return rep;
}

MapDescriptor MapDescriptor::translated(double t) const {
  std::vector<Piece> ps = pieces_;
  for (auto& p : ps) {
    if (p.kind == Piece::Kind::Flat)
      p.value += t;
    else
      p.expr = sum({p.expr, kconst(t)});
  }
  MapDescriptor out(bps_, std::move(ps), bp_class_, translation_ + t);
  double k0 = std::floor(out.eval_unit(0.0));
  if (k0 != 0.0) {
    for (auto& p : out.pieces_) {
      if (p.kind == Piece::Kind::Flat)
        p.value -= k0;
      else
        p.expr = sum({p.expr, kconst(-k0)});
    }
    out.deriv_cache_.assign(out.pieces_.size(), {});
  }
  return out;
}

MapDescriptor MapDescriptor::with_breakpoint(double x) const {
  if (!(x > 0.0 && x < 1.0)) throw Error("with_breakpoint: x must be inside (0,1)");
  for (double b : bps_)
    if (std::abs(b - x) <= kBpTol) return *this;
  int pi = piece_index(x);
  std::vector<double> bps = bps_;
  std::vector<Piece> ps = pieces_;
  std::vector<int> cls = bp_class_;
  bps.insert(bps.begin() + pi + 1, x);
  ps.insert(ps.begin() + pi, ps[pi]);
  cls.insert(cls.begin() + pi + 1, -1);
  return MapDescriptor(std::move(bps), std::move(ps), std::move(cls), translation_);
}

MapDescriptor MapDescriptor::replace_range(double x1, double x2, std::vector<double> inner_bps,
                                           std::vector<Piece> inner_pieces,
                                           std::vector<int> inner_classes) const {
  if (!(0.0 <= x1 && x1 < x2 && x2 <= 1.0)) throw Error("replace_range: bad range");
  if (inner_pieces.size() != inner_bps.size() + 1)
    throw Error("replace_range: inner piece/knot mismatch");
  if (inner_classes.size() != inner_bps.size() + 2)
    throw Error("replace_range: inner class count must cover x1, knots, x2");
  MapDescriptor base = *this;
  if (x1 > 0.0) base = base.with_breakpoint(x1);
  if (x2 < 1.0) base = base.with_breakpoint(x2);

  std::vector<double> bps;
  std::vector<Piece> ps;
  std::vector<int> cls;
  std::size_t i = 0;
  // left part
  while (i < base.pieces_.size() && base.bps_[i + 1] <= x1 + kBpTol) {
    bps.push_back(base.bps_[i]);
    cls.push_back(base.bp_class_[i]);
    ps.push_back(base.pieces_[i]);
    ++i;
  }
  bps.push_back(x1);
  cls.push_back(inner_classes.front());
  for (std::size_t k = 0; k < inner_pieces.size(); ++k) {
    ps.push_back(inner_pieces[k]);
    if (k < inner_bps.size()) {
      bps.push_back(inner_bps[k]);
      cls.push_back(inner_classes[k + 1]);
    }
  }
  // skip replaced pieces
  while (i < base.pieces_.size() && base.bps_[i + 1] <= x2 + kBpTol) ++i;
  bps.push_back(x2);
  cls.push_back(inner_classes.back());
  while (i < base.pieces_.size()) {
    if (base.bps_[i] >= x2 - kBpTol) {
      ps.push_back(base.pieces_[i]);
      bps.push_back(base.bps_[i + 1]);
      cls.push_back(base.bp_class_[i + 1]);
    }
    ++i;
  }
  return MapDescriptor(std::move(bps), std::move(ps), std::move(cls), translation_);
}

bool MapDescriptor::structurally_equal(const MapDescriptor& other) const {
  if (bps_ != other.bps_ || bp_class_ != other.bp_class_) return false;
  if (pieces_.size() != other.pieces_.size()) return false;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].kind != other.pieces_[i].kind) return false;
    if (pieces_[i].kind == Piece::Kind::Flat) {
      if (pieces_[i].value != other.pieces_[i].value) return false;
    } else if (to_string(pieces_[i].expr) != to_string(other.pieces_[i].expr)) {
      return false;
    }
  }
  return true;
}

CjDistanceResult cj_distance(const MapDescriptor& M1, const MapDescriptor& M2, int j,
                             int grid) {
  if (j < 0 || j > MapDescriptor::kMaxOrder) throw Error("cj_distance: order out of range");
  if (grid < 8) grid = 8;

  std::vector<double> cells;
  cells.reserve(M1.bps_.size() + M2.bps_.size());
  cells.insert(cells.end(), M1.bps_.begin(), M1.bps_.end());
  cells.insert(cells.end(), M2.bps_.begin(), M2.bps_.end());
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-15; }),
              cells.end());

  auto order_eval = [&](const MapDescriptor& M, int piece, int m, double x) -> double {
    const Piece& p = M.pieces_[piece];
    if (p.kind == Piece::Kind::Flat) return m == 0 ? p.value : 0.0;
    return m == 0 ? p.expr->eval(x) : M.piece_derivative(piece, m)->eval(x);
  };

  double best = 0.0;
  bool all_converged = true;
  int total_refinements = 0;
  for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
    double lo = cells[c], hi = cells[c + 1];
    double mid = 0.5 * (lo + hi);
    int p1 = M1.piece_index(mid);
    int p2 = M2.piece_index(mid);
    for (int m = 0; m <= j; ++m) {
      double cell_max = 0.0;
      int n = grid;
      double prev = -1.0;
      bool converged = false;
      for (int pass = 0; pass < 8; ++pass) {
        cell_max = 0.0;
        for (int s = 0; s < n; ++s) {
          double x = lo + (hi - lo) * (s + 0.5) / n;
          double d = std::abs(order_eval(M1, p1, m, x) - order_eval(M2, p2, m, x));
          if (d > cell_max) cell_max = d;
        }
        // geometric samples toward the cell edges where junction spikes live
        for (int e = 1; e <= 30; ++e) {
          double off = (hi - lo) * std::pow(0.5, e + 1);
          for (double x : {lo + off, hi - off}) {
            double d = std::abs(order_eval(M1, p1, m, x) - order_eval(M2, p2, m, x));
            if (d > cell_max) cell_max = d;
          }
        }
        if (pass > 0 && std::abs(cell_max - prev) <= 1e-10 * (1.0 + cell_max)) {
          converged = true;
          total_refinements += pass;
          break;
        }
        prev = cell_max;
        n *= 2;
      }
      all_converged = all_converged && converged;
      if (cell_max > best) best = cell_max;
    }
  }
  return {best, all_converged, total_refinements};
}

InverseResult invert_lift(const MapDescriptor& M, double y) {
  double f0 = M.eval(0.0);
  double k = std::ceil(f0 - y);
  double target = y + k;
  if (target < f0) target += 1.0;
  if (target >= f0 + 1.0) target -= 1.0;

  auto below = [&](double x) { return M.eval(x) < target; };
  auto above = [&](double x) { return M.eval(x) > target; };

  // sup{x : F(x) < target}
  double alo = 0.0, ahi = 1.0;
  if (!below(0.0))
    alo = ahi = 0.0;
  else
    for (int it = 0; it < 100; ++it) {
      double m = 0.5 * (alo + ahi);
      (below(m) ? alo : ahi) = m;
    }
  // inf{x : F(x) > target}
  double blo = 0.0, bhi = 1.0;
  if (above(0.0))
    blo = bhi = 0.0;
  else
    for (int it = 0; it < 100; ++it) {
      double m = 0.5 * (blo + bhi);
      (above(m) ? bhi : blo) = m;
    }
  double a = 0.5 * (alo + ahi);
  double b = 0.5 * (blo + bhi);
  if (b < a) b = a;
  return {a, b, (b - a) > 1e-9};
}

}  // namespace denjoy
