#ifndef DENJOY_MAP_DESCRIPTOR_HPP
#define DENJOY_MAP_DESCRIPTOR_HPP

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/expr.hpp"
#include "denjoy/interval.hpp"

namespace denjoy {

// One cell [breakpoints[i], breakpoints[i+1]] of the lift.
struct Piece {
  enum class Kind { Flat, Smooth } kind = Kind::Flat;
  double value = 0.0;  // Flat only
  ExprPtr expr;        // Smooth only, valid on the cell in global coordinates
};

inline constexpr int kInfiniteOrder = 0;  // tangency sentinel: all orders vanish

struct TangencyResult {
  int order = 0;  // kInfiniteOrder means mollifier-flat junction
  bool infinite() const { return order == kInfiniteOrder; }
};

struct ValidationItem {
  std::string check;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationItem> items;
  void add(const std::string& check, bool pass, double margin, std::string detail = "");
};

struct CjDistanceResult {
  double value = 0.0;
  bool converged = false;
  int refinements = 0;
};

struct OrbitStep {
  double lo = 0.0;   // image endpoints in circle coordinates (lo in [0,1))
  double hi = 0.0;   // hi as lo + length when resolvable
  double length = 0.0;  // multiplicatively propagated, stays > 0 below double
                        // endpoint resolution as long as the orbit avoids flats
};

// Piecewise closed-form lift of a monotone degree-one circle map. Breakpoints
// live in [0,1] with bps.front()==0 and bps.back()==1; evaluation outside
// [0,1) uses F(x+1)=F(x)+1. Values are immutable after construction; the
// derivative cache is the only mutable state and is mutex-guarded.
class MapDescriptor {
 public:
  MapDescriptor() = default;
  MapDescriptor(std::vector<double> breakpoints, std::vector<Piece> pieces,
                std::vector<int> bp_class, double translation);
  MapDescriptor(const MapDescriptor& other);
  MapDescriptor& operator=(const MapDescriptor& other);
  MapDescriptor(MapDescriptor&& other) noexcept;
  MapDescriptor& operator=(MapDescriptor&& other) noexcept;

  static constexpr int kMaxOrder = 12;

  const std::vector<double>& breakpoints() const { return bps_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::vector<int>& breakpoint_classes() const { return bp_class_; }
  double translation() const { return translation_; }

  double eval(double x) const;

  // m-th derivative at x. At a breakpoint the caller must pick a side when the
  // one-sided values disagree beyond 1e-9 (BreakpointNonSmooth otherwise).
  enum class Side { Auto, Left, Right };
  double derivative_at(int m, double x, Side side = Side::Auto) const;

  IntervalOnCircle image_interval(const IntervalOnCircle& I) const;

  // Images f^1(I) .. f^n(I). Lengths switch to first-order propagation once
  // endpoints collide in double precision; throws DegenerateOrbit(j) when the
  // interval lands inside a flat piece (the image is then truly a point).
  std::vector<OrbitStep> iterate_interval(const IntervalOnCircle& I, int n) const;

  std::vector<IntervalOnCircle> flat_set() const;

  // Declared tangency order at a flat endpoint (structural, from the symbolic
  // derivatives of the adjacent smooth piece), verified against thresholds.
  TangencyResult tangency_order(double endpoint, Side side) const;

  ValidationReport validate() const;

  MapDescriptor translated(double t) const;  // F + t, renormalized to F(0) in [0,1)

  // Surgery helpers used by the perturbation operators.
  MapDescriptor with_breakpoint(double x) const;  // inserts x (no-op if present)
  MapDescriptor replace_range(double x1, double x2, std::vector<double> inner_bps,
                              std::vector<Piece> inner_pieces, std::vector<int> inner_classes) const;

  int piece_index(double x_in_unit) const;  // cell containing x in [0,1)
  double flat_value(int piece) const { return pieces_[piece].value; }

  // Reduced one-step evaluation: x in [0,1) -> (f(x) in [0,1), winding += k).
  double step_reduced(double x, long& winding) const;

  bool structurally_equal(const MapDescriptor& other) const;

 private:
  std::vector<double> bps_;
  std::vector<Piece> pieces_;
  std::vector<int> bp_class_;  // smoothness demanded at each breakpoint; -1 = all orders
  double translation_ = 0.0;

  mutable std::vector<std::vector<ExprPtr>> deriv_cache_;
  mutable std::mutex cache_mutex_;

  const ExprPtr& piece_derivative(int piece, int m) const;
  double eval_unit(double x) const;  // x in [0,1)
  friend CjDistanceResult cj_distance(const MapDescriptor&, const MapDescriptor&, int, int);
};

CjDistanceResult cj_distance(const MapDescriptor& M1, const MapDescriptor& M2, int j,
                             int grid = 256);

// Monotone-branch inversion of the lift: smallest x in [0,1) with F(x) = y
// (mod the degree-one reduction). If the level set is a flat piece the
// returned pair brackets it and ambiguous=true.
struct InverseResult {
  double lo = 0.0;
  double hi = 0.0;
  bool ambiguous = false;
};
InverseResult invert_lift(const MapDescriptor& M, double y);

}  // namespace denjoy

#endif
