#ifndef DENJOY_ERRORS_HPP
#define DENJOY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace denjoy {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct ParseError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct BreakpointNonSmooth : Error {
  double x;
  int order;
  BreakpointNonSmooth(double x_, int order_, const std::string& what)
      : Error(what), x(x_), order(order_) {}
};

struct DegenerateOrbit : Error {
  int step;
  explicit DegenerateOrbit(int step_)
      : Error("interval orbit degenerated to a point at step " + std::to_string(step_)),
        step(step_) {}
};

struct HiddenFlatRegion : Error {
  int piece;
  HiddenFlatRegion(int piece_, const std::string& what) : Error(what), piece(piece_) {}
};

struct OrderMismatch : Error {
  int declared;
  int measured;
  OrderMismatch(int declared_, int measured_, const std::string& what)
      : Error(what), declared(declared_), measured(measured_) {}
};

struct NotBracketed : Error {
  using Error::Error;
};

struct RationalDetected : Error {
  using Error::Error;
};

struct BudgetExceeded : Error {
  using Error::Error;
};

struct InvariantRegression : Error {
  using Error::Error;
};

struct ContainmentLost : Error {
  using Error::Error;
};

struct HitBudgetExceeded : Error {
  long budget;
  explicit HitBudgetExceeded(long budget_)
      : Error("no admissible hit time within budget M_max=" + std::to_string(budget_) +
              "; this contradicts the quasi-minimality argument for an irrational "
              "rotation number -- raise M_max (--max-hit) and rerun"),
        budget(budget_) {}
};

struct LengthTooSmall : Error {
  using Error::Error;
};

struct PreimageEmpty : Error {
  using Error::Error;
};

struct StageRegression : Error {
  int stage;
  int condition;
  StageRegression(int stage_, int condition_, const std::string& what)
      : Error(what), stage(stage_), condition(condition_) {}
};

struct PreconditionViolated : Error {
  using Error::Error;
};

}  // namespace denjoy

#endif
