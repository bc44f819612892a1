#ifndef DENJOY_EXPR_HPP
#define DENJOY_EXPR_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace denjoy {

// Closed-form expression over the primitive basis used for map pieces:
// constants, affine maps, integer-power monomials (x-c)^k, the one-sided
// mollifier exp(-s/(x-c)) (zero for x<=c; mirrored variant for x>=c), sums,
// products and composition. The basis is closed under differentiation, which
// is what makes exact tangency-order bookkeeping possible.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExprKind : std::uint8_t {
  Const,   // c
  Affine,  // a + b*x
  Mon,     // (x - c)^k, integer k != 0 (negative allowed; only ever appears
           // multiplied by a mollifier that vanishes faster)
  MollR,   // exp(-s/(x-c)) for x > c, else 0   (flat at c from the right)
  MollL,   // exp(-s/(c-x)) for x < c, else 0   (flat at c from the left)
  Sum,
  Prod,
  Comp,  // kids[0] applied to kids[1]
};

struct Expr {
  ExprKind kind{};
  double a = 0.0;  // Const value / Affine offset / Mon & Moll center c
  double b = 0.0;  // Affine slope / Moll scale s
  int k = 0;       // Mon exponent
  std::vector<ExprPtr> kids;

  double eval(double x) const;
};

ExprPtr kconst(double v);
ExprPtr affine(double a, double b);
ExprPtr mon(double c, int k);
ExprPtr mollr(double s, double c);
ExprPtr molll(double s, double c);
ExprPtr sum(std::vector<ExprPtr> kids);
ExprPtr prod(std::vector<ExprPtr> kids);
ExprPtr comp(ExprPtr f, ExprPtr g);

ExprPtr derivative(const ExprPtr& e);

// G(x) = F(x + dx) + dy, rebuilt in the basis (centers shift by -dx).
ExprPtr shift(const ExprPtr& e, double dx, double dy);

std::size_t node_count(const ExprPtr& e);

void print(std::ostream& os, const ExprPtr& e);
std::string to_string(const ExprPtr& e);
ExprPtr parse_expr(const std::string& text);  // throws ParseError

// Canonical double formatting used by every serializer (%.17g round-trips).
std::string format_double(double v);

}  // namespace denjoy

#endif
