#include <doctest.h>

#include <cmath>

#include "denjoy/bumps.hpp"
#include "denjoy/errors.hpp"
#include "denjoy/expr.hpp"
#include "oracles.hpp"

using namespace denjoy;

TEST_CASE("primitive evaluation") {
  CHECK(kconst(2.5)->eval(10.0) == 2.5);
  CHECK(affine(1.0, 2.0)->eval(3.0) == 7.0);
  CHECK(mon(0.5, 3)->eval(1.5) == doctest::Approx(1.0));
  CHECK(mon(0.0, -2)->eval(2.0) == doctest::Approx(0.25));

  auto mr = mollr(1.0, 0.25);
  CHECK(mr->eval(0.25) == 0.0);
  CHECK(mr->eval(0.1) == 0.0);
  CHECK(mr->eval(1.25) == doctest::Approx(std::exp(-1.0)));

  auto ml = molll(2.0, 0.75);
  CHECK(ml->eval(0.75) == 0.0);
  CHECK(ml->eval(0.9) == 0.0);
  CHECK(ml->eval(-0.25) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("vanished mollifier wins over singular monomials in products") {
  // d/dx exp(-1/x) produces exp(-1/x) * x^-2; it must evaluate to 0 on the
  // flat side even though the monomial alone is infinite.
  auto e = prod({mollr(1.0, 0.0), mon(0.0, -2)});
  CHECK(e->eval(0.0) == 0.0);
  CHECK(e->eval(-1.0) == 0.0);
  CHECK(e->eval(0.5) > 0.0);
}

TEST_CASE("symbolic derivatives agree with Richardson finite differences") {
  auto check_orders = [](const ExprPtr& f, double x, double tol) {
    ExprPtr d = f;
    auto feval = [&](double t) { return f->eval(t); };
    for (int m = 1; m <= 4; ++m) {
      d = derivative(d);
      double sym = d->eval(x);
      double num = oracles::fd_derivative(feval, m, x);
      CHECK(std::abs(sym - num) < tol * (1.0 + std::abs(sym)));
    }
  };
  check_orders(sum({kconst(0.3), prod({kconst(1.2), mon(0.4, 5)})}), 0.73, 1e-5);
  check_orders(mollr(1.0, 0.0), 0.5, 1e-5);
  check_orders(rise01(0.2, 0.8), 0.47, 1e-4);
  check_orders(comp(mollr(0.5, 0.0), sum({kconst(0.3), prod({kconst(0.5), mon(0.0, 2)})})),
               0.62, 1e-4);
}

TEST_CASE("connector endpoints are flat to all probed orders") {
  auto r = rise01(0.3, 0.5);
  auto f = fall10(0.3, 0.5);
  CHECK(r->eval(0.3) == 0.0);
  CHECK(r->eval(0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f->eval(0.3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f->eval(0.5) == 0.0);
  ExprPtr dr = r, df = f;
  for (int m = 1; m <= 8; ++m) {
    dr = derivative(dr);
    df = derivative(df);
    CHECK(std::abs(dr->eval(0.3)) < 1e-9);
    CHECK(std::abs(dr->eval(0.5)) < 1e-9);
    CHECK(std::abs(df->eval(0.3)) < 1e-9);
    CHECK(std::abs(df->eval(0.5)) < 1e-9);
  }
  // strict interior monotonicity
  auto dr1 = derivative(r);
  for (int s = 1; s < 64; ++s) CHECK(dr1->eval(0.3 + 0.2 * s / 64) > 0.0);
}

TEST_CASE("simplifier merges monomials and mollifier scales") {
  auto p = prod({mon(0.5, 2), mon(0.5, 3)});
  CHECK(p->kind == ExprKind::Mon);
  CHECK(p->k == 5);
  auto q = prod({mollr(1.0, 0.25), mollr(2.0, 0.25)});
  CHECK(q->kind == ExprKind::MollR);
  CHECK(q->b == 3.0);
  CHECK(sum({kconst(1.0), kconst(2.0)})->a == 3.0);
  CHECK(prod({kconst(0.0), mon(0.1, 7)})->kind == ExprKind::Const);
}

TEST_CASE("printing round-trips bit-exactly") {
  auto e = sum({kconst(0.1), prod({kconst(-2.0 / 3.0), mon(0.8, 4)}),
                comp(mollr(std::exp(-1.0), 0.0),
                     sum({kconst(std::exp(-1.0)), prod({kconst(-1.0), molll(0.6, 0.9)})}))});
  std::string once = to_string(e);
  std::string twice = to_string(parse_expr(once));
  CHECK(once == twice);
  CHECK_THROWS_AS(parse_expr("(bogus 1 2)"), ParseError);
}

TEST_CASE("argument shift rebuilds the expression in the basis") {
  auto e = sum({kconst(0.2), prod({kconst(3.0), mon(1.2, 2)}), mollr(0.5, 1.1)});
  auto g = shift(e, 1.0, -1.0);  // g(x) = e(x+1) - 1
  for (double x : {-0.3, 0.05, 0.4, 0.9}) {
    CHECK(g->eval(x) == doctest::Approx(e->eval(x + 1.0) - 1.0).epsilon(1e-15));
  }
}

TEST_CASE("bump primitives") {
  IntervalOnCircle win{0.2, 0.5};
  CHECK(bump_primitive(BumpKind::FlatToFlat, win, 0.0)->kind == ExprKind::Const);

  auto b = bump_primitive(BumpKind::FlatToFlat, win, 0.01);
  ExprPtr d = b;
  for (int m = 1; m <= 8; ++m) {
    d = derivative(d);
    CHECK(std::abs(d->eval(win.lo)) < 1e-9);
    CHECK(std::abs(d->eval(win.hi)) < 1e-9);
  }

  auto o3 = bump_primitive(BumpKind::FlatToOrderK, win, 2.0, 3);
  ExprPtr d1 = derivative(o3);
  ExprPtr d2 = derivative(d1);
  ExprPtr d3 = derivative(d2);
  CHECK(d1->eval(win.lo) == 0.0);
  CHECK(d2->eval(win.lo) == 0.0);
  CHECK(d3->eval(win.lo) == doctest::Approx(12.0));
}
