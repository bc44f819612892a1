#include <doctest.h>

#include <cmath>
#include <random>

#include "denjoy/errors.hpp"
#include "denjoy/map_descriptor.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace denjoy;
using helpers::make_flat_example;
using helpers::make_quartic_junction;
using helpers::make_rotation;

TEST_CASE("lift evaluation") {
  auto rot = make_rotation(0.25);
  CHECK(rot.eval(0.9) == doctest::Approx(1.15).epsilon(1e-15));
  CHECK(rot.eval(-0.5) == doctest::Approx(-0.25).epsilon(1e-14));

  auto flat = make_flat_example();
  CHECK(flat.eval(0.3) == 0.7);
  CHECK(flat.eval(1.3) == 1.7);
}

TEST_CASE("degree one and monotonicity properties") {
  auto M = make_flat_example();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    double x = unif(rng);
    CHECK(std::abs(M.eval(x + 1.0) - M.eval(x) - 1.0) < 1e-12);
  }
  for (int i = 0; i < 10000; ++i) {
    double x = unif(rng), y = unif(rng);
    if (x > y) std::swap(x, y);
    CHECK(M.eval(x) <= M.eval(y) + 1e-12);
  }
}

TEST_CASE("derivatives: affine, flat, junction") {
  auto rot = make_rotation(0.36);
  CHECK(rot.derivative_at(1, 0.123) == 1.0);

  auto flat = make_flat_example();
  CHECK(flat.derivative_at(7, 0.35) == 0.0);

  auto j = make_quartic_junction();
  CHECK(j.derivative_at(3, 0.5, MapDescriptor::Side::Right) == 0.0);
  CHECK(j.derivative_at(4, 0.5, MapDescriptor::Side::Right) == doctest::Approx(24.0));
  // cross-check with the finite-difference oracle just inside the piece
  auto f = [&](double x) { return j.eval(x); };
  for (int m = 1; m <= 4; ++m) {
    double sym = j.derivative_at(m, 0.7);
    double num = oracles::fd_derivative(f, m, 0.7);
    CHECK(std::abs(sym - num) < 1e-5 * (1.0 + std::abs(sym)));
  }
  // class-0 breakpoint: sides disagree, Auto must refuse
  CHECK_THROWS_AS(flat.derivative_at(1, 0.2), BreakpointNonSmooth);
  CHECK(flat.derivative_at(1, 0.2, MapDescriptor::Side::Left) == doctest::Approx(3.0));
  CHECK(flat.derivative_at(1, 0.2, MapDescriptor::Side::Right) == 0.0);
}

TEST_CASE("interval images") {
  auto flat = make_flat_example();
  auto img = flat.image_interval({0.25, 0.45});
  CHECK(img.is_point());
  CHECK(img.lo == doctest::Approx(0.7));

  auto rot = make_rotation(0.3);
  auto img2 = rot.image_interval({0.1, 0.2});
  CHECK(img2.length() == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(frac_part(img2.lo) == doctest::Approx(0.4));

  // |f(I)| <= sup F' * |I|
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double lo = unif(rng);
    double len = 0.2 * unif(rng) + 1e-4;
    auto im = flat.image_interval({lo, lo + len});
    double sup = 0.0;
    for (int s = 0; s <= 64; ++s) {
      double x = lo + len * s / 64.0;
      double d;
      try {
        d = flat.derivative_at(1, x);
      } catch (const BreakpointNonSmooth&) {
        d = std::max(flat.derivative_at(1, x, MapDescriptor::Side::Left),
                     flat.derivative_at(1, x, MapDescriptor::Side::Right));
      }
      sup = std::max(sup, d);
    }
    CHECK(im.length() <= sup * len + 1e-12);
  }
}

TEST_CASE("interval orbits") {
  auto rot = make_rotation(0.21);
  auto steps = rot.iterate_interval({0.05, 0.1}, 5);
  REQUIRE(steps.size() == 5);
  for (const auto& st : steps) CHECK(st.length == doctest::Approx(0.05).epsilon(1e-13));

  auto flat = make_flat_example();
  CHECK_THROWS_AS(flat.iterate_interval({0.3, 0.4}, 1), DegenerateOrbit);
  try {
    flat.iterate_interval({0.3, 0.4}, 3);
  } catch (const DegenerateOrbit& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("C^j distance") {
  auto M = make_flat_example();
  auto d0 = cj_distance(M, M, 3);
  CHECK(d0.value == 0.0);

  auto shifted = M.translated(0.25);
  // translated() renormalizes F(0) into [0,1); eval difference is constant.
  double c = std::abs(shifted.eval(0.33) - M.eval(0.33));
  auto d1 = cj_distance(shifted, M, 0);
  CHECK(d1.value == doctest::Approx(c).epsilon(1e-12));
  CHECK(d1.converged);
}

TEST_CASE("flat set detection") {
  CHECK(make_rotation(0.37).flat_set().empty());

  auto flat = make_flat_example();
  auto fs = flat.flat_set();
  REQUIRE(fs.size() == 1);
  CHECK(fs[0].lo == doctest::Approx(0.2));
  CHECK(fs[0].hi == doctest::Approx(0.5));

  // hidden flat: a SMOOTH piece that is secretly constant
  std::vector<Piece> pieces(3);
  pieces[0] = {Piece::Kind::Smooth, 0.0, affine(0.1, 3.0)};
  pieces[1] = {Piece::Kind::Smooth, 0.0, kconst(0.7)};
  pieces[2] = {Piece::Kind::Smooth, 0.0, affine(0.3, 0.8)};
  MapDescriptor hidden({0.0, 0.2, 0.5, 1.0}, std::move(pieces), {0, 0, 0, 0}, 0.0);
  CHECK_THROWS_AS(hidden.flat_set(), HiddenFlatRegion);

  // flat interval across the wrap point merges into one arc
  std::vector<Piece> wrap(3);
  wrap[0] = {Piece::Kind::Flat, 0.05, nullptr};
  wrap[1] = {Piece::Kind::Smooth, 0.0,
             sum({kconst(0.05), prod({kconst(1.0 / 0.64), mon(0.1, 2)})})};
  wrap[2] = {Piece::Kind::Flat, 1.05, nullptr};
  MapDescriptor wm({0.0, 0.1, 0.9, 1.0}, std::move(wrap), {0, 0, 0, 0}, 0.0);
  auto wf = wm.flat_set();
  REQUIRE(wf.size() == 1);
  CHECK(wf[0].length() == doctest::Approx(0.2));
}

TEST_CASE("tangency orders") {
  auto flat = make_flat_example();
  auto t = flat.tangency_order(0.2, MapDescriptor::Side::Left);
  CHECK(t.order == 1);  // affine ramp

  auto j = make_quartic_junction();
  CHECK(j.tangency_order(0.5, MapDescriptor::Side::Right).order == 4);
}

TEST_CASE("validation") {
  CHECK(make_rotation(0.4).validate().ok);

  std::vector<Piece> pieces(2);
  pieces[0] = {Piece::Kind::Smooth, 0.0, affine(0.5, -0.2)};
  pieces[1] = {Piece::Kind::Smooth, 0.0, affine(-0.7, 2.2)};
  MapDescriptor bad({0.0, 0.5, 1.0}, std::move(pieces), {0, 0, 0}, 0.0);
  auto rep = bad.validate();
  CHECK_FALSE(rep.ok);
  bool monotone_failed = false;
  for (const auto& item : rep.items)
    if (item.check == "monotone" && !item.pass) monotone_failed = true;
  CHECK(monotone_failed);
}

TEST_CASE("evaluation matches a dense interpolation oracle") {
  auto M = make_flat_example();
  oracles::DenseInterp interp(M);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double x = unif(rng);
    CHECK(std::abs(M.eval(x) - interp(x)) < 1e-6);
  }
}

TEST_CASE("monotone lift inversion") {
  auto rot = make_rotation(0.3);
  auto inv = invert_lift(rot, 0.8);
  CHECK_FALSE(inv.ambiguous);
  CHECK(frac_part(inv.lo) == doctest::Approx(0.5).epsilon(1e-9));

  auto flat = make_flat_example();
  auto amb = invert_lift(flat, 0.7);  // level set is the whole flat
  CHECK(amb.ambiguous);
  CHECK(amb.lo == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(amb.hi == doctest::Approx(0.5).epsilon(1e-8));
}
