#ifndef DENJOY_TESTS_HELPERS_HPP
#define DENJOY_TESTS_HELPERS_HPP

#include "denjoy/expr.hpp"
#include "denjoy/map_descriptor.hpp"

namespace helpers {

using namespace denjoy;

inline MapDescriptor make_rotation(double rho) {
  std::vector<Piece> pieces{{Piece::Kind::Smooth, 0.0, affine(rho, 1.0)}};
  return MapDescriptor({0.0, 1.0}, std::move(pieces), {-1, -1}, rho);
}

// Flat on (0.2, 0.5) at value 0.7 with affine ramps (class-0 breakpoints).
inline MapDescriptor make_flat_example() {
  std::vector<Piece> pieces(3);
  pieces[0] = {Piece::Kind::Smooth, 0.0, affine(0.1, 3.0)};
  pieces[1] = {Piece::Kind::Flat, 0.7, nullptr};
  pieces[2] = {Piece::Kind::Smooth, 0.0, affine(0.3, 0.8)};
  return MapDescriptor({0.0, 0.2, 0.5, 1.0}, std::move(pieces), {0, 0, 0, 0}, 0.0);
}

// Flat on (0, 0.5) at 0.3 with a quartic junction piece 0.3 + (x-0.5)^4.
inline MapDescriptor make_quartic_junction() {
  std::vector<Piece> pieces(3);
  pieces[0] = {Piece::Kind::Flat, 0.3, nullptr};
  pieces[1] = {Piece::Kind::Smooth, 0.0, sum({kconst(0.3), mon(0.5, 4)})};
  double v09 = 0.3 + std::pow(0.4, 4);
  double slope = (1.3 - v09) / 0.1;
  pieces[2] = {Piece::Kind::Smooth, 0.0, affine(v09 - slope * 0.9, slope)};
  return MapDescriptor({0.0, 0.5, 0.9, 1.0}, std::move(pieces), {0, 0, 0, 0}, 0.0);
}

}  // namespace helpers

#endif
