#ifndef DENJOY_PERTURBATION_HPP
#define DENJOY_PERTURBATION_HPP

#include <optional>

#include "denjoy/bumps.hpp"
#include "denjoy/map_descriptor.hpp"
#include "denjoy/rotation.hpp"

namespace denjoy {

enum class Parity { Odd, Even };  // Odd detaches the left end of the flat, Even the right

// Splitting a flat interval in two: the flat (a,b) becomes two flat
// components separated by a smooth gap step of width eps/2^n, with all
// modification confined to the quarter-enlarged window and the C^n distance
// to the input kept below delta.
struct SplitSpec {
  Parity parity = Parity::Even;
  int n = 0;
  double eps = 0.0;
  double delta = 0.0;                // C^n budget
  IntervalOnCircle flat;             // current flat (a,b)
  double glue_width = 0.0;           // outer glue zone width (capped internally)
  double amplitude_override = -1.0;  // driver-supplied eta; < 0 means size from budgets
  double rho_star = -1.0;            // when >= 0: certify enclosure overlap
  long enclosure_n = 0;
  bool light = false;  // skip measurement/validation (amplitude bisection inner loop)
};

struct SplitResult {
  MapDescriptor map;
  double eta = 0.0;          // vertical offset between the two flat components
  double glue_lo = 0.0;      // leftmost modified coordinate
  double glue_hi = 0.0;      // rightmost modified coordinate
  double measured_c0 = 0.0;  // ||out - in||_C0  (norm ambiguity: both recorded)
  double measured_cn = 0.0;  // ||out - in||_Cn
  bool enclosure_ok = true;  // enclosures overlapped; micro_translate restores otherwise
};

SplitResult flatten_split(const MapDescriptor& M, const SplitSpec& spec);

// Re-smoothing one flat component away while raising the smoothness class:
// the erased component and its gap step become a single strictly monotone
// junction polynomial with prescribed leading tangency order at the surviving
// flat's endpoint.
struct ReflattenSpec {
  Parity parity = Parity::Even;
  int n = 0;
  double eps = 0.0;
  double sigma = 0.0;              // C^n budget
  IntervalOnCircle small_flat;     // component to erase
  IntervalOnCircle kept_flat;      // surviving component
  int r = 0;                       // hit time; when > 0 the containment below is re-verified
  IntervalOnCircle target;         // landing window for the r-th image of small_flat
  int fresh_order = 2;             // junction order actually installed (parity table)
  int lemma_order = 2;             // order the lemma text prescribes (recorded, flagged)
  double containment_margin_frac = 1e-4;
  bool light = false;  // skip measurement/validation (amplitude scan inner loop)
};

struct ReflattenResult {
  MapDescriptor map;
  double containment_margin = 0.0;  // distance from the r-th image to the target boundary
  double measured_c0 = 0.0;
  double measured_cn = 0.0;
  double leading_derivative = 0.0;  // |d^k| at the fresh junction
  bool order_prescriptions_agree = false;  // fresh_order == lemma_order
};

ReflattenResult reflatten(const MapDescriptor& M, const ReflattenSpec& spec);

// Compensating translation: finds |tau| <= budget so that the rotation
// enclosure at n iterations contains rho_star again.
struct MicroTranslateResult {
  MapDescriptor map;
  double tau = 0.0;
  EnclosureResult enclosure;
};

MicroTranslateResult micro_translate(const MapDescriptor& M, double budget, double rho_star,
                                     long n);

}  // namespace denjoy

#endif
