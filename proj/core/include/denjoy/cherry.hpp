#ifndef DENJOY_CHERRY_HPP
#define DENJOY_CHERRY_HPP

#include <vector>

#include "denjoy/map_descriptor.hpp"

namespace denjoy {

// First-return-level classification: an orbit that enters the open flat
// interval follows the flow into the sink and never returns; an orbit whose
// accumulation set stabilizes away from it is a candidate for the
// quasi-minimal attractor.
struct OrbitClass {
  enum class Tag { SinkBound, AttractorCandidate, Unresolved } tag = Tag::Unresolved;
  long entry_step = -1;  // SinkBound: first j with f^j(x) inside the flat
  long budget = 0;
};

OrbitClass classify_point(const MapDescriptor& M, double x, long N);

struct BasinReport {
  long total = 0;
  long budget = 0;
  unsigned long seed = 0;
  double frac_sink = 0.0;
  double frac_attractor = 0.0;
  double frac_unresolved = 0.0;
  double half_width = 0.0;  // 95% binomial half-width on frac_sink
  bool probes_checked = false;
  bool probes_all_attractor = false;  // endpoint + midpoint probes of I
};

BasinReport basin_estimate(const MapDescriptor& M, long samples, long N, unsigned long seed,
                           const IntervalOnCircle* wandering = nullptr);

// Union of backward images of the open flat interval up to a depth; the
// complement approximates the non-wandering set.
struct GapCover {
  struct Entry {
    IntervalOnCircle arc;
    int depth = 0;
    bool boundary_clipped = false;  // a preimage endpoint fell inside a flat piece
  };
  std::vector<Entry> entries;
  std::vector<IntervalOnCircle> merged;  // pairwise disjoint
  double total_length = 0.0;
};

GapCover gap_cover(const MapDescriptor& M, int N);

struct AttractorReport {
  bool item1_pass = false;  // positive-length realm: I classifies attractor-bound
  double attractor_fraction = 0.0;
  bool item2_pass = false;  // orbit closure approaches every component of the
                            // depth-N complement within the threshold
  std::vector<double> distance_profile;
  double threshold = 5e-3;
  bool heuristic = true;  // finite data cannot certify minimality
};

AttractorReport attractor_check(const MapDescriptor& M, const IntervalOnCircle& I, int N);

// Plotting companion: unit-speed vertical flow on the torus with the return
// jump applied at each period crossing.
struct SuspensionTrace {
  struct Pt {
    double x = 0.0;
    double s = 0.0;
    int segment = 0;
  };
  std::vector<Pt> pts;
  double x0 = 0.0;
  int periods = 0;
};

SuspensionTrace suspension_trace(const MapDescriptor& M, double x0, int periods);

}  // namespace denjoy

#endif
