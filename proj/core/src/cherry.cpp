#include "denjoy/cherry.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "denjoy/errors.hpp"

namespace denjoy {

namespace {

bool inside_any_flat(const std::vector<IntervalOnCircle>& flats, double x) {
  for (const auto& F : flats)
    if (F.contains_point(x)) return true;
  return false;
}

// Hausdorff distance between finite point sets on the circle.
double hausdorff_circle(std::vector<double> A, std::vector<double> B) {
  if (A.empty() || B.empty()) return 1.0;
  std::sort(B.begin(), B.end());
  auto dist_to_B = [&](double x) {
    auto it = std::lower_bound(B.begin(), B.end(), x);
    double best = 1.0;
    auto consider = [&](double y) { best = std::min(best, circle_dist(x, y)); };
    if (it != B.end()) consider(*it);
    if (it != B.begin()) consider(*(it - 1));
    consider(B.front());
    consider(B.back());
    return best;
  };
  double h = 0.0;
  for (double x : A) h = std::max(h, dist_to_B(x));
  return h;
}

}  // namespace

OrbitClass classify_point(const MapDescriptor& M, double x, long N) {
  if (N < 1) throw Error("classify_point: N must be >= 1");
  auto flats = M.flat_set();
  double z = frac_part(x);
  long w = 0;
  std::vector<double> win1, win2;
  long lo1 = N / 2, hi1 = (3 * N) / 4;
  double min_dist = 1.0;
  // The budget covers the images f^0(x) .. f^{N-1}(x): with N = r_K this is
  // exactly the range where the construction's avoidance condition speaks.
  for (long j = 0; j < N; ++j) {
    if (inside_any_flat(flats, z)) return {OrbitClass::Tag::SinkBound, j, N};
    for (const auto& F : flats)
      min_dist = std::min(min_dist, circle_distance_to(F, z));
    if (j >= lo1 && j < hi1) win1.push_back(z);
    if (j >= hi1) win2.push_back(z);
    z = M.step_reduced(z, w);
  }
  double h = std::max(hausdorff_circle(win1, win2), hausdorff_circle(win2, win1));
  if (h < 1e-3) return {OrbitClass::Tag::AttractorCandidate, -1, N};
  // Short budgets cannot stabilize an accumulation set; an orbit that kept a
  // strictly positive distance from the flat through the whole budget is
  // still attractor-bound evidence (the avoidance condition's shadow).
  if (!flats.empty() && min_dist > 1e-9)
    return {OrbitClass::Tag::AttractorCandidate, -1, N};
  return {OrbitClass::Tag::Unresolved, -1, N};
}

BasinReport basin_estimate(const MapDescriptor& M, long samples, long N, unsigned long seed,
                           const IntervalOnCircle* wandering) {
  if (samples < 100) throw Error("basin_estimate: need at least 100 samples");
  BasinReport rep;
  rep.budget = N;
  rep.seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long sink = 0, attr = 0, unres = 0;
  auto tally = [&](double x) {
    auto c = classify_point(M, x, N);
    switch (c.tag) {
      case OrbitClass::Tag::SinkBound: ++sink; break;
      case OrbitClass::Tag::AttractorCandidate: ++attr; break;
      case OrbitClass::Tag::Unresolved: ++unres; break;
    }
  };
  for (long s = 0; s < samples; ++s) tally(unif(rng));
  for (long s = 0; s < samples; ++s) tally((s + 0.5) / static_cast<double>(samples));

  rep.total = 2 * samples;
  double n = static_cast<double>(rep.total);
  rep.frac_sink = sink / n;
  rep.frac_attractor = attr / n;
  rep.frac_unresolved = unres / n;
  rep.half_width = 1.96 * std::sqrt(rep.frac_sink * (1.0 - rep.frac_sink) / n);

  if (wandering) {
    rep.probes_checked = true;
    rep.probes_all_attractor = true;
    for (double x : {wandering->lo, wandering->mid(), wandering->hi}) {
      auto c = classify_point(M, x, N);
      if (c.tag != OrbitClass::Tag::AttractorCandidate) rep.probes_all_attractor = false;
    }
  }
  return rep;
}

GapCover gap_cover(const MapDescriptor& M, int N) {
  if (N < 0) throw Error("gap_cover: depth must be >= 0");
  auto flats = M.flat_set();
  if (flats.size() != 1) throw Error("gap_cover: map must have a unique flat interval");
  GapCover cover;
  IntervalOnCircle cur{frac_part(flats[0].lo), 0.0};
  cur.hi = cur.lo + flats[0].length();
  cover.entries.push_back({cur, 0, false});

  std::vector<IntervalOnCircle> level{cur};
  for (int depth = 1; depth <= N; ++depth) {
    std::vector<IntervalOnCircle> next;
    for (const auto& arc : level) {
      InverseResult lo = invert_lift(M, arc.lo);
      InverseResult hi = invert_lift(M, frac_part(arc.hi));
      double start = lo.hi;
      double len = frac_part(hi.lo - start);
      IntervalOnCircle pre{start, start + len};
      bool clipped = lo.ambiguous || hi.ambiguous;
      cover.entries.push_back({pre, depth, clipped});
      next.push_back(pre);
    }
    level = std::move(next);
  }

  // Merge into a disjoint union (circle arcs normalized to start in [0,1)).
  std::vector<std::pair<double, double>> segs;
  for (const auto& e : cover.entries) {
    double lo = frac_part(e.arc.lo);
    double hi = lo + e.arc.length();
    if (hi <= 1.0) {
      segs.push_back({lo, hi});
    } else {
      segs.push_back({lo, 1.0});
      segs.push_back({0.0, hi - 1.0});
    }
  }
  std::sort(segs.begin(), segs.end());
  for (const auto& s : segs) {
    if (!cover.merged.empty() && s.first <= cover.merged.back().hi + 1e-15) {
      cover.merged.back().hi = std::max(cover.merged.back().hi, s.second);
    } else {
      cover.merged.push_back({s.first, s.second});
    }
  }
  for (const auto& m : cover.merged) cover.total_length += m.length();
  return cover;
}

AttractorReport attractor_check(const MapDescriptor& M, const IntervalOnCircle& I, int N) {
  AttractorReport rep;
  long budget = std::max<long>(4096, 16L * N);

  auto flats = M.flat_set();
  if (flats.size() != 1) {
    rep.item1_pass = false;  // no flat interval: no sink/attractor dichotomy
    rep.item2_pass = false;
    return rep;
  }

  auto basin = basin_estimate(M, 100, budget, 1, &I);
  rep.attractor_fraction = basin.frac_attractor;
  rep.item1_pass = basin.probes_all_attractor && basin.frac_attractor > 0.0;

  // Complement components of the depth-N cover.
  GapCover cover = gap_cover(M, N);
  std::vector<IntervalOnCircle> components;
  for (std::size_t i = 0; i < cover.merged.size(); ++i) {
    double lo = cover.merged[i].hi;
    double hi = (i + 1 < cover.merged.size()) ? cover.merged[i + 1].lo : cover.merged[0].lo + 1.0;
    if (hi - lo > 1e-12) components.push_back({lo, hi});
  }
  if (cover.merged.empty()) components.push_back({0.0, 1.0});

  std::vector<double> orbit;
  double z = frac_part(I.mid());
  long w = 0;
  for (long j = 0; j < budget; ++j) {
    orbit.push_back(z);
    z = M.step_reduced(z, w);
  }
  rep.item2_pass = true;
  for (const auto& comp : components) {
    double best = 1.0;
    for (double x : orbit) {
      best = std::min(best, circle_distance_to(comp, x));
      if (best == 0.0) break;
    }
    rep.distance_profile.push_back(best);
    if (best > rep.threshold) rep.item2_pass = false;
  }
  return rep;
}

SuspensionTrace suspension_trace(const MapDescriptor& M, double x0, int periods) {
  if (periods < 1) throw Error("suspension_trace: periods must be >= 1");
  SuspensionTrace tr;
  tr.x0 = x0;
  tr.periods = periods;
  constexpr int kSamples = 64;
  double x = frac_part(x0);
  long w = 0;
  for (int p = 0; p < periods; ++p) {
    for (int s = 0; s <= kSamples; ++s)
      tr.pts.push_back({x, static_cast<double>(s) / kSamples, p});
    x = M.step_reduced(x, w);
  }
  return tr;
}

}  // namespace denjoy
