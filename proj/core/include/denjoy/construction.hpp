#ifndef DENJOY_CONSTRUCTION_HPP
#define DENJOY_CONSTRUCTION_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/perturbation.hpp"

namespace denjoy {

struct AnchorConfig {
  double p = 0.05;       // fixed left endpoint of the flat interval
  double K_bound = 0.5;  // lower bound demanded of the left derivative at p
};

// Full induction state between stages.
struct StageState {
  int n = 0;
  MapDescriptor M;
  IntervalOnCircle U;           // flat interval (a_n, b_n)
  std::vector<long> schedule;   // r_0 = 1 < r_1 < ... < r_n
  IntervalOnCircle I;           // fixed test interval
  double eps = 0.0;
  double rho_star = 0.0;
  bool anchored = false;
  AnchorConfig anchor{};
  double flat_value = 0.0;
  long enc_iters = 200000;  // rotation-enclosure budget used for verification
  double delta_used = 0.0;  // consumed budgets (C^n distances + |tau|)
  double sigma_used = 0.0;
  double tau_total = 0.0;
};

struct ConditionRow {
  int id = 0;
  bool pass = false;
  double measured = 0.0;
  double required = 0.0;
  double margin = 0.0;
  std::string note;
};

struct ConditionReport {
  std::array<ConditionRow, 10> rows{};
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  const ConditionRow& row(int id) const { return rows[id - 1]; }
};

// Operator-level evidence recorded while producing stage n+1 from stage n.
struct StageTrace {
  int n = 0;
  Parity parity = Parity::Even;
  double eta = 0.0;         // first admissible split amplitude
  double theta_star = 0.0;  // amplitude after the delta'' placement
  long m = 0;               // hit time; r_{n+1} = r_n + m
  char side = '?';          // approach side detected at the hit ('L'/'R')
  double split_flats[4] = {0, 0, 0, 0};  // two components after the split
  double split_gap = 0.0;
  double reflatten_flat[2] = {0, 0};  // surviving component
  int fresh_order = 0;                // junction order installed (conditions table)
  int lemma_order = 0;                // order the lemma text prescribes
  bool order_prescriptions_agree = false;
  double split_c0 = 0.0, split_cn = 0.0;
  double refl_c0 = 0.0, refl_cn = 0.0;
  double stage_cnp1 = 0.0;  // ||F_{n+1} - F_n||_{C^{n+1}}
  double tau = 0.0;
  double landing_margin = 0.0;
};

struct Certificate {
  int K = 0;
  std::vector<long> schedule;
  std::vector<double> decay;         // |f_K^j(I)|, j = 1..r_K-1
  std::vector<double> decay_bounds;  // 2^{-(k-1)} plateau bound per j
  std::vector<double> cauchy;        // ||F_i - F_{i-1}||_{C^i}, i = 1..K
  std::vector<ConditionReport> reports;  // stages 0..K
  std::vector<StageTrace> traces;        // steps 0..K-1
  double flat_limit_lower_bound = 0.0;   // l - 4*eps
  std::string config_hash;
};

struct ConstructionParams {
  double eps = 0.17677669529663687;  // sqrt(2)/8
  double rho_star = 0.61803398874989485;
  std::string rho_spec = "golden";
  double l = 0.75;
  double a0 = 0.05;
  int K = 4;
  long enclosure_iters = 200000;
  long max_hit = 0;  // 0 = 4x the largest continued-fraction denominator below 1e5
  double delta_user = 1.0;
  double sigma_user = 1.0;
  std::optional<AnchorConfig> anchor;
  std::string config_hash;
};

StageState init_stage0(const ConstructionParams& P);

struct HitResult {
  long m = 0;
  char side = '?';
};

// Smallest m <= M_max with f^m(J) meeting U, plus the side of U the orbit
// approached from. J must be disjoint from U unless J lies inside a flat
// component of M (the construction's usage).
HitResult find_hit_time(const MapDescriptor& M, const IntervalOnCircle& J,
                        const IntervalOnCircle& U, long M_max);

long default_hit_budget(double rho_star);

struct StageOutcome {
  StageState state;
  ConditionReport report;
  StageTrace trace;
};

StageOutcome run_stage(const StageState& S, const ConstructionParams& P);

// Measures conditions (1)-(10) for a stage; rows (6)-(8) need the previous
// stage and are reported vacuous-pass at stage 0 or when prev is absent.
ConditionReport verify_conditions(const StageState& S, const StageState* prev);

// Parity tables from the main theorem's conditions (anchored mode follows the
// appendix: right order i+2 at every stage, left endpoint half-critical).
int expected_left_order(int stage, bool anchored);
int expected_right_order(int stage, bool anchored);
IntervalOnCircle landing_window(const IntervalOnCircle& U, int stage, double eps, bool anchored);

struct RunResult {
  MapDescriptor final_map;
  Certificate certificate;
  std::vector<StageState> states;  // stages 0..K
};

RunResult run(const ConstructionParams& P);

}  // namespace denjoy

#endif
