#ifndef DENJOY_IO_HPP
#define DENJOY_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "denjoy/cherry.hpp"
#include "denjoy/construction.hpp"
#include "denjoy/map_descriptor.hpp"

namespace denjoy {

// Descriptor file, versioned header "mapdesc/1". Round-trip on the textual
// form is bit-exact: parse(print(M)) prints back to the same bytes.
std::string print_mapdesc(const MapDescriptor& M);
MapDescriptor parse_mapdesc(const std::string& text);

// Stage checkpoint sidecar, versioned header "stage/1". The descriptor lives
// in a separate mapdesc file referenced by the sidecar.
struct StageSidecar {
  int n = 0;
  bool anchored = false;
  double eps = 0.0;
  double rho_star = 0.0;
  std::string rho_spec;
  double a = 0.0, b = 0.0;
  std::vector<long> schedule;
  double I_lo = 0.0, I_hi = 0.0;
  double flat_value = 0.0;
  long enc_iters = 200000;
  double delta_used = 0.0, sigma_used = 0.0, tau_total = 0.0;
  double anchor_p = 0.0, anchor_k = 0.0;
  std::string map_file;
  std::string prev_file;  // empty at stage 0
  std::string config_hash;
};

std::string print_stage_sidecar(const StageSidecar& s);
StageSidecar parse_stage_sidecar(const std::string& text);

StageSidecar sidecar_from_state(const StageState& S, const std::string& map_file,
                                const std::string& prev_file, const std::string& config_hash);
StageState state_from_sidecar(const StageSidecar& s, MapDescriptor M);

// Certificate CSV exports; every artifact carries the config hash in a
// leading comment line.
std::string decay_csv(const Certificate& cert);
std::string cauchy_csv(const Certificate& cert);
std::string conditions_csv(const Certificate& cert);
std::string traces_csv(const Certificate& cert);

std::string basin_csv(const BasinReport& rep, const std::string& config_hash);
std::string gapcover_csv(const GapCover& cover, const std::string& config_hash);
std::string trace_csv(const SuspensionTrace& tr, const std::string& config_hash);
std::string trace_svg(const SuspensionTrace& tr, const std::vector<IntervalOnCircle>& flats,
                      const std::string& config_hash);

// key=value configuration with tiny closed-form constants like sqrt(2)/8 or
// (sqrt(5)-1)/2; named shortcuts: golden, sqrt2m1.
std::map<std::string, std::string> parse_config_text(const std::string& text);
double parse_value_expr(const std::string& text);
std::string canonical_config(const std::map<std::string, std::string>& kv);
std::string fnv1a_hex(const std::string& data);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace denjoy

#endif
