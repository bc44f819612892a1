// Command-line driver: construct the finite-stage map, verify checkpoints,
// and run the first-return analyses.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "denjoy/cherry.hpp"
#include "denjoy/construction.hpp"
#include "denjoy/errors.hpp"
#include "denjoy/io.hpp"
#include "denjoy/rotation.hpp"

namespace fs = std::filesystem;
using namespace denjoy;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitModule = 2;
constexpr int kExitIo = 3;

struct ConstructOpts {
  std::string config_file;
  std::string out = ".";
  std::string rho = "";
  std::string eps = "";
  double l = -1.0;
  double a0 = -1.0;
  int stages = -1;
  long seed = -1;
  long iters = -1;
  long max_hit = -1;
  bool anchored = false;
  std::string anchor_p = "";
  std::string anchor_k = "";
  long samples = -1;
  bool dump_stage = false;
};

// Resolve config file + command-line overrides into one key=value map; the
// hash of its canonical form is stamped into every artifact.
std::map<std::string, std::string> resolve_config(const ConstructOpts& o) {
  std::map<std::string, std::string> kv{
      {"rho", "golden"},   {"eps", "sqrt(2)/8"}, {"l", "0.75"},    {"a0", "0.05"},
      {"K", "4"},          {"seed", "1"},        {"samples", "400"}, {"iters", "200000"},
      {"max_hit", "0"},    {"anchored", "0"},    {"anchor_p", "0.05"}, {"anchor_k", "0.5"},
  };
  if (!o.config_file.empty())
    for (auto& [k, v] : parse_config_text(read_file(o.config_file))) kv[k] = v;
  if (!o.rho.empty()) kv["rho"] = o.rho;
  if (!o.eps.empty()) kv["eps"] = o.eps;
  if (o.l >= 0.0) kv["l"] = format_double(o.l);
  if (o.a0 >= 0.0) kv["a0"] = format_double(o.a0);
  if (o.stages >= 0) kv["K"] = std::to_string(o.stages);
  if (o.seed >= 0) kv["seed"] = std::to_string(o.seed);
  if (o.iters >= 0) kv["iters"] = std::to_string(o.iters);
  if (o.max_hit >= 0) kv["max_hit"] = std::to_string(o.max_hit);
  if (o.samples >= 0) kv["samples"] = std::to_string(o.samples);
  if (o.anchored) kv["anchored"] = "1";
  if (!o.anchor_p.empty()) kv["anchor_p"] = o.anchor_p;
  if (!o.anchor_k.empty()) kv["anchor_k"] = o.anchor_k;
  return kv;
}

ConstructionParams params_from_config(const std::map<std::string, std::string>& kv) {
  ConstructionParams P;
  P.rho_spec = kv.at("rho");
  P.rho_star = parse_value_expr(kv.at("rho"));
  P.eps = parse_value_expr(kv.at("eps"));
  P.l = parse_value_expr(kv.at("l"));
  P.a0 = parse_value_expr(kv.at("a0"));
  P.K = static_cast<int>(parse_value_expr(kv.at("K")));
  P.enclosure_iters = static_cast<long>(parse_value_expr(kv.at("iters")));
  P.max_hit = static_cast<long>(parse_value_expr(kv.at("max_hit")));
  if (kv.at("anchored") == "1" || kv.at("anchored") == "true")
    P.anchor = AnchorConfig{parse_value_expr(kv.at("anchor_p")),
                            parse_value_expr(kv.at("anchor_k"))};
  P.config_hash = fnv1a_hex(canonical_config(kv));
  return P;
}

std::string stamped(const std::string& body, const std::string& hash) {
  auto nl = body.find('\n');
  return body.substr(0, nl + 1) + "# config=" + hash + "\n" + body.substr(nl + 1);
}

void print_report(const ConditionReport& rep) {
  std::printf("%4s  %4s  %14s  %14s  %14s  %s\n", "cond", "pass", "measured", "required",
              "margin", "note");
  for (const auto& r : rep.rows)
    std::printf("%4d  %4s  %14.6g  %14.6g  %14.6g  %s\n", r.id, r.pass ? "ok" : "FAIL",
                r.measured, r.required, r.margin, r.note.c_str());
}

int cmd_construct(const ConstructOpts& o) {
  auto kv = resolve_config(o);
  ConstructionParams P = params_from_config(kv);
  fs::create_directories(o.out);

  RunResult result;
  try {
    result = run(P);
  } catch (const StageRegression& e) {
    std::cerr << "construct: " << e.what() << "\n";
    return kExitModule;
  } catch (const Error& e) {
    std::cerr << "construct: " << e.what() << "\n";
    return kExitModule;
  }

  auto out = [&](const std::string& name) { return (fs::path(o.out) / name).string(); };
  std::string prev_sidecar;
  for (std::size_t i = 0; i < result.states.size(); ++i) {
    std::string map_name = "stage" + std::to_string(i) + ".map";
    std::string stage_name = "stage" + std::to_string(i) + ".stage";
    write_file(out(map_name), stamped(print_mapdesc(result.states[i].M), P.config_hash));
    auto sc = sidecar_from_state(result.states[i], map_name, prev_sidecar, P.config_hash);
    sc.rho_spec = P.rho_spec;
    write_file(out(stage_name), print_stage_sidecar(sc));
    prev_sidecar = stage_name;
  }
  write_file(out("final.map"), stamped(print_mapdesc(result.final_map), P.config_hash));
  write_file(out("decay.csv"), decay_csv(result.certificate));
  write_file(out("cauchy.csv"), cauchy_csv(result.certificate));
  write_file(out("conditions.csv"), conditions_csv(result.certificate));
  if (o.dump_stage) write_file(out("traces.csv"), traces_csv(result.certificate));

  std::cout << "constructed " << P.K << " stages, schedule r =";
  for (long r : result.certificate.schedule) std::cout << " " << r;
  std::cout << "\nfinal flat interval (" << format_double(result.states.back().U.lo) << ", "
            << format_double(result.states.back().U.hi) << "), config " << P.config_hash
            << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& checkpoint) {
  StageSidecar sc = parse_stage_sidecar(read_file(checkpoint));
  fs::path dir = fs::path(checkpoint).parent_path();
  auto load_state = [&](const StageSidecar& s) {
    MapDescriptor M = parse_mapdesc(read_file((dir / s.map_file).string()));
    return state_from_sidecar(s, std::move(M));
  };
  StageState S = load_state(sc);
  StageState prev;
  bool have_prev = false;
  if (!sc.prev_file.empty()) {
    StageSidecar psc = parse_stage_sidecar(read_file((dir / sc.prev_file).string()));
    prev = load_state(psc);
    have_prev = true;
  }
  auto rep = verify_conditions(S, have_prev ? &prev : nullptr);
  print_report(rep);
  if (!rep.all_pass()) {
    for (const auto& r : rep.rows)
      if (!r.pass) std::cerr << "verify: condition " << r.id << " failed\n";
    return kExitVerifyFail;
  }
  return kExitOk;
}

MapDescriptor load_map(const std::string& path) { return parse_mapdesc(read_file(path)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-stage circle maps with a flat interval: construction and analysis"};
  app.require_subcommand(1);

  ConstructOpts co;
  auto* construct = app.add_subcommand("construct", "run the staged construction");
  construct->add_option("--config", co.config_file, "key=value config file");
  construct->add_option("--out", co.out, "output directory");
  construct->add_option("--stages", co.stages, "number of stages K");
  construct->add_option("--rho", co.rho, "target rotation number (e.g. golden, (sqrt(5)-1)/2)");
  construct->add_option("--eps", co.eps, "eps parameter (e.g. sqrt(2)/8)");
  construct->add_option("--l", co.l, "initial flat length");
  construct->add_option("--a0", co.a0, "initial flat left endpoint");
  construct->add_option("--seed", co.seed, "sampling seed");
  construct->add_option("--iters", co.iters, "rotation enclosure iterations");
  construct->add_option("--max-hit", co.max_hit, "hit-time budget M_max");
  construct->add_option("--samples", co.samples, "basin sample count");
  construct->add_flag("--anchored", co.anchored, "appendix mode: pin the flat's left endpoint");
  construct->add_option("--anchor-p", co.anchor_p, "anchored left endpoint p");
  construct->add_option("--anchor-k", co.anchor_k, "anchored left-derivative bound K");
  construct->add_flag("--dump-stage", co.dump_stage, "also export per-step operator traces");

  std::string verify_path;
  auto* verify = app.add_subcommand("verify", "re-check conditions (1)-(10) on a checkpoint");
  verify->add_option("checkpoint", verify_path, "stage sidecar file")->required();

  std::string basin_map, basin_out = ".";
  long basin_samples = 400, basin_iters = 20000, basin_seed = 1;
  double wander_lo = -1.0, wander_hi = -1.0;
  auto* basin = app.add_subcommand("basin", "sink/attractor basin statistics");
  basin->add_option("map", basin_map)->required();
  basin->add_option("--samples", basin_samples);
  basin->add_option("--iters", basin_iters);
  basin->add_option("--seed", basin_seed);
  basin->add_option("--out", basin_out);
  basin->add_option("--wander-lo", wander_lo, "wandering interval probe (lo)");
  basin->add_option("--wander-hi", wander_hi, "wandering interval probe (hi)");

  std::string gap_map, gap_out = ".";
  int gap_depth = 5;
  auto* gap = app.add_subcommand("gapcover", "backward images of the flat interval");
  gap->add_option("map", gap_map)->required();
  gap->add_option("--depth", gap_depth);
  gap->add_option("--out", gap_out);

  std::string trace_map, trace_out = ".";
  double trace_x0 = 0.1;
  int trace_periods = 64;
  auto* trace = app.add_subcommand("trace", "suspension trace (CSV + SVG)");
  trace->add_option("map", trace_map)->required();
  trace->add_option("--x0", trace_x0);
  trace->add_option("--periods", trace_periods);
  trace->add_option("--out", trace_out);

  std::string rot_map;
  long rot_iters = 100000;
  double rot_x0 = 0.0;
  auto* rotnum = app.add_subcommand("rotnum", "two-sided rotation number enclosure");
  rotnum->add_option("map", rot_map)->required();
  rotnum->add_option("--iters", rot_iters);
  rotnum->add_option("--x0", rot_x0);

  std::string tune_map, tune_rho = "golden", tune_out;
  double tune_tol = 1e-5;
  long tune_iters = 1000000;
  auto* tune = app.add_subcommand("tune", "bisect the translation family to a target");
  tune->add_option("map", tune_map)->required();
  tune->add_option("--rho", tune_rho);
  tune->add_option("--tol", tune_tol);
  tune->add_option("--iters", tune_iters);
  tune->add_option("--out", tune_out, "write the tuned descriptor here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*construct) return cmd_construct(co);
    if (*verify) return cmd_verify(verify_path);
    if (*basin) {
      auto M = load_map(basin_map);
      std::string hash = fnv1a_hex("basin:" + std::to_string(basin_seed) + ":" +
                                   std::to_string(basin_iters) + ":" + basin_map);
      IntervalOnCircle I{wander_lo, wander_hi};
      bool have_I = wander_lo >= 0.0 && wander_hi > wander_lo;
      auto rep = basin_estimate(M, basin_samples, basin_iters,
                                static_cast<unsigned long>(basin_seed),
                                have_I ? &I : nullptr);
      fs::create_directories(basin_out);
      write_file((fs::path(basin_out) / "basin.csv").string(), basin_csv(rep, hash));
      std::cout << "sink " << rep.frac_sink << "  attractor " << rep.frac_attractor
                << "  unresolved " << rep.frac_unresolved << "\n";
      return kExitOk;
    }
    if (*gap) {
      auto M = load_map(gap_map);
      auto cover = gap_cover(M, gap_depth);
      std::string hash = fnv1a_hex("gapcover:" + std::to_string(gap_depth) + ":" + gap_map);
      fs::create_directories(gap_out);
      write_file((fs::path(gap_out) / "gapcover.csv").string(), gapcover_csv(cover, hash));
      std::cout << "covered length " << format_double(cover.total_length) << " at depth "
                << gap_depth << "\n";
      return kExitOk;
    }
    if (*trace) {
      auto M = load_map(trace_map);
      auto tr = suspension_trace(M, trace_x0, trace_periods);
      std::string hash = fnv1a_hex("trace:" + format_double(trace_x0) + ":" + trace_map);
      fs::create_directories(trace_out);
      write_file((fs::path(trace_out) / "trace.csv").string(), trace_csv(tr, hash));
      write_file((fs::path(trace_out) / "trace.svg").string(),
                 trace_svg(tr, M.flat_set(), hash));
      return kExitOk;
    }
    if (*rotnum) {
      auto M = load_map(rot_map);
      auto enc = rotation_enclosure(M, rot_iters, rot_x0);
      std::cout << "[" << format_double(enc.lower()) << ", " << format_double(enc.upper())
                << "]  width " << format_double(enc.width()) << "\n";
      return kExitOk;
    }
    if (*tune) {
      auto M = load_map(tune_map);
      double target = parse_value_expr(tune_rho);
      auto res = tune_translation(M, target, tune_tol, tune_iters);
      std::cout << "t0 " << format_double(res.t0) << "  enclosure ["
                << format_double(res.enclosure.lower()) << ", "
                << format_double(res.enclosure.upper()) << "]  steps " << res.bisection_steps
                << "\n";
      if (!tune_out.empty())
        write_file(tune_out, print_mapdesc(M.translated(res.t0)));
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitModule;
  } catch (const std::exception& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
