// Exercises the denjoyctl binary end to end: exit codes, artifacts,
// determinism. The binary path arrives as argv[1] from CTest.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "denjoy/io.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace denjoy;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run_cmd(const std::string& cmd) {
  int rc = std::system((cmd + " > cli_tmp/last.out 2>&1").c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_driver <denjoyctl>\n";
    return 2;
  }
  std::string ctl = argv[1];
  fs::remove_all("cli_tmp");
  fs::create_directories("cli_tmp");

  const std::string fast = " --stages 1 --iters 50000";

  // construct: smoke run, one stage
  int rc = run_cmd(ctl + " construct --out cli_tmp/a" + fast);
  check(rc == 0, "construct K=1 exits 0 (got " + std::to_string(rc) + ")");
  check(fs::exists("cli_tmp/a/stage1.stage"), "stage-1 checkpoint written");
  check(fs::exists("cli_tmp/a/final.map"), "final descriptor written");
  check(fs::exists("cli_tmp/a/decay.csv"), "decay table written");

  // construct: l too small for eps
  rc = run_cmd(ctl + " construct --out cli_tmp/bad --l 0.5" + fast);
  check(rc == 2, "l=0.5 with eps=sqrt(2)/8 exits 2 (got " + std::to_string(rc) + ")");

  // verify: fresh checkpoints pass
  rc = run_cmd(ctl + " verify cli_tmp/a/stage1.stage");
  check(rc == 0, "verify stage 1 exits 0 (got " + std::to_string(rc) + ")");
  rc = run_cmd(ctl + " verify cli_tmp/a/stage0.stage");
  check(rc == 0, "verify stage 0 exits 0 (got " + std::to_string(rc) + ")");

  // verify: hand-edited breakpoint violates the telescoping condition
  {
    auto sc = parse_stage_sidecar(read_file("cli_tmp/a/stage1.stage"));
    sc.b -= 0.01;
    write_file("cli_tmp/a/tampered.stage", print_stage_sidecar(sc));
    rc = run_cmd(ctl + " verify cli_tmp/a/tampered.stage");
    check(rc == 1, "tampered checkpoint exits 1 (got " + std::to_string(rc) + ")");
    std::string out = read_file("cli_tmp/last.out");
    check(out.find("condition 6") != std::string::npos, "failure names condition 6");
  }

  // verify: missing file is an I/O error
  rc = run_cmd(ctl + " verify cli_tmp/nowhere.stage");
  check(rc == 3, "missing checkpoint exits 3 (got " + std::to_string(rc) + ")");

  // rotnum on a hand-written pure rotation
  write_file("cli_tmp/rot.map", print_mapdesc(helpers::make_rotation(0.25)));
  rc = run_cmd(ctl + " rotnum cli_tmp/rot.map --iters 1000");
  check(rc == 0, "rotnum exits 0");
  {
    std::string out = read_file("cli_tmp/last.out");
    check(out.find("0.249") != std::string::npos || out.find("0.25") != std::string::npos,
          "rotnum prints the enclosure");
  }

  // tune the identity lift toward the golden mean
  write_file("cli_tmp/id.map", print_mapdesc(helpers::make_rotation(0.0)));
  rc = run_cmd(ctl + " tune cli_tmp/id.map --rho golden --tol 1e-4 --iters 100000 --out "
                     "cli_tmp/tuned.map");
  check(rc == 0, "tune exits 0");
  check(fs::exists("cli_tmp/tuned.map"), "tuned descriptor written");

  // basin / gapcover / trace on the constructed map
  rc = run_cmd(ctl + " basin cli_tmp/a/final.map --samples 100 --iters 2000 --seed 7 --out "
                     "cli_tmp/a");
  check(rc == 0, "basin exits 0");
  check(fs::exists("cli_tmp/a/basin.csv"), "basin.csv written");

  rc = run_cmd(ctl + " gapcover cli_tmp/a/final.map --depth 3 --out cli_tmp/a");
  check(rc == 0, "gapcover exits 0");
  check(fs::exists("cli_tmp/a/gapcover.csv"), "gapcover.csv written");

  rc = run_cmd(ctl + " trace cli_tmp/a/final.map --x0 0.9 --periods 8 --out cli_tmp/a");
  check(rc == 0, "trace exits 0");
  {
    std::string svg = read_file("cli_tmp/a/trace.svg");
    check(svg.find("<svg") != std::string::npos && svg.find("</svg>") != std::string::npos,
          "trace.svg is well-formed");
  }

  // determinism: identical configs produce byte-identical certificate CSVs
  rc = run_cmd(ctl + " construct --out cli_tmp/d1 --seed 9" + fast);
  check(rc == 0, "determinism run 1 exits 0");
  rc = run_cmd(ctl + " construct --out cli_tmp/d2 --seed 9" + fast);
  check(rc == 0, "determinism run 2 exits 0");
  for (const std::string f : {"decay.csv", "cauchy.csv", "conditions.csv"})
    check(read_file("cli_tmp/d1/" + f) == read_file("cli_tmp/d2/" + f),
          f + " byte-identical across runs");

  // anchored smoke run
  rc = run_cmd(ctl + " construct --out cli_tmp/anch --anchored --stages 1 --iters 50000");
  check(rc == 0, "anchored construct exits 0 (got " + std::to_string(rc) + ")");

  if (g_failures) {
    std::printf("%d CLI check(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all CLI checks passed\n");
  return 0;
}
