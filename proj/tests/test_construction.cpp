#include <doctest.h>

#include <cmath>

#include "denjoy/construction.hpp"
#include "denjoy/errors.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace denjoy;

namespace {

const double kEps = std::sqrt(2.0) / 8.0;
const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

ConstructionParams params(int K) {
  ConstructionParams P;
  P.eps = kEps;
  P.rho_star = kGolden;
  P.l = 0.75;
  P.K = K;
  P.enclosure_iters = 50000;
  return P;
}

}  // namespace

TEST_CASE("init_stage0 acceptance and geometry") {
  // 4*eps ~ 0.7071 < 0.75, accepted
  auto S = init_stage0(params(1));
  auto flats = S.M.flat_set();
  REQUIRE(flats.size() == 1);
  CHECK(flats[0].length() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(S.M.tangency_order(S.U.lo, MapDescriptor::Side::Left).order == 2);
  CHECK(S.M.tangency_order(S.U.hi, MapDescriptor::Side::Right).order == 2);
  CHECK(S.schedule == std::vector<long>{1});

  // 4*0.2 = 0.8 > 0.75 rejected
  auto bad = params(1);
  bad.eps = 0.2;
  CHECK_THROWS_AS(init_stage0(bad), LengthTooSmall);
}

TEST_CASE("find_hit_time on a pure rotation, against a brute-force oracle") {
  auto rot = helpers::make_rotation(kGolden);
  auto hit = find_hit_time(rot, {0.0, 0.01}, {0.5, 0.6}, 100000);
  auto lift = [&](double x) { return rot.eval(x); };
  long brute = oracles::brute_hit_time(lift, 0.0, 0.01, 0.5, 0.6, 100000);
  CHECK(brute == 9);
  CHECK(hit.m == brute);

  CHECK_THROWS_AS(find_hit_time(rot, {0.52, 0.55}, {0.5, 0.6}, 100), PreconditionViolated);
  CHECK_THROWS_AS(find_hit_time(rot, {0.0, 0.01}, {0.5, 0.6}, 1), HitBudgetExceeded);
}

TEST_CASE("stage step: telescoping, schedule, Cauchy bound") {
  auto P = params(2);
  auto S0 = init_stage0(P);
  auto out = run_stage(S0, P);
  const auto& S1 = out.state;

  CHECK(S1.n == 1);
  CHECK(std::abs(S1.U.length() - (0.75 - 2.0 * kEps)) < 1e-12);
  CHECK(S1.U.length() == doctest::Approx(0.396446609406726).epsilon(1e-12));
  REQUIRE(S1.schedule.size() == 2);
  CHECK(S1.schedule[1] == 1 + out.trace.m);
  CHECK(S1.schedule[1] > S1.schedule[0]);
  CHECK(out.trace.stage_cnp1 <= 0.5);  // ||F_1 - F_0||_{C^1} <= 1/2
  CHECK(std::abs(out.trace.split_gap - kEps) < 1e-15);
  CHECK(out.report.all_pass());
  // step 0 is even-type: approach from the left, fresh right junction order 4
  CHECK(out.trace.side == 'L');
  CHECK(out.trace.fresh_order == 4);
  CHECK(S1.M.tangency_order(S1.U.hi, MapDescriptor::Side::Right).order == 4);
  CHECK(S1.M.tangency_order(S1.U.lo, MapDescriptor::Side::Left).order == 2);
}

TEST_CASE("verify_conditions: fresh stage 0 passes, planted violation caught") {
  auto P = params(1);
  auto S0 = init_stage0(P);
  auto rep = verify_conditions(S0, nullptr);
  CHECK(rep.all_pass());
  for (int c = 1; c <= 6; ++c) CHECK(rep.row(c).pass);

  StageState bad = S0;
  bad.I = {S0.U.mid() - 0.01, S0.U.mid() + 0.01};  // inside the flat interval
  auto rep2 = verify_conditions(bad, nullptr);
  CHECK_FALSE(rep2.row(10).pass);
  CHECK(rep2.row(10).note.find("j=") != std::string::npos);
}

TEST_CASE("two stages: parity tables and closed-form telescoping") {
  auto P = params(2);
  auto result = run(P);
  REQUIRE(result.states.size() == 3);
  for (int i = 0; i <= 2; ++i) {
    double want = oracles::telescoped_length(0.75, kEps, i);
    CHECK(std::abs(result.states[i].U.length() - want) < 1e-12);
    CHECK(result.certificate.reports[i].all_pass());
  }
  // parity table: stage 1 odd (left 2, right 4); stage 2 even (left 4, right 4)
  const auto& M1 = result.states[1].M;
  const auto& M2 = result.states[2].M;
  CHECK(M1.tangency_order(result.states[1].U.lo, MapDescriptor::Side::Left).order == 2);
  CHECK(M1.tangency_order(result.states[1].U.hi, MapDescriptor::Side::Right).order == 4);
  CHECK(M2.tangency_order(result.states[2].U.lo, MapDescriptor::Side::Left).order == 4);
  CHECK(M2.tangency_order(result.states[2].U.hi, MapDescriptor::Side::Right).order == 4);
  // schedule strictly increasing, decay staircase positive
  for (std::size_t k = 1; k < result.certificate.schedule.size(); ++k)
    CHECK(result.certificate.schedule[k] > result.certificate.schedule[k - 1]);
  for (double len : result.certificate.decay) CHECK(len > 0.0);
  for (std::size_t j = 0; j < result.certificate.decay.size(); ++j)
    CHECK(result.certificate.decay[j] < result.certificate.decay_bounds[j]);
  // Cauchy table
  for (std::size_t i = 0; i < result.certificate.cauchy.size(); ++i)
    CHECK(result.certificate.cauchy[i] <= std::pow(0.5, static_cast<double>(i + 1)));
}

TEST_CASE("anchored mode keeps the left endpoint pinned") {
  auto P = params(1);
  P.anchor = AnchorConfig{0.05, 0.5};
  auto S0 = init_stage0(P);
  CHECK(S0.U.lo == 0.05);
  CHECK(S0.M.derivative_at(1, 0.05, MapDescriptor::Side::Left) > 0.5);

  auto out = run_stage(S0, P);
  CHECK(out.state.U.lo == 0.05);  // bit-exact: the left side is never touched
  CHECK(out.state.M.derivative_at(1, 0.05, MapDescriptor::Side::Left) > 0.5);
  CHECK(out.state.M.tangency_order(out.state.U.hi, MapDescriptor::Side::Right).order == 3);
  CHECK(out.report.all_pass());
}
