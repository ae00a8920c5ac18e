#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "subgrad/instances.hpp"
#include "subgrad/io.hpp"
#include "subgrad/objective.hpp"
#include "subgrad/run.hpp"
#include "subgrad/schedule.hpp"

using namespace subgrad;
using nlohmann::json;

TEST_CASE("17-digit real formatting round-trips exactly") {
  Rng rng(60);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.normal()) * std::pow(10.0, rng.uniform(-8.0, 8.0));
    CHECK(std::stod(fmt_real(v)) == v);
  }
  CHECK(fmt_real(0.25) == "0.25");
  CHECK(fmt_real(0.0) == "0");
}

TEST_CASE("instances round-trip through JSON bitwise") {
  const RpcaInstance rp = gen_rpca_instance(61, 3, 4, 2, 0.3, 2.0);
  const Objective rp2 = objective_from_json(json::parse(instance_to_json(rp)));
  REQUIRE(rp2.is_rpca());
  CHECK(rp2.rpca().M.a == rp.M.a);
  CHECK(rp2.rpca().r == rp.r);

  const PhaseInstance ph = gen_phase_instance(62, 3, 5, 0.4, 3.0);
  const Objective ph2 = objective_from_json(json::parse(instance_to_json(ph)));
  REQUIRE(ph2.is_phase());
  CHECK(ph2.phase().a == ph.a);
  CHECK(ph2.phase().b == ph.b);

  const SensingInstance se = gen_sensing_instance(63, 2, 3, 1, 1, 4, 0.2, 1.0);
  const Objective se2 = objective_from_json(json::parse(instance_to_json(se)));
  REQUIRE(se2.is_sensing());
  for (std::size_t i = 0; i < se.A.size(); ++i) CHECK(se2.sensing().A[i].a == se.A[i].a);
  CHECK(se2.sensing().b == se.b);

  const SymRankOne sym{{0.5, -1.5, 2.0}};
  const Objective sym2 = objective_from_json(json::parse(instance_to_json(sym)));
  REQUIRE(sym2.is_sym_rank_one());
  CHECK(sym2.sym().u == sym.u);
}

TEST_CASE("instance parsing rejects malformed inputs") {
  CHECK_THROWS_AS(objective_from_json(json::parse(R"({"kind":"rpca"})")), json::exception);
  CHECK_THROWS_AS(
      objective_from_json(json::parse(R"({"kind":"bogus","dims":[1],"entries":[[1.0]]})")),
      ParameterError);
  CHECK_THROWS_AS(
      objective_from_json(json::parse(
          R"({"kind":"rpca","dims":[1,1],"entries":[[1.0]],"r":1,"extra":2})")),
      ParameterError);
  CHECK_THROWS_AS(
      objective_from_json(json::parse(R"({"kind":"rpca","dims":[2,2],"entries":[[1.0]],"r":1})")),
      ParameterError);
  CHECK_THROWS_AS(
      objective_from_json(json::parse(R"({"kind":"rpca","dims":[2,2],"entries":[[1,2,3,4]],"r":5})")),
      ParameterError);
}

TEST_CASE("run CSV has the pinned header, LF endings, and one row per iteration") {
  const Objective obj{SymRankOne{{1.0, 1.0}}};
  const RunRecord rec = run_subgradient(obj, {0.4, -0.7}, StepSchedule::harmonic(0.3), 25);
  const std::string csv = run_record_csv(rec);
  CHECK(csv.rfind("k,alpha,f,x_norm,step_norm,tie_dist\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 26);  // header + 25 iterations
  CHECK(run_record_csv(rec) == csv);  // emission is deterministic
}

TEST_CASE("flow CSV carries the monitor columns") {
  PhaseInstance inst;
  inst.a = {{1.0}};
  inst.b = {1.0};
  const FlowRecord rec = integrate_flow(Objective{inst}, {2.0}, 1e-2, 0.1);
  const std::string csv = flow_record_csv(rec);
  CHECK(csv.rfind("t,f,x_norm,length,energy,monitor1,monitor2\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == rec.size() + 1);
}

TEST_CASE("atomic_write leaves no temp file and writes the exact bytes") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "subgrad_io_test";
  std::filesystem::create_directories(dir);
  const std::filesystem::path target = dir / "artifact.txt";
  atomic_write(target, "payload\n");
  std::ifstream in(target);
  std::string line;
  std::getline(in, line);
  CHECK(line == "payload");
  CHECK(!std::filesystem::exists(dir / "artifact.txt.tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("convergence and landscape reports are stable JSON") {
  ConvergenceReport rep;
  rep.status = ConvergenceReport::Status::Converged;
  rep.limit_estimate = {1.0, -0.5};
  rep.trailing_displacement = 1e-9;
  const std::string j = convergence_report_json(rep);
  const json parsed = json::parse(j);
  CHECK(parsed.at("status") == "converged");
  CHECK(parsed.at("limit_estimate").size() == 2);

  const json land = json::parse(landscape_report_json({0.0, 1.0}, {1e-12, 1e-12}, 1e-6));
  CHECK(land.at("class") == "spurious_a");
  CHECK(land.at("wedge_member") == false);
}
