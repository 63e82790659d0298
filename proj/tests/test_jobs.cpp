#include <cmath>
#include <cstdlib>
#include <string>

#include "doctest.h"
#include "opa/jobs.hpp"

using namespace opa;
using nlohmann::json;

TEST_CASE("job round trip is canonical") {
  const json in = json::parse(R"({
    "command": "stabilize",
    "space": {"kind": "custom", "weights": [1, 2, 4], "extension": "constant"},
    "f": {"num": [[0.5, -0.25], 1], "den": [1, -0.5]},
    "n_max": 7,
    "eps": 1e-9,
    "format": "csv"
  })");
  const JobSpec job = parse_job(in);
  CHECK(job.command == Command::stabilize);
  CHECK(job.space.extension == Extension::constant);
  CHECK(job.f.den.has_value());
  CHECK(job.f.num[0] == cplx{0.5, -0.25});
  CHECK(job.n_max == 7);

  const auto once = serialize_job(job);
  const auto twice = serialize_job(parse_job(json::parse(once.dump())));
  CHECK(once.dump() == twice.dump());
  CHECK(once.contains("kernel"));
}

TEST_CASE("invalid jobs") {
  CHECK_THROWS_AS(parse_job(json::parse(R"({"colour": 1})")), Error);
  CHECK_THROWS_AS(parse_job(json::parse(R"({"command": "integrate"})")), Error);
  CHECK_THROWS_AS(parse_job(json::parse(R"({"space": {"kind": "bergman"}})")), Error);
  CHECK_THROWS_AS(parse_job(json::parse(R"({"f": [[1, 2, 3]]})")), Error);
  CHECK_THROWS_AS(parse_job(json::parse(R"({"n_max": -1})")), Error);
}

TEST_CASE("hardy alias") {
  const JobSpec job = parse_job(json::parse(R"({"space": {"kind": "hardy"}})"));
  CHECK(job.space.kind == WeightKind::dirichlet);
  CHECK(job.space.alpha == 0.0);
}

TEST_CASE("output is byte-identical across runs and thread counts") {
  JobSpec job = parse_job(json::parse(R"({
    "command": "approximate", "space": {"kind": "dirichlet", "alpha": 1},
    "f": [1, -1], "n_max": 12, "taylor": true})"));
  const std::string a = render(run_job(job, 1), OutputFormat::json);
  const std::string b = render(run_job(job, 1), OutputFormat::json);
  const std::string c = render(run_job(job, 3), OutputFormat::json);
  CHECK(a == b);
  CHECK(a == c);
  const std::string csv1 = render(run_job(job, 1), OutputFormat::csv);
  CHECK(csv1 == render(run_job(job, 4), OutputFormat::csv));
  CHECK(csv1.rfind("n,dist_sq,opa_residual,taylor_residual", 0) == 0);
  CHECK(csv1.find("-0,") == std::string::npos);
}

TEST_CASE("project job carries oracle checks") {
  const JobSpec job = parse_job(json::parse(R"({"command": "project", "f": [-0.5, 1], "n_max": 40})"));
  const auto out = run_job(job).data;
  CHECK(out["cyclic"] == false);
  CHECK(std::abs(out["phi_at_zero"][0].get<double>() - 0.25) < 1e-10);
  CHECK(out["oracle"]["recurrence_residual"].get<double>() < 1e-12);
  CHECK(out["oracle"]["phi_distance"].get<double>() < 1e-8);
  CHECK(out["oracle"].contains("blaschke_coefficient_gap"));
}

TEST_CASE("kernel job") {
  const JobSpec job = parse_job(json::parse(
      R"({"command": "kernel", "space": {"kind": "dirichlet", "alpha": 2}, "kernel": {"beta": 1, "k_max": 4}})"));
  const auto out = run_job(job).data;
  CHECK(out["reproducible"]["verdict"] == "yes");
  CHECK(std::abs(out["coefficients"][3][0].get<double>() - 1.0 / 16.0) < 1e-15);
}

TEST_CASE("stage errors name the stage") {
  const JobSpec job = parse_job(json::parse(R"({"command": "approximate", "f": [0, 1]})"));
  try {
    (void)run_job(job);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::orthogonal_data);
    CHECK(std::string(e.what()).find("stage '") == 0);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::orthogonal_data) == 2);
  CHECK(exit_code_for(ErrorCode::not_positive_definite) == 3);
  CHECK(exit_code_for(ErrorCode::ill_conditioned) == 3);
  CHECK(exit_code_for(ErrorCode::undecidable) == 4);
  CHECK(exit_code_for(ErrorCode::invalid_argument) == 1);
}

#ifdef OPA_CLI_PATH
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string(OPA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("command line exit codes") {
  CHECK(run_cli("approximate --f '[1,-1]' --n-max 3") == 0);
  CHECK(run_cli("approximate --f '[0,1]'") == 2);
  CHECK(run_cli("project --space '{\"kind\":\"custom\",\"weights\":[1,2,3]}' --f '[1,-1]'") == 4);
  CHECK(run_cli("approximate --f '[1,'") == 1);
  CHECK(run_cli("frobnicate") != 0);
}
#endif
