// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "generators.hpp"
#include "qwl/cli.hpp"
#include "qwl/errors.hpp"

using namespace qwl;
using qwl::io::Json;
namespace fs = std::filesystem;

namespace {

// Scratch directory removed at scope exit.
struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("qwl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string put(const std::string& name, const Json& j) const {
    const std::string path = (dir / name).string();
    io::write_file(path, j);
    return path;
  }
  std::string put_text(const std::string& name, const std::string& text) const {
    const std::string path = (dir / name).string();
    std::ofstream(path) << text;
    return path;
  }
};

cli::Outcome run(const std::string& verb, std::vector<std::string> inputs, const std::string& grid = "",
                 const std::string& output = "") {
  cli::Command cmd;
  cmd.verb = verb;
  cmd.inputs = std::move(inputs);
  if (!grid.empty()) cmd.t_grid = grid;
  cmd.output = output;
  return cli::run(cmd);
}

SuperOperator transpose_map() {
  CMatrix a = CMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i * 2 + j, j * 2 + i) = 1.0;
  return SuperOperator(2, 2, a);
}

SuperOperator phi_seed4() {
  Rng rng(4);
  return testgen::random_hermitian_map(rng, 2);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_grid") {
  const TGrid g = cli::parse_grid("1e-4:1:log:5");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(1e-4));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(cli::parse_grid("0.5:0.5:log:1").size() == 1);
  CHECK(cli::parse_grid("0.1:1:lin:10")[1] == doctest::Approx(0.9));
  for (const char* bad : {"1e-4:1:log", "0:1:log:3", "1:2:cubic:3", "1:2:log:2.5", "a:1:log:3", "1:2:log:1", "1:1:log:3"})
    CHECK_THROWS_AS(cli::parse_grid(bad), ParseError);
}

TEST_CASE("exit code contract on the documented examples") {
  Scratch s;
  const cli::Outcome pure = run("purity", {s.put("rank1.json", io::to_json(testgen::scalar_spec()))});
  CHECK(pure.exit_code == cli::kExitTrue);
  CHECK(pure.report["result"]["verdict"] == true);
  CHECK(pure.report["result"]["condition_iii"] == true);

  const cli::Outcome cp = run("check-cp", {s.put("transpose.json", io::to_json(transpose_map()))});
  CHECK(cp.exit_code == cli::kExitFalse);
  CHECK(cp.report["result"]["min_choi_eig"].get<double>() == doctest::Approx(-1.0));
  // Re-check the witness: (v, C v) < 0 on the Choi matrix.
  const CVector v = io::vector_from_json(cp.report["result"]["witness"]);
  CHECK((v.adjoint() * choi(transpose_map()) * v)(0, 0).real() < -0.5);

  const std::string out = (s.dir / "out").string();
  const cli::Outcome red =
      run("reduce", {s.put("nonunital.json", io::to_json(testgen::factor_spec(15, 2, 1, 2, 1, -0.5, true, 0.2)))}, "", out);
  CHECK(red.exit_code == cli::kExitError);
  CHECK(red.report["result"]["error"] == "NotUnital");
}

TEST_CASE("reduce writes specs that re-validate and re-certify") {
  Scratch s;
  const std::string spec = s.put("q2.json", io::to_json(testgen::factor_spec(11, 2, 1, 2, 1, -0.75)));
  const std::string out = (s.dir / "out").string();
  const cli::Outcome red = run("reduce", {spec}, "", out);
  REQUIRE(red.exit_code == cli::kExitTrue);
  CHECK(red.report["result"]["certificate"]["real_parts_positive"] == true);
  for (const char* name : {"eta.json", "enlarged.json"}) {
    const std::string path = (fs::path(out) / name).string();
    CHECK(io::validate_schema_file(path).empty());
    CHECK(run("purity", {path}).exit_code == cli::kExitTrue);
    CHECK(run("verify-qweight", {path}, "0.0625:1:log:5").exit_code == cli::kExitTrue);
  }
}

TEST_CASE("reports are byte-identical across runs and re-parse") {
  Scratch s;
  const std::string spec = s.put("q2.json", io::to_json(testgen::factor_spec(11, 2, 1, 2, 1, -0.75)));
  for (const char* verb : {"skeleton", "purity", "verify-qweight"}) {
    const std::string a = cli::render(run(verb, {spec}, "0.0625:1:log:5").report, "json");
    const std::string b = cli::render(run(verb, {spec}, "0.0625:1:log:5").report, "json");
    CHECK(a == b);
    CHECK(io::dump(io::parse(a)) == a);
  }
  const std::string canon = s.put("phi.json", io::to_json(phi_seed4()));
  cli::Command cmd;
  cmd.verb = "canonical";
  cmd.inputs = {canon};
  cmd.seed = 9;
  CHECK(cli::render(cli::run(cmd).report, "json") == cli::render(cli::run(cmd).report, "json"));
  CHECK(cli::run(cmd).report["result"]["reassembly_defect"].get<double>() < 1e-10);
}

TEST_CASE("text format lists leaves") {
  const Json r = Json{{"verdict", true}, {"grid", Json::array({Json{{"t", 0.5}}})}, {"z", Json::array({1.0, 0.0})}};
  CHECK(cli::render(r, "text") == "verdict = true\ngrid[0].t = 0.5\nz = [1,0]\n");
  CHECK_THROWS_AS(cli::render(r, "xml"), ParseError);
}

TEST_CASE("input errors exit 2 with context") {
  Scratch s;
  const cli::Outcome missing = run("purity", {(s.dir / "nope.json").string()});
  CHECK(missing.exit_code == cli::kExitError);
  CHECK(missing.report["result"]["error"] == "ParseError");

  const cli::Outcome syntax = run("purity", {s.put_text("bad.json", "{\n  \"p\": 1,\n  oops\n}")});
  CHECK(syntax.exit_code == cli::kExitError);
  CHECK(syntax.report["result"]["message"].get<std::string>().find("line 3") != std::string::npos);

  Json bad = io::to_json(testgen::scalar_spec());
  bad["weights"]["g"][0][0]["alpha"] = -1.0;
  const cli::Outcome schema = run("purity", {s.put("alpha.json", bad)});
  CHECK(schema.exit_code == cli::kExitError);
  CHECK(schema.report["result"]["message"].get<std::string>().find("alpha must exceed -1") != std::string::npos);

  CHECK(run("frobnicate", {}).exit_code == cli::kExitError);
  CHECK(run("purity", {}).exit_code == cli::kExitError);

  ::setenv("QWL_TOLERANCE_PROFILE", "loose", 1);
  const cli::Outcome env = run("gamma-selftest", {});
  ::unsetenv("QWL_TOLERANCE_PROFILE");
  CHECK(env.exit_code == cli::kExitError);
  CHECK(env.report["result"]["error"] == "InvalidTolerance");
}

TEST_CASE("hypothesis failures are verdicts, not input errors") {
  Scratch s;
  QWeightSpec spec = testgen::scalar_spec();
  spec.psi = SuperOperator::zero(1, 1);
  const cli::Outcome r = run("verify-qweight", {s.put("zero_psi.json", io::to_json(spec))});
  CHECK(r.exit_code == cli::kExitFalse);
  CHECK(r.report["result"]["error"] == "PsiNotInvertible");
}

TEST_CASE("subordinate, witness and gamma verbs") {
  Scratch s;
  const QWeightSpec spec = testgen::scalar_spec();
  const std::string path = s.put("rank1.json", io::to_json(spec));
  const cli::Outcome sub = run("subordinate", {path, s.put("sub.json", Json{{"psi_prime", io::to_json(spec.psi)}})},
                               "0.0625:1:log:5");
  CHECK(sub.exit_code == cli::kExitTrue);
  CHECK(sub.report["result"]["grid"].size() == 5);

  Json h = Json::array();
  for (int k = 0; k < spec.w.size(); ++k) h.push_back(Json::array());
  const Json witness{{"a", io::to_json(spec)},
                     {"b", io::to_json(spec)},
                     {"u", io::to_json(CMatrix::Identity(1, 1))},
                     {"lambda", 1.0},
                     {"h", h}};
  CHECK(run("witness", {s.put("w.json", witness)}).exit_code == cli::kExitTrue);
  Json broken = witness;
  broken.erase("u");
  CHECK(run("witness", {s.put("w2.json", broken)}).exit_code == cli::kExitError);

  const cli::Outcome g = run("gamma-selftest", {});
  CHECK(g.exit_code == cli::kExitTrue);
  CHECK(g.report["result"]["checks"][0]["rel_err"].get<double>() <= 1e-10);
}

TEST_CASE("choi-effros verb") {
  Scratch s;
  const cli::Outcome ok = run("choi-effros", {s.put("id.json", io::to_json(SuperOperator::identity(2)))});
  CHECK(ok.exit_code == cli::kExitTrue);
  CHECK(ok.report["result"]["structure"]["factors"].size() == 1);
  const cli::Outcome no = run("choi-effros", {s.put("twice.json", io::to_json(SuperOperator::identity(2) * 2.0))});
  CHECK(no.exit_code == cli::kExitFalse);
  CHECK(run("classify", {s.put("t.json", io::to_json(transpose_map()))}).exit_code == cli::kExitTrue);
}

}  // TEST_SUITE
