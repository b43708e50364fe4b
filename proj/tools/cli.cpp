// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#include "qwl/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#include "qwl/errors.hpp"
#include "qwl/numerics.hpp"

namespace qwl::cli {

namespace {

using io::Json;

// E_1(1) = Gamma(0, 1).
constexpr double kE1AtOne = 0.21938393439552027368;

struct Context {
  const Command& cmd;
  TolerancePolicy tol;
  TGrid grid;
};

// Mathematical hypothesis failures of a verb: reported as verdict false, not as input errors.
struct VerdictFalse {
  Json report;
};

const std::string& input(const Context& ctx, size_t i, const char* what) {
  if (ctx.cmd.inputs.size() <= i) throw ParseError(ctx.cmd.verb + ": missing input file (" + what + ")");
  return ctx.cmd.inputs[i];
}

Json error_report(const std::string& kind, const std::string& message) {
  return Json{{"verdict", false}, {"error", kind}, {"message", message}};
}

Outcome verdict(bool ok, Json report) { return {ok ? kExitTrue : kExitFalse, std::move(report)}; }

SuperOperator load_superop(const std::string& path) {
  const Json j = io::read_file(path);
  if (j.is_object() && j.contains("action")) return io::superop_from_json(j);
  return reassemble(io::canonical_from_json(j));
}

QWeightMap load_map(const Context& ctx, const std::string& path) {
  return assemble(io::qweight_spec_from_json(io::read_file(path)), ctx.tol);
}

Outcome do_check_cp(const Context& ctx) {
  const CpResult r = is_completely_positive(load_superop(input(ctx, 0, "superoperator")), ctx.tol);
  return verdict(r.is_cp, io::to_json(r));
}

Outcome do_canonical(const Context& ctx) {
  const SuperOperator phi = load_superop(input(ctx, 0, "superoperator"));
  const CanonicalForm cf = canonical_form(phi, ctx.tol, ctx.cmd.seed);
  Json r;
  r["canonical_form"] = io::to_json(cf);
  r["reassembly_defect"] = hs_norm(reassemble(cf) - phi);
  return {kExitTrue, r};
}

Outcome do_classify(const Context& ctx) {
  return {kExitTrue, io::to_json(classify(load_superop(input(ctx, 0, "superoperator")), ctx.tol))};
}

Outcome do_choi_effros(const Context& ctx) {
  const SuperOperator l = load_superop(input(ctx, 0, "superoperator"));
  const IdempotentReport idem = verify_idempotent(l, ctx.tol);
  if (!idem.holds) return verdict(false, Json{{"verdict", false}, {"idempotent", io::to_json(idem)}});
  Json r;
  r["verdict"] = true;
  r["idempotent"] = io::to_json(idem);
  r["structure"] = io::to_json(choi_effros(l, ctx.cmd.seed, ctx.tol));
  return {kExitTrue, r};
}

Outcome do_verify_qweight(const Context& ctx) {
  const QWeightSpec spec = io::qweight_spec_from_json(io::read_file(input(ctx, 0, "q-weight spec")));
  QWeightMap w;
  try {
    w = assemble(spec, ctx.tol);
  } catch (const PsiNotInvertible& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  } catch (const PsiInverseNotCP& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  } catch (const ConditionalNegativityFailure& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  } catch (const UnitInequalityFailure& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  }
  const BoundaryRepReport b = boundary_report(w, ctx.grid);
  Json r;
  r["verdict"] = b.all();
  r["p"] = w.p();
  r["q"] = w.q();
  r["m"] = w.spec.w.m;
  r["unital"] = w.unital;
  r["unit_gap"] = io::to_json(w.unit_gap);
  r["boundary"] = io::to_json(b);
  return verdict(b.all(), r);
}

Outcome do_skeleton(const Context& ctx) {
  const QWeightMap w = load_map(ctx, input(ctx, 0, "q-weight spec"));
  const SkeletonReport s = skeleton_suite(w, ctx.grid);
  Json r;
  r["verdict"] = s.all();
  r["skeleton"] = io::to_json(s);
  r["theta_limit"] = io::to_json(theta_limit(w, ctx.grid));
  return verdict(s.all(), r);
}

Outcome do_purity(const Context& ctx) {
  const PurityCertificate c = certify_q_pure(load_map(ctx, input(ctx, 0, "q-weight spec")));
  return verdict(c.verdict, io::to_json(c));
}

Outcome do_subordinate(const Context& ctx) {
  const QWeightMap w = load_map(ctx, input(ctx, 0, "q-weight spec"));
  const Json sub = io::read_file(input(ctx, 1, "subordinate {psi_prime, eta}"));
  if (!sub.is_object() || !sub.contains("psi_prime")) throw ParseError("psi_prime: missing field");
  const Json& pj = sub.at("psi_prime");
  const SuperOperator psi_prime = pj.is_object() && pj.contains("action") ? io::superop_from_json(pj)
                                                                          : reassemble(io::canonical_from_json(pj));
  Json r;
  if (!sub.contains("eta")) {
    const bool trivial = trivial_subordinate_check(w, psi_prime);
    QWeightSpec small_spec = w.spec;
    small_spec.psi = psi_prime;
    const std::vector<bool> grid_cp = subordinate_grid_check(w, assemble(small_spec, ctx.tol), ctx.grid);
    Json table = Json::array();
    for (size_t i = 0; i < ctx.grid.size(); ++i) table.push_back(Json{{"t", ctx.grid[i]}, {"cp", static_cast<bool>(grid_cp[i])}});
    r["verdict"] = trivial;
    r["mode"] = "trivial";
    r["grid"] = table;
    return verdict(trivial, r);
  }
  const VectorWeight eta = io::vector_weight_from_json(sub.at("eta"));
  try {
    const SubordinateResult s = construct_subordinate(w, eta, psi_prime, ctx.grid);
    Json table = Json::array();
    for (size_t i = 0; i < ctx.grid.size(); ++i) table.push_back(Json{{"t", ctx.grid[i]}, {"cp", static_cast<bool>(s.grid_cp[i])}});
    r["verdict"] = true;
    r["mode"] = "constructed";
    r["unital"] = s.map.unital;
    r["grid"] = table;
    return {kExitTrue, r};
  } catch (const EtaNotDominated& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  } catch (const PsiPrimeConditionFailure& e) {
    throw VerdictFalse{error_report(e.kind(), e.what())};
  }
}

Outcome do_reduce(const Context& ctx) {
  const QWeightMap w = load_map(ctx, input(ctx, 0, "q-weight spec"));
  const RankOneReduction red = reduce_to_rank_one(w, ctx.cmd.seed);
  Json r;
  r["verdict"] = red.certificate.hyper_maximal;
  r["certificate"] = io::to_json(red.certificate);
  if (!ctx.cmd.output.empty()) {
    const std::filesystem::path dir(ctx.cmd.output);
    std::filesystem::create_directories(dir);
    io::write_file((dir / "eta.json").string(), io::to_json(red.eta));
    io::write_file((dir / "enlarged.json").string(), io::to_json(red.enlarged));
    r["files"] = Json::array({(dir / "eta.json").string(), (dir / "enlarged.json").string(), (dir / "report.json").string()});
  } else {
    r["eta"] = io::to_json(red.eta);
    r["enlarged"] = io::to_json(red.enlarged);
  }
  return verdict(red.certificate.hyper_maximal, r);
}

Outcome do_witness(const Context& ctx) {
  const Json j = io::read_file(input(ctx, 0, "witness {a, b, u, lambda, h}"));
  for (const char* key : {"a", "b", "u", "lambda", "h"})
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string(key) + ": missing field");
  if (!j.at("lambda").is_number()) throw ParseError("lambda: expected a number");
  std::vector<AtomList> h;
  for (const Json& hk : j.at("h")) h.push_back(io::atoms_from_json(hk));
  const bool ok = verify_conjugacy_witness(io::qweight_spec_from_json(j.at("a")), io::qweight_spec_from_json(j.at("b")),
                                           io::matrix_from_json(j.at("u")), j.at("lambda").get<double>(), h, ctx.tol);
  return verdict(ok, Json{{"verdict", ok}});
}

Outcome do_gamma_selftest(const Context&) {
  Json rows = Json::array();
  bool ok = true;
  const double g01 = upper_incomplete_gamma(0.0, 1.0);
  const double e1_err = std::abs(g01 - kE1AtOne) / kE1AtOne;
  ok = ok && e1_err <= 1e-10;
  rows.push_back(Json{{"s", 0.0}, {"x", 1.0}, {"value", g01}, {"reference", kE1AtOne}, {"rel_err", e1_err}});
  for (const auto& [s, x] : std::vector<std::pair<double, double>>{{-0.5, 0.5}, {0.5, 2.0}, {1.5, 0.1}, {-0.9, 3.0}}) {
    const double v = upper_incomplete_gamma(s, x);
    const double ref = adaptive_quadrature([s = s](double u) { return std::pow(u, s - 1.0) * std::exp(-u); }, x, kInf, 1e-13);
    const double err = std::abs(v - ref) / std::abs(ref);
    ok = ok && err <= 1e-10;
    rows.push_back(Json{{"s", s}, {"x", x}, {"value", v}, {"reference", ref}, {"rel_err", err}});
  }
  return verdict(ok, Json{{"verdict", ok}, {"tolerance", 1e-10}, {"checks", rows}});
}

const std::map<std::string, std::function<Outcome(const Context&)>>& table() {
  static const std::map<std::string, std::function<Outcome(const Context&)>> t = {
      {"check-cp", do_check_cp},       {"canonical", do_canonical},     {"classify", do_classify},
      {"choi-effros", do_choi_effros}, {"verify-qweight", do_verify_qweight}, {"skeleton", do_skeleton},
      {"purity", do_purity},           {"subordinate", do_subordinate}, {"reduce", do_reduce},
      {"witness", do_witness},         {"gamma-selftest", do_gamma_selftest}};
  return t;
}

double parse_number(const std::string& s, const std::string& what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || !std::isfinite(v)) throw ParseError("--t-grid: bad " + what + " '" + s + "'");
  return v;
}

void flatten(const Json& j, const std::string& path, std::string& out) {
  const bool leaf_array =
      j.is_array() && std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_array() || e.is_object(); });
  if (j.is_object() && !j.empty()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
  } else if (j.is_array() && !leaf_array) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    out += (path.empty() ? "$" : path) + " = " + io::dump(j, -1) + "\n";
  }
}

}  // namespace

const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"check-cp", "canonical", "classify", "choi-effros",
                                             "verify-qweight", "skeleton", "purity", "subordinate",
                                             "reduce", "witness", "gamma-selftest"};
  return v;
}

TGrid parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t pos; (pos = text.find(':', start)) != std::string::npos; start = pos + 1) parts.push_back(text.substr(start, pos - start));
  parts.push_back(text.substr(start));
  if (parts.size() != 4) throw ParseError("--t-grid: expected start:stop:log:count, got '" + text + "'");
  const double a = parse_number(parts[0], "start");
  const double b = parse_number(parts[1], "stop");
  const double n = parse_number(parts[3], "count");
  if (parts[2] != "log" && parts[2] != "lin") throw ParseError("--t-grid: spacing must be log or lin");
  if (!(a > 0.0) || !(b > 0.0)) throw ParseError("--t-grid: cutoffs must be positive");
  if (n != std::floor(n) || n < 1 || n > 10000) throw ParseError("--t-grid: count must be an integer in [1, 10000]");
  const int count = static_cast<int>(n);
  if (count == 1 && a != b) throw ParseError("--t-grid: count 1 needs start == stop");
  TGrid grid;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    grid.push_back(parts[2] == "log" ? std::exp(std::log(a) + f * (std::log(b) - std::log(a))) : a + f * (b - a));
  }
  std::sort(grid.begin(), grid.end(), std::greater<>());
  try {
    validate_grid(grid);
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("--t-grid: ") + e.what());
  }
  return grid;
}

Outcome run(const Command& cmd) {
  Outcome out;
  try {
    const auto it = table().find(cmd.verb);
    if (it == table().end()) throw ParseError("unknown verb '" + cmd.verb + "'");
    TolerancePolicy tol = TolerancePolicy::from_env();
    if (cmd.eps_psd) tol.eps_psd = *cmd.eps_psd;
    if (cmd.eps_eq) tol.eps_eq = *cmd.eps_eq;
    tol.validate();
    Context ctx{cmd, tol, cmd.t_grid ? parse_grid(*cmd.t_grid) : dyadic_grid()};
    out = it->second(ctx);
  } catch (const VerdictFalse& v) {
    out = {kExitFalse, v.report};
  } catch (const Error& e) {
    out = {kExitError, error_report(e.kind(), e.what())};
  } catch (const std::exception& e) {
    out = {kExitError, error_report("Error", e.what())};
  }
  Json wrapped;
  wrapped["verb"] = cmd.verb;
  wrapped["exit_code"] = out.exit_code;
  wrapped["seed"] = cmd.seed;
  wrapped["result"] = out.report;
  out.report = std::move(wrapped);
  return out;
}

std::string render(const io::Json& report, const std::string& format) {
  if (format == "json") return io::dump(report);
  if (format == "text") {
    std::string out;
    flatten(report, "", out);
    return out;
  }
  throw ParseError("unknown format '" + format + "'");
}

int main(int argc, char** argv) {
  Command cmd;
  CLI::App app{"qwl: certification of superoperators, weight families and q-weight maps"};
  app.add_option("verb", cmd.verb, "Operation")->required()->check(CLI::IsMember(verbs()));
  app.add_option("inputs", cmd.inputs, "Input JSON files");
  app.add_option("--t-grid", cmd.t_grid, "Cutoff grid start:stop:log:count (default 2^-j, j = 0..14)");
  app.add_option("--eps-psd", cmd.eps_psd, "PSD tolerance override");
  app.add_option("--eps-eq", cmd.eps_eq, "Equality tolerance override");
  app.add_option("--seed", cmd.seed, "Seed for randomized sweeps and bases");
  app.add_option("--format", cmd.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("-o,--output", cmd.output, "Report file (a directory for reduce)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  const Outcome out = run(cmd);
  const std::string text = render(out.report, cmd.format);
  if (out.exit_code == kExitError) std::cerr << "qwl: " << out.report["result"].value("message", "error") << "\n";
  try {
    if (cmd.output.empty()) {
      std::cout << text;
    } else if (cmd.verb == "reduce") {
      std::filesystem::create_directories(cmd.output);
      std::ofstream((std::filesystem::path(cmd.output) / "report.json").string()) << text;
      std::cout << text;
    } else {
      std::ofstream f(cmd.output);
      if (!f) throw Error(cmd.output + ": cannot open file for writing");
      f << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "qwl: " << e.what() << "\n";
    return kExitError;
  }
  return out.exit_code;
}

}  // namespace qwl::cli
