#include "cli.h"

#include <fstream>
#include <map>

#include <CLI11.hpp>

#include "exactsdp/certificates.h"
#include "exactsdp/instances.h"
#include "exactsdp/pipeline.h"
#include "exactsdp/problem_io.h"
#include "exactsdp/recovery.h"

namespace exactsdp::cli {
namespace {

struct Narrative {
  std::string title;
  std::string story;
};

const std::map<std::string, Narrative>& narratives() {
  static const std::map<std::string, Narrative> kText = {
      {"ex41",
       {"two concentric ellipsoid constraints",
        "minimize u'Q0u subject to u'Q1u <= 1 and u'Q2u <= 1. The second constraint is\n"
        "absorbed into the normalizer with a slack coordinate, leaving a single\n"
        "inequality block, so exactness holds with m = 1."}},
      {"ex42",
       {"two quadratic equalities",
        "minimize x'Qx subject to x'Bx = 1 and x'Hx = 1. Subtracting the normalizer\n"
        "gives one homogeneous equality block B - H; the pair {B - H, H - B} has a\n"
        "zero pairwise sum."}},
      {"ex43",
       {"two-sided trust region",
        "minimize q0(u) subject to -1 <= q1(u) <= 1. After the affine lift the two\n"
        "inequality blocks satisfy <B1 + B2, X> = -2 X_nn <= 0 on the PSD cone."}},
      {"ex44",
       {"two-sided trust region with a removed ball",
        "the feasible set of ex43 minus the ball ‖u‖ < gamma. With Q1 = O and\n"
        "b1 = (0,...,0,1/2) the pairwise-sum condition holds exactly for\n"
        "0 < gamma <= 4/5; at gamma = 1 the pair (B1, B3) fails it."}},
      {"ex45",
       {"diagonally dominant constraint family",
        "n inequality blocks whose k-th diagonal entry is at most 1, other diagonal\n"
        "entries at most -2 and off-diagonal entries within 1/(2n). Every\n"
        "-(B_k + B_l) is diagonally dominant, hence PSD."}},
      {"ex46",
       {"linear face added to an exact family",
        "the ex45 family with a homogeneous linear constraint Ax = 0, entered as\n"
        "the single equality <A'A, X> = 0. A'A is PSD, so the constraint cuts a face\n"
        "and exactness is inherited."}},
  };
  return kText;
}

int verdict_exit(OverallVerdict v) { return v == OverallVerdict::kFailed ? 1 : 0; }

void write_json(std::ostream& out, const nlohmann::json& j) { out << j.dump(2) << "\n"; }

bool write_report_file(const std::string& path, const nlohmann::json& j, std::ostream& err) {
  std::ofstream f(path);
  if (!f) {
    err << "error: cannot write " << path << "\n";
    return false;
  }
  f << j.dump(2) << "\n";
  return true;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certify, solve and recover exact SDP relaxations of QCQPs", "exactsdp"};
  app.require_subcommand(1);

  double tol = 1e-9;
  bool pairwise_only = false;
  bool json = false;
  std::string out_path;
  bool use_oracle = false;
  long long budget = 200000;
  std::uint64_t seed = 1;
  int verbosity = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", json, "Print the JSON report instead of text");
  };

  std::string file;
  auto* check = app.add_subcommand("check", "Certificate only");
  check->add_option("file", file, "Problem file")->required();
  check->add_option("--tol", tol, "Certification tolerance");
  check->add_flag("--pairwise-only", pairwise_only, "Stop after the pairwise-sum test");
  add_common(check);

  auto* solve_cmd = app.add_subcommand("solve", "Solve the SDP relaxation only");
  solve_cmd->add_option("file", file, "Problem file")->required();
  solve_cmd->add_flag("-v,--verbose", verbosity, "Print the iteration log");
  add_common(solve_cmd);

  auto* run_cmd = app.add_subcommand("run", "Certify, solve, recover and cross-check");
  run_cmd->add_option("file", file, "Problem file")->required();
  run_cmd->add_flag("--oracle", use_oracle, "Cross-check with the sampling oracle");
  run_cmd->add_option("--budget", budget, "Oracle sample budget")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", seed, "Oracle seed");
  run_cmd->add_flag("--pairwise-only", pairwise_only, "Stop certification after the pairwise-sum test");
  run_cmd->add_option("--out", out_path, "Also write the JSON report here");
  add_common(run_cmd);

  std::vector<std::string> files;
  auto* union_cmd = app.add_subcommand("union", "Minimize over a union of branch problems");
  union_cmd->add_option("files", files, "Branch problem files")->required();
  union_cmd->add_flag("--oracle", use_oracle, "Cross-check with the sampling oracle");
  union_cmd->add_option("--budget", budget, "Oracle sample budget")->check(CLI::PositiveNumber);
  union_cmd->add_option("--seed", seed, "Oracle seed");
  add_common(union_cmd);

  std::string family = "ex45";
  InstanceSpec spec;
  std::string base = "ex45";
  bool random_params = false;
  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->add_option("--family", family, "ex41..ex46, random-certified, random-uncertified")->required();
  gen->add_option("--n", spec.n, "Dimension (ex42, ex45, random families)");
  gen->add_option("--ell", spec.ell, "Dimension of u (ex41, ex43, ex44)");
  gen->add_option("--m", spec.m, "Inequality count (random families)");
  gen->add_option("--gamma", spec.gamma, "Removed-ball parameter (ex44)");
  gen->add_option("--seed", spec.seed, "Generator seed");
  gen->add_option("--face-rank", spec.face_rank, "Rows of A (ex46)");
  gen->add_option("--base", base, "Base family (ex46)");
  gen->add_flag("--random-params", random_params, "Random instead of worked parameters (ex41, ex42, ex44)");
  gen->add_option("--out", out_path, "Output problem file")->required();

  std::string demo_name;
  bool no_oracle = false;
  bool all_tiers = false;
  auto* demo = app.add_subcommand("demo", "Build a worked example and run the full chain");
  demo->add_option("example", demo_name, "ex41 | ex42 | ex43 | ex44 | ex45 | ex46")
      ->required()
      ->check(CLI::IsMember({"ex41", "ex42", "ex43", "ex44", "ex45", "ex46"}));
  demo->add_option("--gamma", spec.gamma, "Removed-ball parameter (ex44)");
  demo->add_option("--seed", spec.seed, "Generator seed");
  demo->add_option("--n", spec.n, "Dimension (ex45, ex46)");
  demo->add_option("--ell", spec.ell, "Dimension of u (ex43, ex44)");
  demo->add_flag("--no-oracle", no_oracle, "Skip the oracle cross-check");
  demo->add_flag("--all-tiers", all_tiers, "ex44: run the weaker certification tiers too");
  demo->add_option("--budget", budget, "Oracle sample budget")->check(CLI::PositiveNumber);
  add_common(demo);

  std::vector<std::string> argv_store;
  argv_store.push_back("exactsdp");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  RunOptions ro;
  ro.certify.tol = tol;
  ro.certify.pairwise_only = pairwise_only;
  ro.solver.verbosity = verbosity;
  ro.oracle = use_oracle;
  ro.oracle_budget = budget;
  ro.oracle_seed = seed;

  try {
    if (*check) {
      const ConicQcqp p = read_problem_file(file);
      const Certificate c = certify_exactness(p, ro.certify);
      if (json) {
        write_json(out, certificate_to_json(c));
      } else {
        out << "certificate: " << to_string(c.verdict) << "\n";
        for (const auto& e : c.pairs) {
          out << "  " << to_string(e.method) << " (" << c.block_name(e.k) << ", "
              << c.block_name(e.l) << "): " << (e.holds ? "holds" : "fails") << ", margin "
              << e.margin;
          if (e.tau) out << ", tau " << *e.tau;
          out << "\n";
        }
        if (c.failing_pair) {
          out << "failing pair: (" << c.block_name(c.failing_pair->first) << ", "
              << c.block_name(c.failing_pair->second) << ")\n";
        }
      }
      return 0;
    }
    if (*solve_cmd) {
      const ConicQcqp p = read_problem_file(file);
      const SdpSolution s = solve(p, ro.solver);
      if (json) {
        nlohmann::json j;
        j["status"] = to_string(s.status);
        j["zeta_p"] = s.primal_objective;
        j["zeta_d"] = s.dual_objective;
        j["gap"] = s.gap;
        j["iterations"] = s.iterations;
        j["X"] = matrix_to_json(s.X.dense());
        j["t"] = s.t;
        write_json(out, j);
      } else {
        out << "status: " << to_string(s.status) << "\n";
        out << "zeta_p: " << s.primal_objective << "\nzeta_d: " << s.dual_objective
            << "\ngap: " << s.gap << "\niterations: " << s.iterations << "\n";
      }
      return s.status == SdpStatus::kMaxIter || s.status == SdpStatus::kNumericalTrouble ? 1 : 0;
    }
    if (*run_cmd) {
      const ConicQcqp p = read_problem_file(file);
      const RunReport r = exactsdp::run(p, ro);
      if (json) {
        write_json(out, report_to_json(r));
      } else {
        out << render_text(r);
      }
      if (!out_path.empty() && !write_report_file(out_path, report_to_json(r), err)) return 2;
      return verdict_exit(r.verdict);
    }
    if (*union_cmd) {
      std::vector<ConicQcqp> branches;
      for (const auto& f : files) branches.push_back(read_problem_file(f));
      const UnionResult u = solve_union(branches, ro.solver, ro.recovery);
      nlohmann::json j;
      j["infeasible"] = u.infeasible;
      j["min_sdp_value"] = std::isfinite(u.min_sdp_value) ? nlohmann::json(u.min_sdp_value)
                                                           : nlohmann::json(nullptr);
      j["value"] = std::isfinite(u.value) ? nlohmann::json(u.value) : nlohmann::json(nullptr);
      j["branch"] = u.branch;
      if (u.branch >= 0) j["solution"] = rank_one_to_json(u.solution);
      nlohmann::json bj = nlohmann::json::array();
      for (const auto& b : u.branches) {
        bj.push_back({{"status", to_string(b.status)},
                      {"sdp_value", std::isfinite(b.sdp_value) ? nlohmann::json(b.sdp_value)
                                                               : nlohmann::json(nullptr)},
                      {"recovered", b.recovered},
                      {"error", b.error}});
      }
      j["branches"] = bj;
      if (use_oracle) j["oracle"] = oracle_to_json(oracle_union(branches, budget, seed));
      if (json) {
        write_json(out, j);
      } else if (u.infeasible) {
        out << "union: every branch is infeasible\n";
      } else {
        out << "union: " << branches.size() << " branches, minimum relaxation value "
            << u.min_sdp_value << "\n";
        if (u.branch >= 0) {
          out << "best verified branch " << u.branch << " with value " << u.value << "\n";
        }
        if (j.contains("oracle") && j["oracle"]["found"].get<bool>()) {
          out << "oracle: " << j["oracle"]["best_value"].get<double>() << "\n";
        }
      }
      return u.infeasible || u.branch >= 0 ? 0 : 1;
    }
    if (*gen) {
      spec.family = family_from_string(family);
      spec.base = family_from_string(base);
      spec.canonical = !random_params;
      const ConicQcqp p = build(spec);
      write_problem_file(out_path, p);
      out << "wrote " << out_path << " (" << to_string(spec.family) << ", n = " << p.n() << ")\n";
      return 0;
    }
    if (*demo) {
      spec.family = family_from_string(demo_name);
      if (spec.family == Family::kEx46) spec.n = std::max(spec.n, 3);
      const ConicQcqp p = build(spec);
      ro.oracle = !no_oracle && p.n() <= 6;
      if (spec.family == Family::kEx44 && !all_tiers) ro.certify.pairwise_only = true;
      const RunReport r = exactsdp::run(p, ro);
      if (json) {
        write_json(out, report_to_json(r));
      } else {
        const Narrative& nar = narratives().at(demo_name);
        out << "== " << demo_name << ": " << nar.title << " ==\n" << nar.story << "\n\n";
        out << render_text(r);
      }
      return verdict_exit(r.verdict);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace exactsdp::cli
