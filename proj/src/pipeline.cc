#include "exactsdp/pipeline.h"

#include <chrono>
#include <cmath>

namespace exactsdp {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

std::string to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::kExactVerified: return "ExactVerified";
    case OverallVerdict::kRelaxationOnly: return "RelaxationOnly";
    case OverallVerdict::kInfeasible: return "Infeasible";
    case OverallVerdict::kFailed: return "Failed";
  }
  return "Unknown";
}

double replay_violation(const ConicQcqp& p, const Vector& x) {
  const auto form = [&x](const SymMatrix& m) { return x.dot(m.dense() * x); };
  double v = std::abs(form(p.H) - 1.0);
  for (const auto& b : p.eq_blocks) v = std::max(v, std::abs(form(b)));
  for (const auto& b : p.ineq_blocks) v = std::max(v, form(b));
  if (p.face_rows) v = std::max(v, (*p.face_rows * x).cwiseAbs().maxCoeff());
  return v;
}

RunReport run(const ConicQcqp& p, const RunOptions& options) {
  RunReport r;
  r.meta = p.meta;
  r.meta["n"] = p.n();
  r.meta["num_eq"] = p.eq_blocks.size();
  r.meta["num_ineq"] = p.ineq_blocks.size();
  r.meta["face_rows"] = p.face_rows ? p.face_rows->rows() : 0;
  try {
    p.validate();
  } catch (const std::exception& e) {
    r.errors.push_back({"validate", e.what()});
    r.reasons.push_back("problem failed validation");
    return r;
  }

  auto t = Clock::now();
  try {
    r.certificate = certify_exactness(p, options.certify);
  } catch (const std::exception& e) {
    r.errors.push_back({"certify", e.what()});
  }
  r.timings.certify_ms = elapsed_ms(t);

  t = Clock::now();
  try {
    r.sdp = solve(p, options.solver);
  } catch (const std::exception& e) {
    r.errors.push_back({"solve", e.what()});
  }
  r.timings.solve_ms = elapsed_ms(t);
  if (!r.sdp) {
    r.reasons.push_back("relaxation could not be solved");
    return r;
  }
  if (r.sdp->status == SdpStatus::kPrimalInfeasible) {
    r.verdict = OverallVerdict::kInfeasible;
    r.reasons.push_back("relaxation infeasible, hence the QCQP is infeasible");
    return r;
  }
  if (!r.sdp->optimal()) {
    r.errors.push_back({"solve", "status " + to_string(r.sdp->status) +
                                     (r.sdp->message.empty() ? "" : ": " + r.sdp->message)});
    r.reasons.push_back(r.sdp->status == SdpStatus::kDualInfeasible
                            ? "relaxation unbounded below"
                            : "relaxation did not reach optimality");
    return r;
  }
  const double zeta = r.sdp->primal_objective;
  const double scale = 1.0 + std::abs(zeta);

  t = Clock::now();
  try {
    r.recovery = recover(p, *r.sdp, options.recovery);
    r.replay_passed = replay_violation(p, r.recovery->x) <= options.replay_tol &&
                      std::abs(r.recovery->x.dot(p.Q.dense() * r.recovery->x) - zeta) <=
                          options.recovery.objective_tol * scale;
  } catch (const std::exception& e) {
    r.errors.push_back({"recover", e.what()});
  }
  r.timings.recover_ms = elapsed_ms(t);

  if (options.oracle) {
    t = Clock::now();
    try {
      r.oracle = oracle_min(p, options.oracle_budget, options.oracle_seed);
    } catch (const std::exception& e) {
      r.errors.push_back({"oracle", e.what()});
    }
    r.timings.oracle_ms = elapsed_ms(t);
  }

  const bool certified = r.certificate && r.certificate->exact();
  if (!certified) {
    r.verdict = OverallVerdict::kRelaxationOnly;
    r.reasons.push_back(r.certificate ? "sufficient condition not certified (" +
                                            to_string(r.certificate->verdict) +
                                            "); relaxation value is a lower bound"
                                      : "certification errored; relaxation value is a lower bound");
    return r;
  }
  bool ok = true;
  if (!r.recovery) {
    ok = false;
    r.reasons.push_back("no verified rank-one solution");
  } else if (!r.replay_passed) {
    ok = false;
    r.reasons.push_back("recovered point failed the independent replay");
  }
  if (options.oracle) {
    if (!r.oracle || !r.oracle->found) {
      ok = false;
      r.reasons.push_back("oracle found no feasible point");
    } else if (std::abs(r.oracle->best_value - zeta) > options.oracle_tol * scale) {
      ok = false;
      r.reasons.push_back("oracle value disagrees with the relaxation");
    }
  }
  if (ok) {
    r.verdict = OverallVerdict::kExactVerified;
    r.reasons.push_back("certified, solved and recovered a verified rank-one optimum");
  } else {
    r.errors.push_back({"verdict", "certified instance could not be verified"});
  }
  return r;
}

}  // namespace exactsdp
