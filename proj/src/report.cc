#include <cmath>
#include <iomanip>
#include <sstream>

#include "exactsdp/pipeline.h"

namespace exactsdp {
namespace {

nlohmann::json sdp_stable(const SdpSolution& s) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  if (s.optimal()) {
    j["zeta_p"] = s.primal_objective;
    j["zeta_d"] = s.dual_objective;
    j["gap"] = s.gap;
  }
  if (!s.message.empty()) j["message"] = s.message;
  return j;
}

}  // namespace

nlohmann::json report_stable_json(const RunReport& r) {
  nlohmann::json j;
  j["meta"] = r.meta;
  j["certificate"] = r.certificate ? certificate_to_json(*r.certificate) : nlohmann::json(nullptr);
  j["sdp"] = r.sdp ? sdp_stable(*r.sdp) : nlohmann::json(nullptr);
  if (r.recovery) {
    j["recovery"] = rank_one_to_json(*r.recovery);
    j["recovery"]["replay_passed"] = r.replay_passed;
  } else {
    j["recovery"] = nullptr;
  }
  if (r.oracle) j["oracle"] = oracle_to_json(*r.oracle);
  j["verdict"] = to_string(r.verdict);
  j["reasons"] = r.reasons;
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : r.errors) errs.push_back({{"stage", e.stage}, {"message", e.message}});
  j["errors"] = errs;
  return j;
}

nlohmann::json report_to_json(const RunReport& r) {
  nlohmann::json j = report_stable_json(r);
  nlohmann::json t;
  t["certify_ms"] = r.timings.certify_ms;
  t["solve_ms"] = r.timings.solve_ms;
  t["recover_ms"] = r.timings.recover_ms;
  t["oracle_ms"] = r.timings.oracle_ms;
  if (r.sdp) {
    t["sdp_iterations"] = r.sdp->iterations;
    t["sdp_primal_residual"] = r.sdp->primal_residual;
    t["sdp_dual_residual"] = r.sdp->dual_residual;
  }
  j["timings"] = t;
  return j;
}

std::string render_text(const RunReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "problem: n=" << r.meta.value("n", 0) << ", " << r.meta.value("num_ineq", 0)
     << " inequality, " << r.meta.value("num_eq", 0) << " equality";
  if (r.meta.value("face_rows", 0) > 0) os << ", face rows " << r.meta.value("face_rows", 0);
  os << "\n";
  if (r.meta.contains("instance")) os << "instance: " << r.meta["instance"].dump() << "\n";
  if (r.certificate) {
    const Certificate& c = *r.certificate;
    os << "certificate: " << to_string(c.verdict) << "\n";
    for (const auto& e : c.pairs) {
      if (e.holds) continue;
      os << "  " << to_string(e.method) << " fails for (" << c.block_name(e.k) << ", "
         << c.block_name(e.l) << "): margin " << e.margin << "\n";
    }
    if (c.failing_pair) {
      os << "  failing pair: (" << c.block_name(c.failing_pair->first) << ", "
         << c.block_name(c.failing_pair->second) << ")"
         << " -- sufficient condition failed, exactness not disproved\n";
    }
    for (std::size_t i = 0; i < c.redundant.size(); ++i) {
      if (c.redundant[i]) {
        os << "  " << c.block_name(static_cast<int>(i)) << " is implied by "
           << c.block_name(c.redundant_witness[i]) << "\n";
      }
    }
  }
  if (r.sdp) {
    os << "sdp: " << to_string(r.sdp->status);
    if (r.sdp->optimal()) {
      os << ", zeta_p = " << r.sdp->primal_objective << ", zeta_d = " << r.sdp->dual_objective
         << ", gap = " << std::setprecision(3) << r.sdp->gap << std::setprecision(10);
    }
    os << " (" << r.sdp->iterations << " iterations)\n";
  }
  if (r.recovery) {
    const RankOneSolution& s = *r.recovery;
    os << "recovery: " << s.provenance_label() << ", objective " << s.objective
       << ", max violation " << std::setprecision(3) << s.residuals.max_violation()
       << std::setprecision(10) << ", x = [";
    for (Eigen::Index i = 0; i < s.x.size(); ++i) os << (i ? ", " : "") << s.x(i);
    os << "]\n";
  }
  if (r.oracle) {
    if (r.oracle->found) {
      os << "oracle: best " << r.oracle->best_value << " over " << r.oracle->samples_evaluated
         << " samples" << (r.oracle->refined ? " (refined)" : "") << "\n";
    } else {
      os << "oracle: no feasible point found\n";
    }
  }
  for (const auto& e : r.errors) os << "error [" << e.stage << "]: " << e.message << "\n";
  os << "verdict: " << to_string(r.verdict);
  if (!r.reasons.empty()) os << " -- " << r.reasons.back();
  os << "\n";
  return os.str();
}

}  // namespace exactsdp
