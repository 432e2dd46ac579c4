#ifndef EXACTSDP_PIPELINE_H_
#define EXACTSDP_PIPELINE_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exactsdp/certificates.h"
#include "exactsdp/model.h"
#include "exactsdp/oracle.h"
#include "exactsdp/recovery.h"
#include "exactsdp/sdp.h"

namespace exactsdp {

enum class OverallVerdict { kExactVerified, kRelaxationOnly, kInfeasible, kFailed };

std::string to_string(OverallVerdict v);

struct RunOptions {
  CertifyOptions certify;
  SolverOptions solver;
  RecoveryOptions recovery;
  bool oracle = false;
  long long oracle_budget = 200000;
  std::uint64_t oracle_seed = 1;
  double oracle_tol = 1e-3;  // relative to 1 + |ζ_p|
  double replay_tol = 1e-6;
};

struct StageError {
  std::string stage;  // "validate", "certify", "solve", "recover", "oracle", "verdict"
  std::string message;
};

struct Timings {
  double certify_ms = 0.0;
  double solve_ms = 0.0;
  double recover_ms = 0.0;
  double oracle_ms = 0.0;
};

struct RunReport {
  nlohmann::json meta;
  std::optional<Certificate> certificate;
  std::optional<SdpSolution> sdp;
  std::optional<RankOneSolution> recovery;
  std::optional<OracleResult> oracle;
  bool replay_passed = false;
  OverallVerdict verdict = OverallVerdict::kFailed;
  std::vector<StageError> errors;
  std::vector<std::string> reasons;  // why the verdict is what it is
  Timings timings;
};

RunReport run(const ConicQcqp& p, const RunOptions& options = {});

// Max constraint violation of x, computed without the recovery module.
double replay_violation(const ConicQcqp& p, const Vector& x);

// {meta, certificate, sdp, recovery, oracle?, verdict, timings}.
nlohmann::json report_to_json(const RunReport& r);
// report_to_json without the volatile parts (timings, iteration counts).
nlohmann::json report_stable_json(const RunReport& r);
std::string render_text(const RunReport& r);

}  // namespace exactsdp

#endif  // EXACTSDP_PIPELINE_H_
