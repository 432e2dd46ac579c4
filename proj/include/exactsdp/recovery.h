#ifndef EXACTSDP_RECOVERY_H_
#define EXACTSDP_RECOVERY_H_

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "exactsdp/error.h"
#include "exactsdp/model.h"
#include "exactsdp/sdp.h"
#include "exactsdp/symcore.h"

namespace exactsdp {

struct SturmDecomposition {
  std::vector<Vector> vectors;  // X ≈ Σ x_i x_iᵀ
  int rank = 0;
  int rotations = 0;            // <= rank - 1
  bool equality = false;        // the equality variant was applied
};

// Splits X ⪰ 0 with <B,X> <= tol into rank-one terms with x_iᵀBx_i <= tol;
// when |<B,X>| <= tol every |x_iᵀBx_i| <= tol. Eigenvalues below
// rank_tol·λ_max(X) are dropped.
SturmDecomposition sturm_decompose(const SymMatrix& x, const SymMatrix& b, double tol,
                                   double rank_tol = 1e-9);

enum class Provenance { kAlreadyRankOne, kCaseA, kCaseB };

std::string to_string(Provenance p);

// Residuals of a candidate x against every constraint of a ConicQcqp.
struct Residuals {
  double objective = 0.0;  // xᵀQx
  double normalizer = 0.0; // xᵀHx - 1
  Vector eq;               // xᵀB_j x
  Vector ineq;             // xᵀB_k x
  double face = 0.0;       // ‖A x‖²
  double max_violation() const;
};

Residuals evaluate(const ConicQcqp& p, const Vector& x);

struct RankOneSolution {
  Vector x;
  double objective = 0.0;
  double sdp_value = 0.0;
  Residuals residuals;
  Provenance provenance = Provenance::kAlreadyRankOne;
  // Case (a): the active constraint used for the decomposition.
  bool active_is_equality = false;
  int active_index = -1;
  int walk_steps = 0;        // Case (b) rank-reduction steps taken
  double walk_drift = 0.0;   // max |<Q,X(α)> - ζ_p| over the walk
  bool verified = false;
  int candidates_tried = 0;

  std::string provenance_label() const;  // "CaseA(B2)", "CaseB", ...
};

struct RecoveryOptions {
  double tol = 1e-6;           // activity, numerical rank and residual tolerance
  double objective_tol = 1e-5; // relative objective match against ζ_p
  int max_walk_steps = 64;
};

// Criteria a candidate must pass. Free so callers can replay them.
bool verify_candidate(const ConicQcqp& p, const Residuals& r, double sdp_value,
                      const RecoveryOptions& options = {});

class RecoveryError : public Error {
 public:
  enum class Kind { kNoVerifiedCandidate, kRankReductionStall, kNotOptimal };
  RecoveryError(Kind kind, const std::string& what, std::vector<Residuals> candidates = {})
      : Error(what), kind_(kind), candidates_(std::move(candidates)) {}
  Kind kind() const { return kind_; }
  const std::vector<Residuals>& candidates() const { return candidates_; }

 private:
  Kind kind_;
  std::vector<Residuals> candidates_;
};

RankOneSolution recover(const ConicQcqp& p, const SdpSolution& sol,
                        const RecoveryOptions& options = {});

struct BranchOutcome {
  SdpStatus status = SdpStatus::kNumericalTrouble;
  double sdp_value = std::numeric_limits<double>::infinity();
  bool recovered = false;  // verified rank-one point found
  double recovered_value = std::numeric_limits<double>::infinity();
  std::string error;
};

struct UnionResult {
  bool infeasible = false;  // every branch infeasible
  double value = std::numeric_limits<double>::infinity();
  int branch = -1;          // 0-based index of the winning branch
  RankOneSolution solution;
  double min_sdp_value = std::numeric_limits<double>::infinity();
  std::vector<BranchOutcome> branches;
};

// Branches must share Q, H and the dimension. Throws Error naming the branch
// on NumericalTrouble or MaxIter.
UnionResult solve_union(std::span<const ConicQcqp> problems,
                        const SolverOptions& solver = {},
                        const RecoveryOptions& options = {});

nlohmann::json residuals_to_json(const Residuals& r);
nlohmann::json rank_one_to_json(const RankOneSolution& s);

}  // namespace exactsdp

#endif  // EXACTSDP_RECOVERY_H_
