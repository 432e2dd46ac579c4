#ifndef EXACTSDP_SDP_H_
#define EXACTSDP_SDP_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactsdp/model.h"
#include "exactsdp/symcore.h"

namespace exactsdp {

enum class SdpStatus {
  kOptimal,
  kPrimalInfeasible,
  kDualInfeasible,
  kMaxIter,
  kNumericalTrouble,
};

std::string to_string(SdpStatus status);

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iterations = 200;
  double step_fraction = 0.98;
  int verbosity = 0;  // > 0 prints one line per iteration to stderr
};

struct IterationLog {
  int iteration = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double complementarity = 0.0;
  double alpha_primal = 0.0;  // step taken after this iterate was logged
  double alpha_dual = 0.0;
};

// A linear row <A, X> = rhs or <A, X> <= rhs.
struct LinearRow {
  SymMatrix A;
  double rhs = 0.0;
  bool inequality = false;
};

// minimize <C, X> over X ⪰ 0 subject to the rows. Its dual is
// maximize rhsᵀy s.t. C - Σ y_i A_i ⪰ 0, y_i <= 0 on inequality rows.
struct SdpProblem {
  SymMatrix C;
  std::vector<LinearRow> rows;
};

struct SdpRawSolution {
  SdpStatus status = SdpStatus::kNumericalTrouble;
  SymMatrix X;
  Vector slack;          // one entry per row; zero on equality rows
  Vector y;              // one multiplier per row
  SymMatrix Z;           // C - Σ y_i A_i
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;    // max_i |<A_i,X> + s_i - rhs_i|
  double dual_residual = 0.0;      // ‖C - Σ y_i A_i - Z_iterate‖_F / (1+‖C‖_F)
  double complementarity = 0.0;    // <X, Z> + Σ s_i (-y_i)
  int iterations = 0;
  std::vector<IterationLog> log;
  std::optional<Vector> dual_ray;  // improving ray when primal infeasible
  std::string message;
};

SdpRawSolution solve_sdp(const SdpProblem& problem, const SolverOptions& options = {});

// Solution of the relaxation of a ConicQcqp:
//   minimize <Q,X>  s.t. <H,X> = 1, <B_j,X> = 0 (eq), <AᵀA,X> = 0 (face),
//                        <B_k,X> <= 0 (ineq), X ⪰ 0,
// with dual  maximize t  s.t.  Y = Q - tH - Σ y_j B_j - y_f AᵀA - Σ y_k B_k ⪰ 0,
// y_k <= 0.
struct SdpSolution {
  SdpStatus status = SdpStatus::kNumericalTrouble;
  SymMatrix X;
  double t = 0.0;
  Vector y_eq;
  Vector y_ineq;
  double y_face = 0.0;
  SymMatrix Y;
  double primal_objective = 0.0;  // ζ_p
  double dual_objective = 0.0;    // ζ_d
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  std::vector<IterationLog> log;
  // Improving dual ray in the layout (t, y_eq..., y_face, y_ineq...).
  std::optional<Vector> dual_ray;
  std::string message;

  bool optimal() const { return status == SdpStatus::kOptimal; }
};

// A face A x = 0 is applied by restricting X to N W Nᵀ, N a basis of ker A;
// y_face is then the free multiplier that maximizes λ_min(Y).
SdpSolution solve(const ConicQcqp& p, const SolverOptions& options = {});

// Optimizes <objective, X> over {X ⪰ 0 : trace X = 1, <E_j,X> = 0, <F_k,X> <= 0}.
// Objective values are reported in the caller's sense (maximized when
// `maximize`); multipliers refer to the equivalent minimization.
SdpSolution solve_feasibility(std::span<const SymMatrix> eq,
                              std::span<const SymMatrix> ineq,
                              const SymMatrix& objective, bool maximize,
                              const SolverOptions& options = {});

}  // namespace exactsdp

#endif  // EXACTSDP_SDP_H_
