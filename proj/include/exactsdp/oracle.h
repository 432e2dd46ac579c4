#ifndef EXACTSDP_ORACLE_H_
#define EXACTSDP_ORACLE_H_

#include <cstdint>
#include <limits>
#include <span>

#include <json.hpp>

#include "exactsdp/model.h"

namespace exactsdp {

// Best feasible point found by sampling the slice xᵀHx = 1. best_value is an
// upper bound on the QCQP optimum, never a certificate of optimality.
struct OracleResult {
  bool found = false;  // false: "no feasible point found"
  double best_value = std::numeric_limits<double>::infinity();
  Vector best_x;
  long long samples_evaluated = 0;
  bool refined = false;  // best_x came out of local refinement
  int branch = -1;       // oracle_union only
};

struct OracleOptions {
  double feasibility_tol = 1e-8;
  int refine_starts = 12;  // best-merit samples handed to local refinement
  int penalty_stages = 5;
};

OracleResult oracle_min(const ConicQcqp& p, long long budget, std::uint64_t seed,
                        const OracleOptions& options = {});

OracleResult oracle_union(std::span<const ConicQcqp> problems, long long budget,
                          std::uint64_t seed, const OracleOptions& options = {});

nlohmann::json oracle_to_json(const OracleResult& r);

}  // namespace exactsdp

#endif  // EXACTSDP_ORACLE_H_
