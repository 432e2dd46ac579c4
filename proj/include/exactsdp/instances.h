#ifndef EXACTSDP_INSTANCES_H_
#define EXACTSDP_INSTANCES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "exactsdp/model.h"

namespace exactsdp {

enum class Family { kEx41, kEx42, kEx43, kEx44, kEx45, kEx46, kRandomCertified, kRandomUncertified };

std::string to_string(Family f);
Family family_from_string(const std::string& s);  // "ex45", "Ex45", "random-certified", ...

// Family parameters. Fields irrelevant to a family are ignored.
struct InstanceSpec {
  Family family = Family::kEx45;
  int n = 4;          // Ex45, Ex46 base, Random*
  int ell = 1;        // Ex41, Ex43, Ex44: dimension of u
  int m = 3;          // Random*: number of inequality blocks
  double gamma = 0.8; // Ex44
  std::uint64_t seed = 0;
  int face_rank = 1;  // Ex46: rows of A
  Family base = Family::kEx45;  // Ex46
  // Ex41, Ex42: the worked parameters; Ex44: Q1 = O, b1 = (0,...,0,1/2).
  bool canonical = true;
  std::optional<double> expected;  // known optimum, filled in by build()
};

ConicQcqp build(const InstanceSpec& spec);
// build() also stores the (possibly completed) spec in p.meta["instance"].
InstanceSpec built_spec(const ConicQcqp& p);

nlohmann::json spec_to_json(const InstanceSpec& s);
InstanceSpec spec_from_json(const nlohmann::json& j);

// Branch families sharing (Q, H = I): every branch is exact.
std::vector<ConicQcqp> make_union(std::uint64_t seed, int branches, int n);

// H = I against a positive definite equality block or a full-rank face, so
// the trace-one slice meets the face only at X = 0.
ConicQcqp make_infeasible(std::uint64_t seed, int n);
// The feasible counterpart: a rank-deficient face plus one inequality that
// is strictly satisfied by the normalized face projector.
ConicQcqp make_feasible_face(std::uint64_t seed, int n);

}  // namespace exactsdp

#endif  // EXACTSDP_INSTANCES_H_
