#ifndef EXACTSDP_CERTIFICATES_H_
#define EXACTSDP_CERTIFICATES_H_

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "exactsdp/model.h"
#include "exactsdp/sdp.h"
#include "exactsdp/symcore.h"

namespace exactsdp {

enum class Verdict {
  kExactByPairwisePSD,
  kExactByTauLineSearch,
  kExactByDirectSubsetTest,
  kTriviallyExact,
  kInconclusive,
  // The sufficient condition failed for some pair. Exactness is not disproved.
  kConditionFails,
};

std::string to_string(Verdict v);

enum class PairMethod { kPairwisePsd, kTauLineSearch, kSubsetDirect };

std::string to_string(PairMethod m);

// Evidence for one pair of working blocks. Indices refer to
// Certificate::blocks. For kPairwisePsd, margin = min_eig(-(B_k + B_l)). For
// kTauLineSearch, margin = max_tau min_eig(-B_l - tau B_k). For kSubsetDirect,
// margin = max{<B_l,X> : <B_k,X> = 0, tr X = 1, X ⪰ 0} (holds iff <= tol);
// -inf when that slice is empty.
struct PairEvidence {
  int k = 0;
  int l = 0;
  PairMethod method = PairMethod::kPairwisePsd;
  bool holds = false;
  std::optional<double> tau;
  double margin = 0.0;
  std::optional<SdpStatus> sdp_status;
};

// Where a working block came from.
struct BlockOrigin {
  enum class Kind { kInequality, kEqualityPlus, kEqualityMinus };
  Kind kind = Kind::kInequality;
  int index = 0;  // index into ineq_blocks or eq_blocks
};

struct MembershipResult {
  bool member = false;
  double residual = 0.0;   // max(0, -min{<B,X> : X in J, tr X = 1})
  double slice_min = 0.0;  // that minimum; +inf when the slice is empty
  std::string route;       // "psd", "negated-inequality", "sdp"
};

struct EqualityHandling {
  int index = 0;  // into eq_blocks
  MembershipResult membership;
  bool as_face = false;  // true: dual-cone member, kept out of the pair tests
};

struct Certificate {
  Verdict verdict = Verdict::kInconclusive;
  int num_constraints = 0;  // m = |eq| + |ineq|; the face is not counted
  std::vector<SymMatrix> blocks;        // working inequality blocks
  std::vector<BlockOrigin> origins;     // one per working block
  std::vector<PairEvidence> pairs;      // every test that was run, in order
  std::vector<EqualityHandling> equalities;
  std::optional<MembershipResult> face;
  std::vector<bool> redundant;          // per working block
  std::vector<int> redundant_witness;   // k certifying the flag, or -1
  std::optional<std::pair<int, int>> failing_pair;  // first direct failure
  std::vector<std::string> notes;

  bool exact() const {
    return verdict == Verdict::kExactByPairwisePSD ||
           verdict == Verdict::kExactByTauLineSearch ||
           verdict == Verdict::kExactByDirectSubsetTest ||
           verdict == Verdict::kTriviallyExact;
  }
  // Human-readable name of a working block, e.g. "B3" or "+E1".
  std::string block_name(int i) const;
};

struct TauResult {
  bool found = false;
  double tau = 0.0;
  double margin = 0.0;
  bool redundant = false;  // some tau <= 0 works, so <B_l,X> <= 0 is implied
};

struct SubsetResult {
  bool holds = false;
  double witness_value = 0.0;
  SdpStatus status = SdpStatus::kOptimal;
};

struct SlaterResult {
  bool holds = false;
  double t = 0.0;
  double margin = 0.0;
};

Certificate check_pairwise_sum(std::span<const SymMatrix> blocks, double tol);

// Maximizes f(tau) = min_eig(-B_l - tau B_k). Bracket doublings are capped at
// max_doublings; an asymptotic supremum that is never attained is reported
// as not found.
TauResult check_tau_linesearch(const SymMatrix& bk, const SymMatrix& bl, double tol,
                               int max_doublings = 20);

SubsetResult check_subset_direct(const SymMatrix& bk, const SymMatrix& bl, double tol,
                                 const SolverOptions& options = {});

MembershipResult check_dual_membership(const SymMatrix& b, const ConicQcqp& p,
                                       double tol, const SolverOptions& options = {});

SlaterResult check_dual_slater(const ConicQcqp& p, double tol);

struct CertifyOptions {
  double tol = 1e-9;
  // Stop after the pairwise tier; a pairwise failure is reported as
  // ConditionFails without the weaker tiers.
  bool pairwise_only = false;
  SolverOptions solver;
};

Certificate certify_exactness(const ConicQcqp& p, const CertifyOptions& options = {});

nlohmann::json certificate_to_json(const Certificate& c);

}  // namespace exactsdp

#endif  // EXACTSDP_CERTIFICATES_H_
