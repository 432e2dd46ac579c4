#include "exactsdp/certificates.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exactsdp/error.h"
#include "exactsdp/scalar_search.h"

namespace exactsdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* where) {
  if (a.n() != b.n()) {
    throw DimensionError(std::string(where) + ": blocks of different dimension");
  }
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

// Options for the auxiliary trace-normalized SDPs; tighter than the defaults
// since their optimal values are compared against small thresholds.
SolverOptions tightened(SolverOptions o) {
  o.feasibility_tol = std::min(o.feasibility_tol, 1e-10);
  o.gap_tol = std::min(o.gap_tol, 1e-9);
  return o;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kExactByPairwisePSD: return "ExactByPairwisePSD";
    case Verdict::kExactByTauLineSearch: return "ExactByTauLineSearch";
    case Verdict::kExactByDirectSubsetTest: return "ExactByDirectSubsetTest";
    case Verdict::kTriviallyExact: return "TriviallyExact";
    case Verdict::kInconclusive: return "Inconclusive";
    case Verdict::kConditionFails: return "ConditionFails";
  }
  return "Unknown";
}

std::string to_string(PairMethod m) {
  switch (m) {
    case PairMethod::kPairwisePsd: return "pairwise_psd";
    case PairMethod::kTauLineSearch: return "tau_linesearch";
    case PairMethod::kSubsetDirect: return "subset_direct";
  }
  return "unknown";
}

std::string Certificate::block_name(int i) const {
  if (i < 0 || static_cast<std::size_t>(i) >= origins.size()) {
    return "B" + std::to_string(i + 1);
  }
  const auto& o = origins[static_cast<std::size_t>(i)];
  switch (o.kind) {
    case BlockOrigin::Kind::kInequality: return "B" + std::to_string(o.index + 1);
    case BlockOrigin::Kind::kEqualityPlus: return "+E" + std::to_string(o.index + 1);
    case BlockOrigin::Kind::kEqualityMinus: return "-E" + std::to_string(o.index + 1);
  }
  return "?";
}

Certificate check_pairwise_sum(std::span<const SymMatrix> blocks, double tol) {
  if (tol < 0) throw InvalidArgument("check_pairwise_sum: negative tolerance");
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    require_same_dim(blocks[0], blocks[i], "check_pairwise_sum");
  }
  Certificate c;
  c.num_constraints = static_cast<int>(blocks.size());
  c.blocks.assign(blocks.begin(), blocks.end());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    c.origins.push_back({BlockOrigin::Kind::kInequality, static_cast<int>(i)});
  }
  c.redundant.assign(blocks.size(), false);
  c.redundant_witness.assign(blocks.size(), -1);
  bool all = true;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (std::size_t l = k + 1; l < blocks.size(); ++l) {
      PairEvidence e;
      e.k = static_cast<int>(k);
      e.l = static_cast<int>(l);
      e.method = PairMethod::kPairwisePsd;
      e.margin = min_eig(-(blocks[k] + blocks[l]));
      e.holds = e.margin >= -tol;
      if (!e.holds && all) {
        all = false;
        c.failing_pair = std::make_pair(e.k, e.l);
      }
      c.pairs.push_back(e);
    }
  }
  c.verdict = all ? Verdict::kExactByPairwisePSD : Verdict::kConditionFails;
  return c;
}

TauResult check_tau_linesearch(const SymMatrix& bk, const SymMatrix& bl, double tol,
                               int max_doublings) {
  require_same_dim(bk, bl, "check_tau_linesearch");
  if (tol < 0) throw InvalidArgument("check_tau_linesearch: negative tolerance");
  const SymMatrix neg_l = -bl;
  auto f = [&](double tau) {
    SymMatrix m = neg_l;
    m -= bk * tau;
    return min_eig(m);
  };

  TauResult r;
  const double f0 = f(0.0);
  if (f0 >= -tol) {
    r.found = true;
    r.tau = 0.0;
    r.margin = f0;
    r.redundant = true;
    return r;
  }
  ConcaveSearchOptions opts;
  opts.center = 0.0;
  opts.radius = 1.0 + bl.frobenius_norm() / std::max(bk.frobenius_norm(), 1e-12);
  opts.max_doublings = max_doublings;
  opts.stop_at = 0.0;
  const ConcaveSearchResult best = maximize_concave(f, opts);
  if (best.value >= 0.0) {
    // {f >= 0} is an interval excluding 0; bisect for its endpoint nearest 0.
    double out = 0.0;
    double in = best.arg;
    for (int it = 0; it < 200 && std::abs(in - out) > 1e-14 * (1.0 + std::abs(in)); ++it) {
      const double mid = 0.5 * (out + in);
      if (f(mid) >= 0.0) {
        in = mid;
      } else {
        out = mid;
      }
    }
    r.found = true;
    r.tau = in;
    r.margin = f(in);
  } else {
    r.found = best.value >= -tol;
    r.tau = best.arg;
    r.margin = best.value;
  }
  r.redundant = r.found && r.tau <= 0.0;
  return r;
}

SubsetResult check_subset_direct(const SymMatrix& bk, const SymMatrix& bl, double tol,
                                 const SolverOptions& options) {
  require_same_dim(bk, bl, "check_subset_direct");
  if (tol < 0) throw InvalidArgument("check_subset_direct: negative tolerance");
  SubsetResult r;
  const std::vector<SymMatrix> eq{bk};
  const SdpSolution sol = solve_feasibility(eq, {}, bl, true, tightened(options));
  r.status = sol.status;
  if (sol.status == SdpStatus::kPrimalInfeasible) {
    // tr X = 1 and <B_k,X> = 0 admit no PSD point: J_0(B_k) = {0}.
    r.holds = true;
    r.witness_value = -kInf;
    return r;
  }
  if (!sol.optimal()) {
    throw ConvergenceError("check_subset_direct: auxiliary SDP ended with status " +
                           to_string(sol.status));
  }
  r.witness_value = sol.primal_objective;
  r.holds = r.witness_value <= tol;
  return r;
}

MembershipResult check_dual_membership(const SymMatrix& b, const ConicQcqp& p,
                                       double tol, const SolverOptions& options) {
  if (b.n() != p.n()) throw DimensionError("check_dual_membership: dimension mismatch");
  if (tol < 0) throw InvalidArgument("check_dual_membership: negative tolerance");
  MembershipResult r;
  if (is_psd(b, tol)) {
    r.member = true;
    r.route = "psd";
    r.slice_min = std::max(0.0, min_eig(b));
    return r;
  }
  for (const auto& bl : p.ineq_blocks) {
    if ((b + bl).frobenius_norm() <= tol * (1.0 + b.frobenius_norm())) {
      r.member = true;
      r.route = "negated-inequality";
      return r;
    }
  }
  // B ∈ J* iff <B,X> >= 0 on the trace-one slice of J.
  std::vector<SymMatrix> eq = p.eq_blocks;
  if (auto face = p.face_block(); face) eq.push_back(*face);
  r.route = "sdp";
  const SdpSolution sol = solve_feasibility(eq, p.ineq_blocks, b, false, tightened(options));
  if (sol.status == SdpStatus::kPrimalInfeasible) {
    r.member = true;
    r.slice_min = kInf;
    return r;
  }
  if (!sol.optimal()) {
    throw ConvergenceError("check_dual_membership: auxiliary SDP ended with status " +
                           to_string(sol.status));
  }
  r.slice_min = sol.primal_objective;
  r.residual = std::max(0.0, -r.slice_min);
  r.member = r.residual <= tol;
  return r;
}

SlaterResult check_dual_slater(const ConicQcqp& p, double tol) {
  p.validate();
  auto g = [&](double t) {
    SymMatrix m = p.Q;
    m -= p.H * t;
    return min_eig(m);
  };
  SlaterResult r;
  const double g0 = g(0.0);
  if (g0 > tol) {
    r.holds = true;
    r.margin = g0;
    return r;
  }
  ConcaveSearchOptions opts;
  opts.radius = 1.0 + p.Q.frobenius_norm() / p.H.frobenius_norm();
  opts.stop_at = std::max(1.0, 2.0 * tol);
  const ConcaveSearchResult best = maximize_concave(g, opts);
  r.t = best.arg;
  r.margin = best.value;
  r.holds = best.value > tol;
  return r;
}

Certificate certify_exactness(const ConicQcqp& p, const CertifyOptions& options) {
  p.validate();
  const double tol = options.tol;
  if (tol < 0) throw InvalidArgument("certify_exactness: negative tolerance");
  Certificate c;
  c.num_constraints = static_cast<int>(p.num_constraints());

  ConicQcqp cone = p;  // the cone the equalities are tested against
  cone.eq_blocks.clear();
  if (auto face = p.face_block(); face) {
    c.face = check_dual_membership(*face, cone, tol, options.solver);
    if (!c.face->member) {
      c.notes.push_back("face block unexpectedly outside the dual cone");
    }
  }

  for (std::size_t i = 0; i < p.ineq_blocks.size(); ++i) {
    c.blocks.push_back(p.ineq_blocks[i]);
    c.origins.push_back({BlockOrigin::Kind::kInequality, static_cast<int>(i)});
  }
  for (std::size_t j = 0; j < p.eq_blocks.size(); ++j) {
    const SymMatrix& e = p.eq_blocks[j];
    EqualityHandling h;
    h.index = static_cast<int>(j);
    h.membership = check_dual_membership(e, cone, tol, options.solver);
    if (!h.membership.member) {
      MembershipResult neg = check_dual_membership(-e, cone, tol, options.solver);
      if (neg.member) {
        neg.route = "negated:" + neg.route;
        h.membership = neg;
      }
    }
    h.as_face = h.membership.member;
    if (h.as_face) {
      cone.eq_blocks.push_back(e);
    } else {
      c.blocks.push_back(e);
      c.origins.push_back({BlockOrigin::Kind::kEqualityPlus, static_cast<int>(j)});
      c.blocks.push_back(-e);
      c.origins.push_back({BlockOrigin::Kind::kEqualityMinus, static_cast<int>(j)});
    }
    c.equalities.push_back(h);
  }
  const std::size_t nb = c.blocks.size();
  c.redundant.assign(nb, false);
  c.redundant_witness.assign(nb, -1);

  if (c.num_constraints <= 1) {
    c.verdict = Verdict::kTriviallyExact;
    return c;
  }

  // Tier 1: -(B_k + B_l) ⪰ 0 for all k < l.
  {
    const Certificate tier = check_pairwise_sum(c.blocks, tol);
    c.pairs = tier.pairs;
    c.failing_pair = tier.failing_pair;
    c.verdict = tier.verdict;
  }
  const bool tier1 = c.verdict == Verdict::kExactByPairwisePSD;
  if (!tier1 && options.pairwise_only) {
    c.notes.push_back("pairwise-sum condition failed; weaker tiers skipped");
    return c;
  }

  // Tier 2 also supplies the redundancy flags, so it runs whenever m >= 2.
  std::vector<std::pair<int, int>> tau_failed;
  for (std::size_t k = 0; k < nb; ++k) {
    for (std::size_t l = 0; l < nb; ++l) {
      if (k == l) continue;
      const TauResult t = check_tau_linesearch(c.blocks[k], c.blocks[l], tol);
      PairEvidence e;
      e.k = static_cast<int>(k);
      e.l = static_cast<int>(l);
      e.method = PairMethod::kTauLineSearch;
      e.holds = t.found;
      e.tau = t.tau;
      e.margin = t.margin;
      c.pairs.push_back(e);
      if (!t.found) tau_failed.emplace_back(e.k, e.l);
      // Of two mutually redundant blocks only the first is flagged.
      if (t.redundant && !c.redundant[l] &&
          !(c.redundant[k] && c.redundant_witness[k] == static_cast<int>(l))) {
        c.redundant[l] = true;
        c.redundant_witness[l] = static_cast<int>(k);
      }
    }
  }
  if (tier1) return c;
  c.failing_pair.reset();
  if (tau_failed.empty()) {
    c.verdict = Verdict::kExactByTauLineSearch;
    return c;
  }

  // Tier 3 on the pairs tier 2 could not settle; (4.3) implies (4.2) elsewhere.
  bool inconclusive = false;
  c.verdict = Verdict::kExactByDirectSubsetTest;
  for (const auto& [k, l] : tau_failed) {
    PairEvidence e;
    e.k = k;
    e.l = l;
    e.method = PairMethod::kSubsetDirect;
    try {
      const SubsetResult s = check_subset_direct(c.blocks[static_cast<std::size_t>(k)],
                                                 c.blocks[static_cast<std::size_t>(l)],
                                                 std::max(tol, 1e-7), options.solver);
      e.holds = s.holds;
      e.margin = s.witness_value;
      e.sdp_status = s.status;
    } catch (const ConvergenceError& err) {
      e.holds = false;
      e.margin = std::numeric_limits<double>::quiet_NaN();
      inconclusive = true;
      c.notes.push_back(std::string("subset test ") + c.block_name(k) + "->" +
                        c.block_name(l) + ": " + err.what());
    }
    c.pairs.push_back(e);
    if (!e.holds && !std::isnan(e.margin) && !c.failing_pair) {
      c.failing_pair = std::make_pair(k, l);
    }
  }
  if (c.failing_pair) {
    c.verdict = Verdict::kConditionFails;
  } else if (inconclusive) {
    c.verdict = Verdict::kInconclusive;
  }
  return c;
}

nlohmann::json certificate_to_json(const Certificate& c) {
  nlohmann::json j;
  j["verdict"] = to_string(c.verdict);
  j["num_constraints"] = c.num_constraints;
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t i = 0; i < c.blocks.size(); ++i) {
    blocks.push_back(c.block_name(static_cast<int>(i)));
  }
  j["blocks"] = blocks;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& e : c.pairs) {
    nlohmann::json row;
    row["k"] = e.k;
    row["l"] = e.l;
    row["method"] = to_string(e.method);
    row["holds"] = e.holds;
    row["tau"] = e.tau ? finite_or_null(*e.tau) : nlohmann::json(nullptr);
    row["margin"] = finite_or_null(e.margin);
    pairs.push_back(row);
  }
  j["pairs"] = pairs;
  nlohmann::json eqs = nlohmann::json::array();
  for (const auto& h : c.equalities) {
    eqs.push_back({{"index", h.index},
                   {"as_face", h.as_face},
                   {"route", h.membership.route},
                   {"residual", finite_or_null(h.membership.residual)}});
  }
  j["equalities"] = eqs;
  if (c.face) {
    j["face"] = {{"member", c.face->member}, {"route", c.face->route}};
  }
  nlohmann::json red = nlohmann::json::array();
  for (std::size_t i = 0; i < c.redundant.size(); ++i) {
    if (!c.redundant[i]) continue;
    red.push_back({{"block", c.block_name(static_cast<int>(i))},
                   {"implied_by", c.block_name(c.redundant_witness[i])}});
  }
  j["redundant"] = red;
  if (c.failing_pair) {
    j["failing_pair"] = {c.block_name(c.failing_pair->first),
                         c.block_name(c.failing_pair->second)};
  } else {
    j["failing_pair"] = nullptr;
  }
  j["notes"] = c.notes;
  return j;
}

}  // namespace exactsdp
