// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "exactsdp/certificates.h"
#include "exactsdp/instances.h"
#include "exactsdp/oracle.h"
#include "exactsdp/pipeline.h"
#include "exactsdp/recovery.h"
#include "exactsdp/sdp.h"

using namespace exactsdp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

void fail(Outcome& o, const std::string& why) {
  if (o.pass) o.detail = why;
  o.pass = false;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

InstanceSpec ex44_spec(double gamma) {
  InstanceSpec s;
  s.family = Family::kEx44;
  s.ell = 1;
  s.gamma = gamma;
  s.canonical = true;
  return s;
}

bool pairwise_holds(double gamma) {
  CertifyOptions o;
  o.pairwise_only = true;
  return certify_exactness(build(ex44_spec(gamma)), o).verdict == Verdict::kExactByPairwisePSD;
}

Outcome criterion1() {
  Outcome o;
  const auto t = Clock::now();
  for (double g : {0.5, 0.8}) {
    if (!pairwise_holds(g)) fail(o, fmt("gamma %.2f not ExactByPairwisePSD", g));
  }
  for (double g : {0.81, 1.0}) {
    CertifyOptions co;
    co.pairwise_only = true;
    const Certificate c = certify_exactness(build(ex44_spec(g)), co);
    if (c.verdict != Verdict::kConditionFails) fail(o, fmt("gamma %.2f not ConditionFails", g));
    else if (!c.failing_pair || c.failing_pair->first != 0 || c.failing_pair->second != 2)
      fail(o, fmt("gamma %.2f failing pair is not (B1,B3)", g));
  }
  double lo = 0.5, hi = 1.0;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    (pairwise_holds(mid) ? lo : hi) = mid;
  }
  const double flip = 0.5 * (lo + hi);
  if (std::abs(flip - 0.8) > 1e-6) fail(o, fmt("flip located at %.9f", flip));
  const double secs = seconds_since(t);
  if (secs >= 1.0) fail(o, fmt("runtime %.2fs", secs));
  if (o.pass) o.detail = fmt("flip at %.9f", flip) + fmt(", %.3fs", secs);
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto t = Clock::now();
  const SymMatrix b1{{1, 1}, {1, 0}};
  const SymMatrix b2{{-1, 0}, {0, 0}};
  const TauResult tau = check_tau_linesearch(b2, b1, 1e-9);
  if (tau.found) fail(o, "tau line search reported found");
  const SubsetResult s21 = check_subset_direct(b2, b1, 1e-7);
  const SubsetResult s12 = check_subset_direct(b1, b2, 1e-7);
  if (!s21.holds || s21.witness_value > 1e-7) fail(o, fmt("B2->B1 witness %.3e", s21.witness_value));
  if (!s12.holds || s12.witness_value > 1e-7) fail(o, fmt("B1->B2 witness %.3e", s12.witness_value));
  const double secs = seconds_since(t);
  if (secs >= 1.0) fail(o, fmt("runtime %.2fs", secs));
  if (o.pass) {
    o.detail = fmt("tau margin %.2e", tau.margin) + fmt(", witnesses %.2e", s21.witness_value) +
               fmt(" and %.2e", s12.witness_value) + fmt(", %.3fs", secs);
  }
  return o;
}

Outcome criterion3() {
  Outcome o;
  const auto t = Clock::now();
  int verified = 0;
  int total = 0;
  RunOptions ro;
  ro.oracle = true;
  ro.oracle_budget = 200000;
  for (int n = 3; n <= 6; ++n) {
    for (int i = 0; i < 25; ++i) {
      InstanceSpec s;
      s.family = Family::kEx45;
      s.n = n;
      s.seed = 1000 + static_cast<std::uint64_t>(100 * n + i);
      const ConicQcqp p = build(s);
      ro.oracle_seed = s.seed;
      const RunReport r = run(p, ro);
      ++total;
      if (r.verdict != OverallVerdict::kExactVerified) continue;
      ++verified;
      const double zeta = r.sdp->primal_objective;
      const Vector& x = r.recovery->x;
      if (replay_violation(p, x) > 1e-6) fail(o, "residual above 1e-6 on a verified instance");
      if (std::abs(p.Q.quad(x) - zeta) > 1e-5 * (1 + std::abs(zeta)))
        fail(o, "objective mismatch on a verified instance");
      if (std::abs(r.oracle->best_value - zeta) > 1e-3 * (1 + std::abs(zeta)))
        fail(o, "oracle disagreement on a verified instance");
    }
  }
  if (verified < 99) fail(o, std::to_string(verified) + "/100 ExactVerified");
  const double secs = seconds_since(t);
  if (secs >= 300.0) fail(o, fmt("runtime %.1fs", secs));
  if (o.pass) o.detail = std::to_string(verified) + "/" + std::to_string(total) + fmt(" ExactVerified, %.1fs", secs);
  return o;
}

Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> dim(2, 10);
  int equality_cases = 0;
  double worst_rec = 0.0, worst_q = -INFINITY;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = dim(rng);
    const int rank = std::uniform_int_distribution<int>(1, std::min(8, n))(rng);
    Matrix v(n, rank);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < rank; ++j) v(i, j) = normal(rng);
    const SymMatrix x = SymMatrix::Symmetrized(v * v.transpose());
    Matrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = normal(rng);
    SymMatrix b(g);
    const bool equality = trial % 3 == 0;
    // Shift by a multiple of I so that <B,X> = 0 (equality) or < 0.
    const double shift = (inner(b, x) + (equality ? 0.0 : 0.5 * x.dense().trace())) / x.dense().trace();
    b -= SymMatrix::Identity(static_cast<std::size_t>(n)) * shift;
    const SturmDecomposition d = sturm_decompose(x, b, 1e-8);
    Matrix recon = Matrix::Zero(n, n);
    for (const auto& xi : d.vectors) recon += xi * xi.transpose();
    const double rec = (x.dense() - recon).norm() / (1 + x.frobenius_norm());
    worst_rec = std::max(worst_rec, rec);
    if (rec > 1e-8) fail(o, fmt("reconstruction error %.2e", rec));
    if (d.rotations > d.rank - 1) fail(o, "rotation count above rank - 1");
    for (const auto& xi : d.vectors) {
      const double q = b.quad(xi);
      worst_q = std::max(worst_q, equality ? std::abs(q) : q);
      if (q > 1e-8) fail(o, fmt("x'Bx = %.2e", q));
      if (equality && std::abs(q) > 1e-8) fail(o, fmt("equality |x'Bx| = %.2e", std::abs(q)));
    }
    equality_cases += equality;
  }
  if (o.pass) {
    o.detail = "500 pairs (" + std::to_string(equality_cases) + " equality)" +
               fmt(", worst reconstruction %.1e", worst_rec) + fmt(", worst form %.1e", worst_q);
  }
  return o;
}

std::vector<ConicQcqp> duality_corpus() {
  std::vector<ConicQcqp> out;
  for (int i = 0; i < 40; ++i) {
    InstanceSpec s;
    s.family = Family::kEx45;
    s.n = 3 + i % 4;
    s.seed = 5000 + static_cast<std::uint64_t>(i);
    out.push_back(build(s));
  }
  for (int i = 0; i < 10; ++i) {
    InstanceSpec s;
    s.seed = 6000 + static_cast<std::uint64_t>(i);
    s.canonical = false;
    s.family = Family::kEx41;
    s.ell = 1 + i % 3;
    out.push_back(build(s));
    s.family = Family::kEx42;
    s.n = 2 + i % 3;
    out.push_back(build(s));
    s.family = Family::kEx46;
    s.n = 4;
    out.push_back(build(s));
    s.family = Family::kRandomCertified;
    out.push_back(build(s));
    s.family = Family::kRandomUncertified;
    out.push_back(build(s));
    s.family = Family::kEx43;
    out.push_back(build(s));
  }
  return out;
}

Outcome criterion5() {
  Outcome o;
  int checked = 0;
  double worst_gap = 0.0, worst_wd = -INFINITY;
  for (const ConicQcqp& p : duality_corpus()) {
    if (!check_dual_slater(p, 1e-9).holds) continue;
    ++checked;
    const SdpSolution s = solve(p);
    if (!s.optimal()) {
      fail(o, "status " + to_string(s.status) + " on a dual-Slater instance");
      continue;
    }
    const double scale = 1 + std::abs(s.primal_objective);
    worst_gap = std::max(worst_gap, s.gap / scale);
    if (s.gap > 1e-6 * scale) fail(o, fmt("gap %.2e", s.gap));
    if (std::abs(inner(s.X, s.Y)) > 1e-6 * scale) fail(o, fmt("<X,Y> = %.2e", inner(s.X, s.Y)));
    for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
      const double c = s.y_ineq(static_cast<Eigen::Index>(k)) * inner(p.ineq_blocks[k], s.X);
      if (std::abs(c) > 1e-6) fail(o, fmt("y_k <B_k,X> = %.2e", c));
    }
    for (const auto& it : s.log) {
      const double excess = it.dual_objective - it.primal_objective;
      worst_wd = std::max(worst_wd, excess / (1 + std::abs(it.primal_objective)));
      if (excess > 1e-9 * (1 + std::abs(it.primal_objective))) {
        fail(o, "dual above primal at iteration " + std::to_string(it.iteration) +
                    fmt(" by %.3e", excess) + " on " + p.meta.value("instance", nlohmann::json{}).dump());
      }
    }
  }
  if (checked == 0) fail(o, "no dual-Slater instance in the corpus");
  if (o.pass) {
    o.detail = std::to_string(checked) + " dual-Slater instances" + fmt(", worst rel gap %.1e", worst_gap) +
               fmt(", worst dual-primal excess %.1e", worst_wd);
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  double worst_oracle = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int branches = 2 + i % 3;
    const int n = 2 + i % 3;
    const std::vector<ConicQcqp> br = make_union(7000 + static_cast<std::uint64_t>(i), branches, n);
    const UnionResult u = solve_union(br);
    const OracleResult orc = oracle_union(br, 200000, 7000 + static_cast<std::uint64_t>(i));
    const double v = u.min_sdp_value;
    const double scale = 1 + std::abs(v);
    if (!orc.found) {
      fail(o, "oracle found no point for union " + std::to_string(i));
      continue;
    }
    worst_oracle = std::max(worst_oracle, std::abs(orc.best_value - v) / scale);
    if (std::abs(orc.best_value - v) > 1e-3 * scale) fail(o, fmt("oracle gap %.2e", orc.best_value - v));
    if (u.branch < 0 || std::abs(u.value - v) > 1e-5 * scale)
      fail(o, "minimum verified branch value differs from the minimum SDP value on union " +
                  std::to_string(i));
  }
  if (o.pass) o.detail = fmt("20 unions, worst oracle rel gap %.1e", worst_oracle);
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  RunOptions ro;
  ro.oracle = true;
  int verified = 0;
  double worst_id = 0.0;
  for (int i = 0; i < 50; ++i) {
    InstanceSpec s;
    s.family = Family::kEx43;
    s.ell = 1 + i % 4;
    s.seed = 8000 + static_cast<std::uint64_t>(i);
    const ConicQcqp p = build(s);
    const Certificate c = certify_exactness(p);
    if (c.verdict != Verdict::kExactByPairwisePSD) fail(o, "instance " + std::to_string(i) + " not ExactByPairwisePSD");
    const int n = static_cast<int>(p.n());
    Matrix v(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) v(a, b) = normal(rng);
    const SymMatrix x = SymMatrix::Symmetrized(v * v.transpose());
    const double id = std::abs(inner(p.ineq_blocks[0] + p.ineq_blocks[1], x) + 2 * x(n - 1, n - 1));
    worst_id = std::max(worst_id, id);
    if (id > 1e-12) fail(o, fmt("identity residual %.2e", id));
    ro.oracle_seed = s.seed;
    const RunReport r = run(p, ro);
    if (r.verdict == OverallVerdict::kExactVerified) {
      ++verified;
    } else {
      fail(o, "instance " + std::to_string(i) + " verdict " + to_string(r.verdict) +
                  (r.reasons.empty() ? "" : " (" + r.reasons.back() + ")"));
    }
  }
  if (o.pass) o.detail = std::to_string(verified) + "/50 ExactVerified" + fmt(", identity residual %.1e", worst_id);
  return o;
}

Outcome criterion8() {
  Outcome o;
  int infeasible = 0, feasible = 0;
  for (int i = 0; i < 20; ++i) {
    const ConicQcqp bad = make_infeasible(9000 + static_cast<std::uint64_t>(i), 2 + i % 4);
    const RunReport r = run(bad);
    if (r.verdict == OverallVerdict::kInfeasible) ++infeasible;
    else fail(o, "constructed infeasible instance " + std::to_string(i) + " gave " + to_string(r.verdict));
    const ConicQcqp good = make_feasible_face(9500 + static_cast<std::uint64_t>(i), 2 + i % 4);
    const RunReport g = run(good);
    if (g.verdict == OverallVerdict::kInfeasible) {
      fail(o, "false Infeasible on feasible instance " + std::to_string(i));
    } else if (!g.sdp || !g.sdp->optimal() || !g.recovery || replay_violation(good, g.recovery->x) > 1e-6) {
      fail(o, "feasible instance " + std::to_string(i) + " without a feasible recovered point");
    } else {
      ++feasible;
    }
  }
  if (o.pass) o.detail = std::to_string(infeasible) + "/20 Infeasible, " + std::to_string(feasible) + "/20 feasible points";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"ex44 threshold at gamma = 4/5", criterion1},
      {"tau line search misses the closure counterexample", criterion2},
      {"ex45 exactness end-to-end", criterion3},
      {"rank-one decomposition property suite", criterion4},
      {"strong duality under dual Slater", criterion5},
      {"union decomposition", criterion6},
      {"two-sided trust region family", criterion7},
      {"feasibility preservation", criterion8},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %zu: %s -- %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
