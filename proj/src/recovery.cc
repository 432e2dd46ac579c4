#include "exactsdp/recovery.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace exactsdp {
namespace {

// Columns sqrt(λ_i)·v_i for the eigenvalues above rank_tol·λ_max.
Matrix psd_factor(const SymMatrix& x, double rank_tol) {
  const SpectralDecomposition sd = eig(x);
  const Eigen::Index n = sd.eigenvalues.size();
  if (n == 0) return Matrix(0, 0);
  const double lmax = sd.eigenvalues(n - 1);
  if (lmax <= 0) return Matrix(n, 0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (sd.eigenvalues(i) > rank_tol * lmax) keep.push_back(i);
  }
  Matrix v(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Eigen::Index i = keep[c];
    v.col(static_cast<Eigen::Index>(c)) =
        std::sqrt(sd.eigenvalues(i)) * sd.eigenvectors.col(i);
  }
  return v;
}

// Root of q_j α² + 2cα + q_i = 0 (q_i > 0 > q_j) with the smaller |α|.
double rotation_root(double qi, double qj, double c) {
  const double disc = std::sqrt(std::max(0.0, c * c - qi * qj));
  const double t = -(c + std::copysign(disc, c));
  const double a1 = t / qj;
  const double a2 = qi / t;
  if (std::abs(std::abs(a1) - std::abs(a2)) <= 1e-15 * std::abs(a1)) {
    return std::max(a1, a2);
  }
  return std::abs(a1) < std::abs(a2) ? a1 : a2;
}

}  // namespace

SturmDecomposition sturm_decompose(const SymMatrix& x, const SymMatrix& b, double tol,
                                   double rank_tol) {
  if (x.n() != b.n()) throw DimensionError("sturm_decompose: dimension mismatch");
  if (tol < 0) throw InvalidArgument("sturm_decompose: negative tolerance");
  const double scale = 1.0 + x.frobenius_norm();
  if (x.n() > 0 && min_eig(x) < -tol * scale) {
    throw InvalidArgument("sturm_decompose: X is not positive semidefinite");
  }
  const double bx = inner(b, x);
  if (bx > tol) throw InvalidArgument("sturm_decompose: <B,X> exceeds the tolerance");

  SturmDecomposition out;
  out.equality = std::abs(bx) <= tol;
  const Matrix v = psd_factor(x, rank_tol);
  out.rank = static_cast<int>(v.cols());
  std::vector<Vector> p;
  for (Eigen::Index c = 0; c < v.cols(); ++c) p.emplace_back(v.col(c));
  const Matrix& bd = b.dense();
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = p[i].dot(bd * p[i]);

  // done[i]: p_i was produced with a zero quadratic form and is left alone.
  std::vector<bool> done(p.size(), false);
  const double bnorm = b.frobenius_norm();
  auto negligible = [&](std::size_t i) {
    return std::abs(q[i]) <= 1e-14 * bnorm * p[i].squaredNorm();
  };
  for (;;) {
    int pos = -1;
    int neg = -1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (done[i] || negligible(i)) continue;
      if (q[i] > 0 && (pos < 0 || q[i] > q[static_cast<std::size_t>(pos)])) {
        pos = static_cast<int>(i);
      }
      if (q[i] < 0 && (neg < 0 || q[i] < q[static_cast<std::size_t>(neg)])) {
        neg = static_cast<int>(i);
      }
    }
    // Inequality variant: only positive terms need fixing.
    if (pos < 0 || neg < 0) break;
    const auto i = static_cast<std::size_t>(pos);
    const auto j = static_cast<std::size_t>(neg);
    const double c = p[i].dot(bd * p[j]);
    const double alpha = rotation_root(q[i], q[j], c);
    const double s = std::sqrt(1.0 + alpha * alpha);
    Vector u = (p[i] + alpha * p[j]) / s;
    Vector w = (-alpha * p[i] + p[j]) / s;
    p[i] = std::move(u);
    p[j] = std::move(w);
    q[i] = p[i].dot(bd * p[i]);
    q[j] = p[j].dot(bd * p[j]);
    done[i] = true;
    ++out.rotations;
    if (!out.equality) {
      bool any_positive = false;
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (!done[k] && q[k] > 0 && !negligible(k)) any_positive = true;
      }
      if (!any_positive) break;
    }
  }
  out.vectors = std::move(p);
  return out;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kAlreadyRankOne: return "AlreadyRankOne";
    case Provenance::kCaseA: return "CaseA";
    case Provenance::kCaseB: return "CaseB";
  }
  return "Unknown";
}

std::string RankOneSolution::provenance_label() const {
  if (provenance != Provenance::kCaseA) return to_string(provenance);
  return "CaseA(" + std::string(active_is_equality ? "E" : "B") +
         std::to_string(active_index + 1) + ")";
}

double Residuals::max_violation() const {
  double v = std::abs(normalizer);
  for (Eigen::Index i = 0; i < eq.size(); ++i) v = std::max(v, std::abs(eq(i)));
  for (Eigen::Index i = 0; i < ineq.size(); ++i) v = std::max(v, ineq(i));
  return std::max(v, face);
}

Residuals evaluate(const ConicQcqp& p, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != p.n()) {
    throw DimensionError("evaluate: vector length does not match the problem");
  }
  Residuals r;
  r.objective = p.Q.quad(x);
  r.normalizer = p.H.quad(x) - 1.0;
  r.eq.resize(static_cast<Eigen::Index>(p.eq_blocks.size()));
  for (std::size_t j = 0; j < p.eq_blocks.size(); ++j) {
    r.eq(static_cast<Eigen::Index>(j)) = p.eq_blocks[j].quad(x);
  }
  r.ineq.resize(static_cast<Eigen::Index>(p.ineq_blocks.size()));
  for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
    r.ineq(static_cast<Eigen::Index>(k)) = p.ineq_blocks[k].quad(x);
  }
  if (p.face_rows) r.face = (*p.face_rows * x).squaredNorm();
  return r;
}

bool verify_candidate(const ConicQcqp&, const Residuals& r, double sdp_value,
                      const RecoveryOptions& options) {
  if (!std::isfinite(r.objective)) return false;
  if (r.max_violation() > options.tol) return false;
  return std::abs(r.objective - sdp_value) <= options.objective_tol * (1.0 + std::abs(sdp_value));
}

namespace {

struct Recoverer {
  const ConicQcqp& p;
  double zeta;
  const RecoveryOptions& opt;
  std::vector<Residuals> rejected;
  int tried = 0;

  // Scales a candidate onto xᵀHx = 1 and verifies it.
  std::optional<RankOneSolution> accept(const Vector& x) {
    const double h = p.H.quad(x);
    if (!(h > opt.tol * std::max(1.0, x.squaredNorm()))) return std::nullopt;
    ++tried;
    RankOneSolution s;
    s.x = x / std::sqrt(h);
    s.residuals = evaluate(p, s.x);
    s.objective = s.residuals.objective;
    s.sdp_value = zeta;
    s.verified = verify_candidate(p, s.residuals, zeta, opt);
    if (!s.verified) {
      rejected.push_back(s.residuals);
      return std::nullopt;
    }
    return s;
  }

  std::optional<RankOneSolution> case_a(const SymMatrix& x, const SymMatrix& b,
                                        bool is_eq, int index) {
    SturmDecomposition d;
    try {
      d = sturm_decompose(x, b, opt.tol, opt.tol);
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < d.vectors.size(); ++i) {
      order.emplace_back(p.H.quad(d.vectors[i]), i);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [h, i] : order) {
      if (auto s = accept(d.vectors[i])) {
        s->provenance = Provenance::kCaseA;
        s->active_is_equality = is_eq;
        s->active_index = index;
        return s;
      }
    }
    return std::nullopt;
  }

  // Case (a) with every constraint active at X, equality blocks first.
  std::optional<RankOneSolution> try_active(const SymMatrix& x) {
    for (std::size_t j = 0; j < p.eq_blocks.size(); ++j) {
      if (std::abs(inner(p.eq_blocks[j], x)) > opt.tol) continue;
      if (auto s = case_a(x, p.eq_blocks[j], true, static_cast<int>(j))) return s;
    }
    for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
      if (std::abs(inner(p.ineq_blocks[k], x)) > opt.tol) continue;
      if (auto s = case_a(x, p.ineq_blocks[k], false, static_cast<int>(k))) return s;
    }
    return std::nullopt;
  }

  bool any_active(const SymMatrix& x) const {
    for (const auto& b : p.eq_blocks) {
      if (std::abs(inner(b, x)) <= opt.tol) return true;
    }
    for (const auto& b : p.ineq_blocks) {
      if (inner(b, x) >= -opt.tol) return true;
    }
    return false;
  }

  // Case (b): walk X(α) = V(I + αΔ)Vᵀ with <VᵀHV, Δ> = 0 until the rank
  // drops or an inequality becomes active.
  RankOneSolution case_b(SymMatrix x) {
    RankOneSolution best;
    int steps = 0;
    double drift = 0.0;
    const double obj_scale = 1.0 + std::abs(zeta);
    for (;;) {
      Matrix v = psd_factor(x, opt.tol);
      const Eigen::Index r = v.cols();
      if (r <= 1) {
        if (r == 1) {
          if (auto s = accept(v.col(0))) {
            s->provenance = Provenance::kCaseB;
            s->walk_steps = steps;
            s->walk_drift = drift;
            return *s;
          }
        }
        throw RecoveryError(RecoveryError::Kind::kNoVerifiedCandidate,
                            "recover: rank-one endpoint of the walk failed verification",
                            rejected);
      }
      if (steps >= opt.max_walk_steps) {
        throw RecoveryError(RecoveryError::Kind::kRankReductionStall,
                            "recover: rank-reduction walk exceeded its step cap", rejected);
      }
      const Matrix g = v.transpose() * p.H.dense() * v;
      Matrix delta;
      for (Eigen::Index a = 0; a < r && delta.size() == 0; ++a) {
        for (Eigen::Index b = a; b < r; ++b) {
          Matrix e = Matrix::Zero(r, r);
          e(a, b) = e(b, a) = 1.0;
          const Matrix d = e - (e.cwiseProduct(g).sum() / g.squaredNorm()) * g;
          if (d.norm() > 1e-6) {
            delta = d / d.norm();
            break;
          }
        }
      }
      const Matrix vq = v.transpose() * p.Q.dense() * v;
      if (delta.cwiseProduct(vq).sum() > 0) delta = -delta;

      // Constraint hits: <B_k, X> + α <VᵀB_kV, Δ> = 0 with α > 0.
      double alpha = std::numeric_limits<double>::infinity();
      int hit = -1;
      for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
        const double slope =
            (v.transpose() * p.ineq_blocks[k].dense() * v).cwiseProduct(delta).sum();
        const double val = inner(p.ineq_blocks[k], x);
        if (slope > 1e-14) {
          const double a = -val / slope;
          if (a < alpha) {
            alpha = a;
            hit = static_cast<int>(k);
          }
        }
      }
      Eigen::SelfAdjointEigenSolver<Matrix> es(delta, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues()(0);
      bool rank_drop = false;
      if (lmin < 0 && -1.0 / lmin <= alpha) {
        alpha = -1.0 / lmin;
        hit = -1;
        rank_drop = true;
      }
      if (!std::isfinite(alpha)) {
        throw RecoveryError(RecoveryError::Kind::kRankReductionStall,
                            "recover: walk direction never reaches the boundary", rejected);
      }
      Matrix m = Matrix::Identity(r, r) + alpha * delta;
      x = SymMatrix::Symmetrized(v * m * v.transpose());
      ++steps;
      drift = std::max(drift, std::abs(inner(p.Q, x) - zeta) / obj_scale);
      if (!rank_drop && hit >= 0) {
        if (auto s = case_a(x, p.ineq_blocks[static_cast<std::size_t>(hit)], false, hit)) {
          s->walk_steps = steps;
          s->walk_drift = drift;
          return *s;
        }
        throw RecoveryError(RecoveryError::Kind::kNoVerifiedCandidate,
                            "recover: decomposition at the walk's active constraint "
                            "produced no verified candidate",
                            rejected);
      }
    }
  }
};

}  // namespace

RankOneSolution recover(const ConicQcqp& p, const SdpSolution& sol,
                        const RecoveryOptions& options) {
  if (!sol.optimal()) {
    throw RecoveryError(RecoveryError::Kind::kNotOptimal,
                        "recover: SDP status is " + to_string(sol.status));
  }
  if (sol.X.n() != p.n()) throw DimensionError("recover: solution dimension mismatch");
  Recoverer rec{p, sol.primal_objective, options, {}, 0};
  const SymMatrix& x = sol.X;

  auto finish = [&](RankOneSolution s) {
    s.candidates_tried = rec.tried;
    return s;
  };

  const Matrix v = psd_factor(x, options.tol);
  if (v.cols() == 1) {
    if (auto s = rec.accept(v.col(0))) {
      s->provenance = Provenance::kAlreadyRankOne;
      return finish(*s);
    }
  }
  if (auto s = rec.try_active(x)) return finish(*s);
  if (!rec.any_active(x) && v.cols() > 1) return finish(rec.case_b(x));
  throw RecoveryError(RecoveryError::Kind::kNoVerifiedCandidate,
                      "recover: no decomposition component verified (" +
                          std::to_string(rec.tried) + " candidates tried)",
                      rec.rejected);
}

UnionResult solve_union(std::span<const ConicQcqp> problems, const SolverOptions& solver,
                        const RecoveryOptions& options) {
  if (problems.empty()) throw InvalidArgument("solve_union: no branches");
  const ConicQcqp& first = problems.front();
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const auto& b = problems[i];
    b.validate();
    if (b.n() != first.n() || !(b.Q == first.Q) || !(b.H == first.H)) {
      throw InvalidArgument("solve_union: branch " + std::to_string(i) +
                            " does not share Q and H with branch 0");
    }
  }
  UnionResult out;
  bool any_feasible = false;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    BranchOutcome bo;
    const SdpSolution sol = solve(problems[i], solver);
    bo.status = sol.status;
    if (sol.status == SdpStatus::kPrimalInfeasible) {
      out.branches.push_back(bo);
      continue;
    }
    if (sol.status == SdpStatus::kNumericalTrouble || sol.status == SdpStatus::kMaxIter) {
      throw Error("solve_union: branch " + std::to_string(i) + " ended with status " +
                  to_string(sol.status));
    }
    any_feasible = true;
    if (sol.status == SdpStatus::kDualInfeasible) {
      bo.sdp_value = -std::numeric_limits<double>::infinity();
    } else {
      bo.sdp_value = sol.primal_objective;
      try {
        RankOneSolution r = recover(problems[i], sol, options);
        bo.recovered = true;
        bo.recovered_value = r.objective;
        if (r.objective < out.value) {
          out.value = r.objective;
          out.branch = static_cast<int>(i);
          out.solution = std::move(r);
        }
      } catch (const RecoveryError& e) {
        bo.error = e.what();
      }
    }
    out.min_sdp_value = std::min(out.min_sdp_value, bo.sdp_value);
    out.branches.push_back(bo);
  }
  out.infeasible = !any_feasible;
  return out;
}

nlohmann::json residuals_to_json(const Residuals& r) {
  nlohmann::json j;
  j["objective"] = r.objective;
  j["normalizer"] = r.normalizer;
  j["eq"] = std::vector<double>(r.eq.data(), r.eq.data() + r.eq.size());
  j["ineq"] = std::vector<double>(r.ineq.data(), r.ineq.data() + r.ineq.size());
  j["face"] = r.face;
  j["max_violation"] = r.max_violation();
  return j;
}

nlohmann::json rank_one_to_json(const RankOneSolution& s) {
  nlohmann::json j;
  j["x"] = std::vector<double>(s.x.data(), s.x.data() + s.x.size());
  j["objective"] = s.objective;
  j["residuals"] = residuals_to_json(s.residuals);
  j["provenance"] = s.provenance_label();
  j["verified"] = s.verified;
  j["walk_steps"] = s.walk_steps;
  return j;
}

}  // namespace exactsdp
