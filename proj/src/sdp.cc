#include "exactsdp/sdp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "exactsdp/error.h"
#include "exactsdp/scalar_search.h"

namespace exactsdp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest alpha with M + alpha dM ⪰ 0, given the Cholesky factor of M.
double max_step_psd(const Eigen::LLT<Matrix>& chol, const Matrix& dm) {
  const Matrix& l = chol.matrixL();
  Matrix w = l.triangularView<Eigen::Lower>().solve(dm);
  w = l.triangularView<Eigen::Lower>().solve(w.transpose()).transpose();
  w = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return 0.0;
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0 ? kInf : -1.0 / lmin;
}

double max_step_vec(const Vector& v, const Vector& dv) {
  double alpha = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

// Scaled internal form of an SdpProblem: every nonzero row and the objective
// normalized to unit Frobenius norm, so iterates do not depend on the scale of C.
class InteriorPoint {
 public:
  InteriorPoint(const SdpProblem& problem, const SolverOptions& options)
      : options_(options), n_(static_cast<Eigen::Index>(problem.C.n())) {
    c_norm_ = problem.C.frobenius_norm();
    c_scale_ = c_norm_ > 0 ? 1.0 / c_norm_ : 1.0;
    c_ = problem.C.dense() * c_scale_;
    const auto m = problem.rows.size();
    row_scale_.resize(static_cast<Eigen::Index>(m));
    b_.resize(static_cast<Eigen::Index>(m));
    ineq_.resize(m);
    a_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& row = problem.rows[i];
      if (row.A.n() != problem.C.n()) {
        throw DimensionError("solve_sdp: row " + std::to_string(i) +
                             " dimension mismatch");
      }
      const double norm = row.A.frobenius_norm();
      if (norm == 0.0) {
        throw InvalidArgument("solve_sdp: zero constraint row " + std::to_string(i));
      }
      const auto ii = static_cast<Eigen::Index>(i);
      row_scale_(ii) = norm;
      a_.push_back(row.A.dense() / norm);
      b_(ii) = row.rhs / norm;
      ineq_[i] = row.inequality;
    }
    m_ = static_cast<Eigen::Index>(m);
    ineq_mask_ = Vector::Zero(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (ineq_[static_cast<std::size_t>(i)]) ineq_mask_(i) = 1.0;
    }
    num_ineq_ = static_cast<Eigen::Index>(ineq_mask_.sum());
  }

  SdpRawSolution run();

 private:
  Vector apply_a(const Matrix& w) const {
    Vector out(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      out(i) = a_[static_cast<std::size_t>(i)].cwiseProduct(w).sum();
    }
    return out;
  }

  Matrix adjoint_a(const Vector& y) const {
    Matrix out = Matrix::Zero(n_, n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (y(i) != 0.0) out += y(i) * a_[static_cast<std::size_t>(i)];
    }
    return out;
  }

  // Real (unscaled) residual measures of the current iterate.
  double primal_residual_real(const Vector& rp) const {
    return rp.cwiseProduct(row_scale_).cwiseAbs().maxCoeff();
  }

  void fill_solution(SdpRawSolution& out) const;
  bool dual_start();
  bool primal_start(bool with_homogeneous_eq);

  SolverOptions options_;
  Eigen::Index n_;
  Eigen::Index m_ = 0;
  Eigen::Index num_ineq_ = 0;
  double c_norm_ = 0.0;
  double c_scale_ = 1.0;
  Matrix c_;
  std::vector<Matrix> a_;
  Vector b_;
  Vector row_scale_;
  Vector ineq_mask_;
  std::vector<bool> ineq_;

  // Iterate. Slack s and its dual z are stored per row and kept at zero on
  // equality rows (ineq_mask_ selects the live entries).
  Matrix x_, z_mat_;
  Vector y_, s_, z_;
};

void InteriorPoint::fill_solution(SdpRawSolution& out) const {
  out.X = SymMatrix::Symmetrized(x_);
  out.slack = s_.cwiseProduct(row_scale_);
  out.y = y_.cwiseQuotient(row_scale_) / c_scale_;
  const Matrix y_mat = (c_ - adjoint_a(y_)) / c_scale_;
  out.Z = SymMatrix::Symmetrized(y_mat);
}

// Strictly dual-feasible start: y = theta*b on equality rows, y = -delta on
// inequality rows, theta chosen so that C - A^T y is positive definite. Newton
// steps keep the dual residual at zero from here on.
bool InteriorPoint::dual_start() {
  Matrix d = Matrix::Zero(n_, n_);
  Matrix base = c_;
  for (Eigen::Index i = 0; i < m_; ++i) {
    const Matrix& ai = a_[static_cast<std::size_t>(i)];
    if (!ineq_[static_cast<std::size_t>(i)]) d += b_(i) * ai;
  }
  auto lmin = [&](const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.info() == Eigen::Success ? es.eigenvalues()(0) : -kInf;
  };
  for (double delta : {1.0, 1e-1, 1e-2, 1e-3}) {
    base = c_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (ineq_[static_cast<std::size_t>(i)]) base += delta * a_[static_cast<std::size_t>(i)];
    }
    double theta = 0.0;
    if (lmin(base) < 1.0 && d.norm() > 0) {
      ConcaveSearchOptions so;
      so.radius = 1.0;
      so.stop_at = 1.0;
      theta = maximize_concave([&](double t) { return lmin(base - t * d); }, so).arg;
    }
    Vector y = theta * b_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (ineq_[static_cast<std::size_t>(i)]) y(i) = -delta;
    }
    const Matrix z = c_ - adjoint_a(y);
    if (lmin(z) > 1e-6) {
      y_ = y;
      z_mat_ = 0.5 * (z + z.transpose());
      z_ = delta * ineq_mask_;
      return true;
    }
  }
  return false;
}

// Start with A(X) + s = b exactly on the normalization and inequality rows,
// and on homogeneous equality rows too when requested: X = (I + A^T w)/kappa
// with w of least norm, kept only if positive definite.
bool InteriorPoint::primal_start(bool with_homogeneous_eq) {
  if (m_ == 0) return false;
  const Vector a_id = apply_a(Matrix::Identity(n_, n_));
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < m_; ++i) {
    if (!ineq_[static_cast<std::size_t>(i)]) {
      num += b_(i) * a_id(i);
      den += b_(i) * b_(i);
    }
  }
  const double kappa = den > 0 && num > 0 ? num / den : 1.0;
  std::vector<Eigen::Index> rows;
  Vector target(m_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    if (ineq_[static_cast<std::size_t>(i)]) {
      target(i) = std::min(a_id(i), -0.1);
    } else {
      target(i) = kappa * b_(i);
      if (b_(i) == 0.0 && !with_homogeneous_eq) continue;
    }
    rows.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Matrix gram(k, k);
  Vector rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Matrix& ai = a_[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
    rhs(i) = target(rows[static_cast<std::size_t>(i)]) - a_id(rows[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) =
          ai.cwiseProduct(a_[static_cast<std::size_t>(rows[static_cast<std::size_t>(j)])]).sum();
    }
  }
  const Vector w = gram.completeOrthogonalDecomposition().solve(rhs);
  Matrix x = Matrix::Identity(n_, n_);
  for (Eigen::Index i = 0; i < k; ++i) x += w(i) * a_[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
  x = 0.5 * (x + x.transpose());
  const Vector ax = apply_a(x);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index r = rows[static_cast<std::size_t>(i)];
    if (std::abs(ax(r) - target(r)) > 1e-10 * (1.0 + std::abs(target(r)))) return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || es.eigenvalues()(0) < 1e-3) return false;
  x_ = x / kappa;
  s_ = Vector::Zero(m_);
  for (Eigen::Index i = 0; i < m_; ++i) {
    if (ineq_[static_cast<std::size_t>(i)]) s_(i) = -target(i) / kappa;
  }
  return true;
}

SdpRawSolution InteriorPoint::run() {
  SdpRawSolution out;
  const double n_cone = static_cast<double>(n_) + static_cast<double>(num_ineq_);
  const double rho = 1.0 + c_.norm() + (m_ > 0 ? a_[0].norm() : 0.0);
  if (!dual_start()) {
    z_mat_ = rho * Matrix::Identity(n_, n_);
    y_ = Vector::Zero(m_);
    z_ = rho * ineq_mask_;
  }
  if (!primal_start(true) && !primal_start(false)) {
    x_ = rho * Matrix::Identity(n_, n_);
    s_ = rho * ineq_mask_;
  }

  const double divergence_cap = 1e10 * (1.0 + c_norm_);
  double prev_pres = kInf;
  int stalled = 0;

  for (int iter = 0;; ++iter) {
    // Residuals in scaled units.
    const Vector rp = b_ - apply_a(x_) - s_.cwiseProduct(ineq_mask_);
    const Matrix rd_mat = c_ - adjoint_a(y_) - z_mat_;
    const Vector rd = (-y_ - z_).cwiseProduct(ineq_mask_);

    const double pobj = (c_.cwiseProduct(x_).sum()) / c_scale_;
    const double dobj = b_.dot(y_) / c_scale_;
    const double compl_scaled = x_.cwiseProduct(z_mat_).sum() + s_.dot(z_);
    const double compl_real = compl_scaled / c_scale_;
    const double pres = m_ > 0 ? primal_residual_real(rp) : 0.0;
    const double dres =
        std::max(rd_mat.norm(), m_ > 0 ? rd.cwiseAbs().maxCoeff() : 0.0) /
        c_scale_ / (1.0 + c_norm_);
    const double gap = std::abs(pobj - dobj);

    IterationLog entry;
    entry.iteration = iter;
    entry.primal_residual = pres;
    entry.dual_residual = dres;
    entry.primal_objective = pobj;
    entry.dual_objective = dobj;
    entry.complementarity = compl_real;
    out.log.push_back(entry);
    // Printed once the step is known; terminal iterates print zero steps.
    struct LogPrinter {
      const SolverOptions& o;
      const IterationLog& e;
      ~LogPrinter() {
        if (o.verbosity > 0) {
          std::fprintf(stderr,
                       "iter %3d  pres %.2e  dres %.2e  pobj % .10e  dobj % .10e  "
                       "gap %.2e  ap %.3f  ad %.3f\n",
                       e.iteration, e.primal_residual, e.dual_residual, e.primal_objective,
                       e.dual_objective, std::abs(e.primal_objective - e.dual_objective),
                       e.alpha_primal, e.alpha_dual);
        }
      }
    } printer{options_, out.log.back()};

    out.iterations = iter;
    out.primal_objective = pobj;
    out.dual_objective = dobj;
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.complementarity = compl_real;

    const double scale = 1.0 + std::abs(pobj);
    if (pres <= options_.feasibility_tol && dres <= options_.feasibility_tol &&
        gap <= options_.gap_tol * scale &&
        std::abs(compl_real) <= options_.gap_tol * scale &&
        gap * c_scale_ <= options_.gap_tol * (1.0 + std::abs(pobj) * c_scale_) &&
        std::abs(compl_scaled) <= options_.gap_tol * (1.0 + std::abs(pobj) * c_scale_) &&
        (num_ineq_ == 0 || s_.cwiseProduct(z_).cwiseAbs().maxCoeff() / c_scale_ <= options_.gap_tol)) {
      out.status = SdpStatus::kOptimal;
      fill_solution(out);
      return out;
    }

    // Infeasibility detection on the normalized iterate.
    const double y_norm = y_.norm();
    if (y_norm > 1e6) {
      Vector ray = y_ / y_norm;
      for (Eigen::Index i = 0; i < m_; ++i) {
        if (ineq_[static_cast<std::size_t>(i)]) ray(i) = std::min(ray(i), 0.0);
      }
      const double by = b_.dot(ray);
      const Matrix neg = -adjoint_a(ray);
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (neg + neg.transpose()),
                                               Eigen::EigenvaluesOnly);
      if (by > 1e-6 && es.info() == Eigen::Success &&
          es.eigenvalues()(0) >= -1e-8 * by) {
        out.status = SdpStatus::kPrimalInfeasible;
        out.dual_ray = ray.cwiseQuotient(row_scale_);
        out.message = "dual improving ray found";
        fill_solution(out);
        return out;
      }
    }
    if (pres >= 0.5 * prev_pres) {
      ++stalled;
    } else {
      stalled = 0;
    }
    prev_pres = std::min(prev_pres, pres);
    if (dobj > divergence_cap && stalled > 5) {
      out.status = SdpStatus::kPrimalInfeasible;
      out.message = "dual objective diverged while primal residual stalled";
      fill_solution(out);
      return out;
    }
    const double x_norm = x_.norm();
    if (pobj < -divergence_cap && x_norm > 1e8) {
      const Matrix ray = x_ / x_norm;
      const Vector ar = apply_a(ray);
      bool ray_ok = c_.cwiseProduct(ray).sum() < 0;
      for (Eigen::Index i = 0; i < m_ && ray_ok; ++i) {
        const bool iq = ineq_[static_cast<std::size_t>(i)];
        if (iq ? ar(i) > 1e-6 : std::abs(ar(i)) > 1e-6) ray_ok = false;
      }
      if (ray_ok || dres > 1e-3) {
        out.status = SdpStatus::kDualInfeasible;
        out.message = "primal objective diverged";
        fill_solution(out);
        return out;
      }
    }

    if (iter >= options_.max_iterations) {
      out.status = SdpStatus::kMaxIter;
      out.message = "iteration limit reached";
      fill_solution(out);
      return out;
    }

    // Newton system.
    Eigen::LLT<Matrix> chol_z(z_mat_);
    Eigen::LLT<Matrix> chol_x(x_);
    if (chol_z.info() != Eigen::Success || chol_x.info() != Eigen::Success) {
      out.status = SdpStatus::kNumericalTrouble;
      out.message = "iterate left the cone interior";
      fill_solution(out);
      return out;
    }
    const Matrix z_inv = chol_z.solve(Matrix::Identity(n_, n_));
    const double mu = compl_scaled / n_cone;

    Matrix schur = Matrix::Zero(m_, m_);
    std::vector<Matrix> xaz(static_cast<std::size_t>(m_));
    for (Eigen::Index j = 0; j < m_; ++j) {
      xaz[static_cast<std::size_t>(j)] = x_ * a_[static_cast<std::size_t>(j)] * z_inv;
    }
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = a_[static_cast<std::size_t>(i)]
                             .cwiseProduct(xaz[static_cast<std::size_t>(j)])
                             .sum();
        schur(i, j) = v;
        schur(j, i) = v;
      }
      if (ineq_[static_cast<std::size_t>(i)]) schur(i, i) += s_(i) / z_(i);
    }
    Eigen::LLT<Matrix> chol_m(schur);
    const bool use_llt = chol_m.info() == Eigen::Success;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    if (!use_llt) cod.compute(schur);

    Vector safe_z = z_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!ineq_[static_cast<std::size_t>(i)]) safe_z(i) = 1.0;
    }

    struct Direction {
      Matrix dx, dz_mat;
      Vector dy, ds, dz;
    };
    auto solve_direction = [&](const Matrix& rc_mat, const Vector& rc) {
      Direction d;
      const Vector lp = (rc - s_.cwiseProduct(rd)).cwiseQuotient(safe_z)
                            .cwiseProduct(ineq_mask_);
      const Vector rhs = rp - apply_a((rc_mat - x_ * rd_mat) * z_inv) - lp;
      d.dy = use_llt ? Vector(chol_m.solve(rhs)) : Vector(cod.solve(rhs));
      d.dz_mat = rd_mat - adjoint_a(d.dy);
      Matrix dx = (rc_mat - x_ * d.dz_mat) * z_inv;
      d.dx = 0.5 * (dx + dx.transpose());
      d.dz = (rd - d.dy).cwiseProduct(ineq_mask_);
      d.ds = (rc - s_.cwiseProduct(d.dz)).cwiseQuotient(safe_z).cwiseProduct(ineq_mask_);
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ap = std::min(max_step_psd(chol_x, d.dx), max_step_vec(s_, d.ds));
      double ad = std::min(max_step_psd(chol_z, d.dz_mat), max_step_vec(z_, d.dz));
      return std::pair<double, double>{ap, ad};
    };

    const Matrix xz = x_ * z_mat_;
    const Vector sz = s_.cwiseProduct(z_);
    // Predictor.
    Direction aff = solve_direction(-xz, -sz);
    auto [ap_aff, ad_aff] = step_lengths(aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    const double mu_aff =
        ((x_ + ap_aff * aff.dx).cwiseProduct(z_mat_ + ad_aff * aff.dz_mat).sum() +
         (s_ + ap_aff * aff.ds).dot(z_ + ad_aff * aff.dz)) /
        n_cone;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);
    // Corrector.
    const Matrix rc_mat = sigma * mu * Matrix::Identity(n_, n_) - xz - aff.dx * aff.dz_mat;
    const Vector rc =
        (Vector::Constant(m_, sigma * mu) - sz - aff.ds.cwiseProduct(aff.dz))
            .cwiseProduct(ineq_mask_);
    Direction d = solve_direction(rc_mat, rc);
    if (!d.dx.allFinite() || !d.dy.allFinite()) {
      out.status = SdpStatus::kNumericalTrouble;
      out.message = "non-finite search direction";
      fill_solution(out);
      return out;
    }
    auto [ap, ad] = step_lengths(d);
    ap = std::min(1.0, options_.step_fraction * ap);
    ad = std::min(1.0, options_.step_fraction * ad);
    out.log.back().alpha_primal = ap;
    out.log.back().alpha_dual = ad;

    x_ += ap * d.dx;
    s_ += ap * d.ds;
    y_ += ad * d.dy;
    z_mat_ += ad * d.dz_mat;
    z_ += ad * d.dz;
    x_ = 0.5 * (x_ + x_.transpose());
    z_mat_ = 0.5 * (z_mat_ + z_mat_.transpose());
  }
}

}  // namespace

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::kOptimal: return "Optimal";
    case SdpStatus::kPrimalInfeasible: return "PrimalInfeasible";
    case SdpStatus::kDualInfeasible: return "DualInfeasible";
    case SdpStatus::kMaxIter: return "MaxIter";
    case SdpStatus::kNumericalTrouble: return "NumericalTrouble";
  }
  return "Unknown";
}

SdpRawSolution solve_sdp(const SdpProblem& problem, const SolverOptions& options) {
  if (!(options.feasibility_tol > 0) || !(options.gap_tol > 0) ||
      options.max_iterations <= 0) {
    throw InvalidArgument("solve_sdp: tolerances and iteration cap must be positive");
  }
  InteriorPoint ipm(problem, options);
  return ipm.run();
}

namespace {

// Rebuilds X on the numerical null space of Y: X = V W Vᵀ with W the
// least-norm correction of VᵀXV onto the rows active at the optimum. Iterates
// near a rank-deficient optimum resolve X only to about sqrt(gap) while Y's
// null space is accurate to about gap; the result is kept only if it
// verifies well inside the solver tolerances.
void purify(const ConicQcqp& p, SdpSolution& s, const SolverOptions& options) {
  const SpectralDecomposition ey = eig(s.Y);
  const double ynorm = 1.0 + s.Y.frobenius_norm();
  Eigen::Index r = 0;
  while (r < ey.eigenvalues.size() && ey.eigenvalues(r) <= 1e-6 * ynorm) ++r;
  if (r == 0 || r == ey.eigenvalues.size()) return;
  if (ey.eigenvalues(r) < 1e-3 * ynorm) return;  // no clear null space
  const Matrix v = ey.eigenvectors.leftCols(r);
  auto restrict = [&](const SymMatrix& m) { return Matrix(v.transpose() * m.dense() * v); };

  std::vector<Matrix> rows;
  std::vector<double> rhs;
  rows.push_back(restrict(p.H));
  rhs.push_back(1.0);
  for (const auto& e : p.eq_blocks) {
    rows.push_back(restrict(e));
    rhs.push_back(0.0);
  }
  if (auto f = p.face_block()) {
    rows.push_back(restrict(*f));
    rhs.push_back(0.0);
  }
  for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
    const double yk = s.y_ineq(static_cast<Eigen::Index>(k));
    if (-yk > std::abs(inner(p.ineq_blocks[k], s.X))) {
      rows.push_back(restrict(p.ineq_blocks[k]));
      rhs.push_back(0.0);
    }
  }
  const Matrix w0 = restrict(s.X);
  const auto m = static_cast<Eigen::Index>(rows.size());
  Matrix gram(m, m);
  Vector res(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    res(i) = rhs[static_cast<std::size_t>(i)] - rows[static_cast<std::size_t>(i)].cwiseProduct(w0).sum();
    for (Eigen::Index j = 0; j <= i; ++j) {
      gram(i, j) = gram(j, i) =
          rows[static_cast<std::size_t>(i)].cwiseProduct(rows[static_cast<std::size_t>(j)]).sum();
    }
  }
  const Vector lambda = gram.completeOrthogonalDecomposition().solve(res);
  Matrix w = w0;
  for (Eigen::Index i = 0; i < m; ++i) w += lambda(i) * rows[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Matrix> ew(0.5 * (w + w.transpose()));
  if (ew.info() != Eigen::Success || ew.eigenvalues()(0) < -1e-12) return;
  const Matrix wc = ew.eigenvectors() * ew.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    ew.eigenvectors().transpose();
  const SymMatrix x = SymMatrix::Symmetrized(v * wc * v.transpose());

  double viol = std::abs(inner(p.H, x) - 1.0);
  for (const auto& e : p.eq_blocks) viol = std::max(viol, std::abs(inner(e, x)));
  if (auto f = p.face_block()) viol = std::max(viol, std::abs(inner(*f, x)));
  for (const auto& b : p.ineq_blocks) viol = std::max(viol, inner(b, x));
  const double pobj = inner(p.Q, x);
  const double scale = 1.0 + std::abs(pobj);
  if (viol > 0.1 * options.feasibility_tol) return;
  if (std::abs(pobj - s.dual_objective) > std::max(s.gap, 0.1 * options.gap_tol * scale)) return;
  if ((x - s.X).frobenius_norm() > 1e-2 * (1.0 + s.X.frobenius_norm())) return;
  s.X = x;
  s.primal_objective = pobj;
  s.gap = std::abs(pobj - s.dual_objective);
  s.primal_residual = viol;
  s.complementarity = inner(x, s.Y);
}

SdpSolution solve_direct(const ConicQcqp& p, const SolverOptions& options) {
  SdpProblem sdp;
  sdp.C = p.Q;
  sdp.rows.push_back({p.H, 1.0, false});
  // Rows with a zero matrix and zero right-hand side are vacuous.
  std::vector<int> eq_row(p.eq_blocks.size(), -1);
  std::vector<int> ineq_row(p.ineq_blocks.size(), -1);
  for (std::size_t j = 0; j < p.eq_blocks.size(); ++j) {
    if (p.eq_blocks[j].is_zero()) continue;
    eq_row[j] = static_cast<int>(sdp.rows.size());
    sdp.rows.push_back({p.eq_blocks[j], 0.0, false});
  }
  int face_row = -1;
  if (auto face = p.face_block(); face && !face->is_zero()) {
    face_row = static_cast<int>(sdp.rows.size());
    sdp.rows.push_back({*face, 0.0, false});
  }
  for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
    if (p.ineq_blocks[k].is_zero()) continue;
    ineq_row[k] = static_cast<int>(sdp.rows.size());
    sdp.rows.push_back({p.ineq_blocks[k], 0.0, true});
  }

  SdpRawSolution raw = solve_sdp(sdp, options);
  SdpSolution out;
  out.status = raw.status;
  out.X = raw.X;
  out.Y = raw.Z;
  out.t = raw.y(0);
  out.y_eq = Vector::Zero(static_cast<Eigen::Index>(p.eq_blocks.size()));
  out.y_ineq = Vector::Zero(static_cast<Eigen::Index>(p.ineq_blocks.size()));
  for (std::size_t j = 0; j < eq_row.size(); ++j) {
    if (eq_row[j] >= 0) out.y_eq(static_cast<Eigen::Index>(j)) = raw.y(eq_row[j]);
  }
  for (std::size_t k = 0; k < ineq_row.size(); ++k) {
    if (ineq_row[k] >= 0) out.y_ineq(static_cast<Eigen::Index>(k)) = raw.y(ineq_row[k]);
  }
  if (face_row >= 0) out.y_face = raw.y(face_row);
  out.primal_objective = raw.primal_objective;
  out.dual_objective = raw.dual_objective;
  out.gap = std::abs(raw.primal_objective - raw.dual_objective);
  out.primal_residual = raw.primal_residual;
  out.dual_residual = raw.dual_residual;
  out.complementarity = raw.complementarity;
  out.iterations = raw.iterations;
  out.log = std::move(raw.log);
  if (raw.dual_ray) {
    const Vector& rr = *raw.dual_ray;
    const auto ne = static_cast<Eigen::Index>(p.eq_blocks.size());
    Vector full = Vector::Zero(2 + ne + static_cast<Eigen::Index>(p.ineq_blocks.size()));
    full(0) = rr(0);
    for (std::size_t j = 0; j < eq_row.size(); ++j) {
      if (eq_row[j] >= 0) full(1 + static_cast<Eigen::Index>(j)) = rr(eq_row[j]);
    }
    if (face_row >= 0) full(1 + ne) = rr(face_row);
    for (std::size_t k = 0; k < ineq_row.size(); ++k) {
      if (ineq_row[k] >= 0) full(2 + ne + static_cast<Eigen::Index>(k)) = rr(ineq_row[k]);
    }
    out.dual_ray = full;
  }
  out.message = std::move(raw.message);
  if (out.optimal()) purify(p, out, options);
  return out;
}

SdpSolution infeasible_face(const ConicQcqp& p, const std::string& why) {
  SdpSolution out;
  out.status = SdpStatus::kPrimalInfeasible;
  out.message = why;
  out.X = SymMatrix::Zero(p.n());
  out.Y = p.Q;
  out.y_eq = Vector::Zero(static_cast<Eigen::Index>(p.eq_blocks.size()));
  out.y_ineq = Vector::Zero(static_cast<Eigen::Index>(p.ineq_blocks.size()));
  // Ray t = 1, y_face = -λ: -(H - λAᵀA) ⪰ 0 once λ·λ_min(AᵀA) >= λ_max(H).
  const SymMatrix face = *p.face_block();
  const double lmin = min_eig(face);
  if (lmin > 0) {
    Vector ray = Vector::Zero(static_cast<Eigen::Index>(2 + p.num_constraints()));
    ray(0) = 1.0;
    ray(static_cast<Eigen::Index>(1 + p.eq_blocks.size())) =
        -std::max(0.0, max_eig(p.H)) / lmin - 1.0;
    out.dual_ray = ray;
  }
  return out;
}

// Facial reduction: every X ⪰ 0 with <AᵀA, X> = 0 is N W Nᵀ for an
// orthonormal basis N of ker A, so the face equality is solved exactly.
SdpSolution solve_on_face(const ConicQcqp& p, const SolverOptions& options) {
  const Matrix& a = *p.face_rows;
  const auto n = static_cast<Eigen::Index>(p.n());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-10 * std::max(1.0, smax)) ++rank;
  }
  if (rank == n) return infeasible_face(p, "face A x = 0 admits only x = 0");
  const Matrix basis = svd.matrixV().rightCols(n - rank);
  auto reduce = [&](const SymMatrix& m) {
    return SymMatrix::Symmetrized(basis.transpose() * m.dense() * basis);
  };
  ConicQcqp r;
  r.Q = reduce(p.Q);
  r.H = reduce(p.H);
  if (r.H.frobenius_norm() <= 1e-12 * std::max(1.0, p.H.frobenius_norm())) {
    return infeasible_face(p, "normalizer vanishes on the face A x = 0");
  }
  for (const auto& b : p.eq_blocks) r.eq_blocks.push_back(reduce(b));
  for (const auto& b : p.ineq_blocks) r.ineq_blocks.push_back(reduce(b));
  SdpSolution out = solve_direct(r, options);

  out.X = SymMatrix::Symmetrized(basis * out.X.dense() * basis.transpose());
  SymMatrix s = p.Q;
  s -= p.H * out.t;
  for (std::size_t j = 0; j < p.eq_blocks.size(); ++j) {
    s -= p.eq_blocks[j] * out.y_eq(static_cast<Eigen::Index>(j));
  }
  for (std::size_t k = 0; k < p.ineq_blocks.size(); ++k) {
    s -= p.ineq_blocks[k] * out.y_ineq(static_cast<Eigen::Index>(k));
  }
  // The face multiplier is free. In the basis (N, N⊥) the slack is
  // [[Z, Cᵀ], [C, D - y G]] with G ≻ 0, so Y ⪰ 0 once Z ≻ 0 and
  // -y G ⪰ C Z⁻¹ Cᵀ - D. The full-space dual need not be attained when the
  // face removes primal interior points; lowering t by a small δ (within the
  // gap tolerance) makes Z ≻ 0 and a finite y exist.
  const SymMatrix face = *p.face_block();
  const Matrix perp = svd.matrixV().leftCols(rank);
  const Matrix g = perp.transpose() * face.dense() * perp;
  Eigen::SelfAdjointEigenSolver<Matrix> ges(0.5 * (g + g.transpose()));
  const Matrix g_isqrt = ges.eigenvectors() *
                         ges.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
                         ges.eigenvectors().transpose();
  const double scale = 1.0 + std::abs(out.t);
  // Larger δ shrinks |y|; the score balances the dual objective loss δ
  // against the roundoff |y|·‖AᵀA‖·eps that a huge multiplier amplifies.
  double best_lmin = -kInf, best_y = 0.0, best_delta = 0.0, best_score = kInf;
  const double face_norm = face.frobenius_norm();
  for (double rel : {0.0, 1e-10, 1e-9, 1e-8, 3e-8, 1e-7}) {
    const double delta = rel * scale;
    const Matrix sd = (s + p.H * delta).dense();
    const Matrix z = basis.transpose() * sd * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> zes(0.5 * (z + z.transpose()));
    const double zmin = zes.eigenvalues()(0);
    if (!(zmin > 0)) continue;
    const Matrix c = perp.transpose() * sd * basis;
    const Matrix k = c * zes.eigenvectors() * zes.eigenvalues().cwiseInverse().asDiagonal() *
                         zes.eigenvectors().transpose() * c.transpose() -
                     perp.transpose() * sd * perp;
    const Matrix kt = g_isqrt * k * g_isqrt;
    Eigen::SelfAdjointEigenSolver<Matrix> kes(0.5 * (kt + kt.transpose()), Eigen::EigenvaluesOnly);
    const double y = -(kes.eigenvalues().maxCoeff() + zmin);
    SymMatrix m = SymMatrix::Symmetrized(sd);
    m -= face * y;
    const double lmin = min_eig(m);
    const double score = std::max(0.0, -lmin) + delta + 1e-15 * std::abs(y) * face_norm;
    if (score < best_score) {
      best_score = score;
      best_lmin = lmin;
      best_y = y;
      best_delta = delta;
    }
  }
  if (!(best_lmin >= min_eig(s))) {
    best_y = 0.0;
    best_delta = 0.0;
  }
  out.t -= best_delta;
  out.dual_objective = out.t;
  out.gap = std::abs(out.primal_objective - out.dual_objective);
  out.y_face = best_y;
  out.Y = s + p.H * best_delta;
  out.Y -= face * out.y_face;
  return out;
}

}  // namespace

SdpSolution solve(const ConicQcqp& p, const SolverOptions& options) {
  p.validate();
  if (auto face = p.face_block(); face && !face->is_zero()) return solve_on_face(p, options);
  return solve_direct(p, options);
}

SdpSolution solve_feasibility(std::span<const SymMatrix> eq,
                              std::span<const SymMatrix> ineq,
                              const SymMatrix& objective, bool maximize,
                              const SolverOptions& options) {
  ConicQcqp p;
  p.Q = maximize ? -objective : objective;
  p.H = SymMatrix::Identity(objective.n());
  p.eq_blocks.assign(eq.begin(), eq.end());
  p.ineq_blocks.assign(ineq.begin(), ineq.end());
  SdpSolution sol = solve(p, options);
  if (maximize) {
    sol.primal_objective = -sol.primal_objective;
    sol.dual_objective = -sol.dual_objective;
    for (auto& entry : sol.log) {
      entry.primal_objective = -entry.primal_objective;
      entry.dual_objective = -entry.dual_objective;
    }
  }
  return sol;
}

}  // namespace exactsdp
