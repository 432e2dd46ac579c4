#include "exactsdp/model.h"

#include <cmath>
#include <string>

#include "exactsdp/error.h"

namespace exactsdp {
namespace {

// (P b; bᵀ d) in dimension ℓ+1.
SymMatrix bordered(const SymMatrix& p, const Vector& b, double d) {
  const auto ell = static_cast<Eigen::Index>(p.n());
  Matrix m = Matrix::Zero(ell + 1, ell + 1);
  m.topLeftCorner(ell, ell) = p.dense();
  m.block(ell, 0, 1, ell) = b.transpose();
  m.block(0, ell, ell, 1) = b;
  m(ell, ell) = d;
  return SymMatrix(m);
}

void check_constraint_dims(const QuadConstraint& qc, std::size_t ell,
                           std::size_t index) {
  if (qc.Q.n() != ell || static_cast<std::size_t>(qc.b.size()) != ell) {
    throw DimensionError("homogenize: constraint " + std::to_string(index) +
                         " has inconsistent dimension");
  }
}

}  // namespace

std::optional<SymMatrix> ConicQcqp::face_block() const {
  if (!face_rows) return std::nullopt;
  return SymMatrix(Matrix(face_rows->transpose() * *face_rows));
}

void ConicQcqp::validate() const {
  const std::size_t dim = n();
  if (dim == 0) throw DimensionError("ConicQcqp: empty dimension");
  if (H.n() != dim) throw DimensionError("ConicQcqp: H dimension mismatch");
  if (H.is_zero()) throw InvalidArgument("ConicQcqp: H must be nonzero");
  for (std::size_t i = 0; i < eq_blocks.size(); ++i) {
    if (eq_blocks[i].n() != dim) {
      throw DimensionError("ConicQcqp: eq block " + std::to_string(i) +
                           " dimension mismatch");
    }
  }
  for (std::size_t i = 0; i < ineq_blocks.size(); ++i) {
    if (ineq_blocks[i].n() != dim) {
      throw DimensionError("ConicQcqp: ineq block " + std::to_string(i) +
                           " dimension mismatch");
    }
  }
  if (face_rows) {
    if (static_cast<std::size_t>(face_rows->cols()) != dim) {
      throw DimensionError("ConicQcqp: face_rows must have n columns");
    }
    if (!face_rows->allFinite()) {
      throw InvalidArgument("ConicQcqp: face_rows has a non-finite entry");
    }
  }
  if (lift && lift->ell + 1 != dim) {
    throw DimensionError("ConicQcqp: lift dimension mismatch");
  }
}

ConicQcqp attach_face(ConicQcqp p, const Matrix& rows) {
  if (static_cast<std::size_t>(rows.cols()) != p.n()) {
    throw DimensionError("attach_face: A has " + std::to_string(rows.cols()) +
                         " columns, expected " + std::to_string(p.n()));
  }
  p.face_rows = rows;
  return p;
}

std::optional<Vector> dehomogenize(const ConicQcqp& p, const Vector& x,
                                   double tol) {
  if (!p.lift) return x;
  const auto ell = static_cast<Eigen::Index>(p.lift->ell);
  if (p.lift->mode == LiftMode::kSlack) return Vector(x.head(ell));
  const double last = x(ell);
  if (std::abs(last) <= tol) return std::nullopt;
  return Vector(x.head(ell) / last);
}

ConicQcqp homogenize(const InhomQcqp& p) {
  const std::size_t ell = p.ell();
  if (ell == 0) throw DimensionError("homogenize: empty dimension");
  if (static_cast<std::size_t>(p.b0.size()) != ell) {
    throw DimensionError("homogenize: b0 dimension mismatch");
  }
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    check_constraint_dims(p.constraints[i], ell, i);
  }

  ConicQcqp out;
  out.lift = Lift{p.mode, ell};
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(ell));

  if (p.mode == LiftMode::kAffine) {
    if (p.normalizer) {
      throw InvalidArgument(
          "homogenize: affine lift uses u_{l+1}^2 = 1 as normalizer; "
          "no constraint may be designated");
    }
    out.Q = bordered(p.Q0, p.b0, p.c0);
    out.H = bordered(SymMatrix(ell), zero, 1.0);
    for (const auto& qc : p.constraints) {
      switch (qc.sense) {
        case Sense::kLessEqual:
          out.ineq_blocks.push_back(bordered(qc.Q, qc.b, qc.c));
          break;
        case Sense::kEqual:
          out.eq_blocks.push_back(bordered(qc.Q, qc.b, qc.c));
          break;
        case Sense::kRange:
          if (qc.lo > qc.hi) throw InvalidArgument("homogenize: empty range");
          out.ineq_blocks.push_back(bordered(-qc.Q, -qc.b, qc.lo - qc.c));
          out.ineq_blocks.push_back(bordered(qc.Q, qc.b, qc.c - qc.hi));
          break;
      }
    }
    out.validate();
    return out;
  }

  if (!p.normalizer) {
    throw InvalidArgument("homogenize: no designated normalizer");
  }
  const std::size_t ni = *p.normalizer;
  if (ni >= p.constraints.size()) {
    throw InvalidArgument("homogenize: normalizer index out of range");
  }
  const QuadConstraint& norm = p.constraints[ni];
  if (norm.sense != Sense::kLessEqual || !norm.b.isZero(0.0) || !(norm.c < 0)) {
    throw InvalidArgument(
        "homogenize: normalizer must have the form u'Qu <= r with r > 0");
  }
  if (!p.b0.isZero(0.0)) {
    throw InvalidArgument("homogenize: slack lift requires a homogeneous objective");
  }
  const SymMatrix qn = norm.Q * (1.0 / -norm.c);
  out.H = bordered(qn, zero, 1.0);
  out.Q = bordered(p.Q0 + p.c0 * qn, zero, p.c0);
  auto slack_block = [&](const SymMatrix& m, double d) {
    return bordered(m + d * qn, zero, d);
  };
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    if (i == ni) continue;
    const auto& qc = p.constraints[i];
    if (!qc.b.isZero(0.0)) {
      throw InvalidArgument("homogenize: slack lift requires b = 0 in constraint " +
                            std::to_string(i));
    }
    switch (qc.sense) {
      case Sense::kLessEqual:
        out.ineq_blocks.push_back(slack_block(qc.Q, qc.c));
        break;
      case Sense::kEqual:
        out.eq_blocks.push_back(slack_block(qc.Q, qc.c));
        break;
      case Sense::kRange:
        if (qc.lo > qc.hi) throw InvalidArgument("homogenize: empty range");
        out.ineq_blocks.push_back(slack_block(-qc.Q, qc.lo - qc.c));
        out.ineq_blocks.push_back(slack_block(qc.Q, qc.c - qc.hi));
        break;
    }
  }
  out.validate();
  return out;
}

}  // namespace exactsdp
