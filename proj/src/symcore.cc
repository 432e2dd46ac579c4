#include "exactsdp/symcore.h"

#include <cmath>
#include <string>

#include "exactsdp/error.h"

namespace exactsdp {
namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw InvalidArgument("SymMatrix: non-finite entry");
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* op) {
  if (a.n() != b.n()) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" +
                         std::to_string(a.n()) + " vs " +
                         std::to_string(b.n()) + ")");
  }
}

}  // namespace

SymMatrix::SymMatrix(std::size_t n) : m_(Matrix::Zero(n, n)) {}

SymMatrix::SymMatrix(const Matrix& source) {
  if (source.rows() != source.cols()) {
    throw DimensionError("SymMatrix: source is not square");
  }
  require_finite(source);
  m_ = source.triangularView<Eigen::Lower>();
  m_.triangularView<Eigen::StrictlyUpper>() = m_.transpose();
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix src(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionError("SymMatrix: ragged initializer");
    }
    Eigen::Index j = 0;
    for (double v : row) src(i, j++) = v;
    ++i;
  }
  *this = SymMatrix(src);
}

SymMatrix SymMatrix::Identity(std::size_t n) {
  return SymMatrix(Matrix::Identity(n, n));
}

SymMatrix SymMatrix::Diagonal(const Vector& d) {
  return SymMatrix(Matrix(d.asDiagonal()));
}

SymMatrix SymMatrix::Symmetrized(const Matrix& a) {
  return SymMatrix(Matrix(0.5 * (a + a.transpose())));
}

SymMatrix SymMatrix::Outer(const Vector& v) {
  return SymMatrix(Matrix(v * v.transpose()));
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!std::isfinite(value)) throw InvalidArgument("SymMatrix: non-finite entry");
  m_(i, j) = value;
  m_(j, i) = value;
}

double SymMatrix::quad(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != n()) {
    throw DimensionError("SymMatrix::quad: dimension mismatch");
  }
  return x.dot(m_ * x);
}

SymMatrix SymMatrix::operator-() const {
  SymMatrix r = *this;
  r.m_ = -r.m_;
  return r;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  require_same_dim(*this, other, "operator+");
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& other) {
  require_same_dim(*this, other, "operator-");
  m_ -= other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  require_finite(m_);
  return *this;
}

double inner(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b, "inner");
  return a.dense().cwiseProduct(b.dense()).sum();
}

SpectralDecomposition eig(const SymMatrix& a) {
  if (a.n() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eig: symmetric eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eig(const SymMatrix& a) {
  if (a.n() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("min_eig: symmetric eigensolver did not converge");
  }
  return solver.eigenvalues()(0);
}

double max_eig(const SymMatrix& a) {
  if (a.n() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.dense(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("max_eig: symmetric eigensolver did not converge");
  }
  return solver.eigenvalues()(solver.eigenvalues().size() - 1);
}

bool is_psd(const SymMatrix& a, double tol) {
  if (tol < 0) throw InvalidArgument("is_psd: negative tolerance");
  return min_eig(a) >= -tol;
}

bool is_diag_dominant_psd(const SymMatrix& a) {
  const Matrix& m = a.dense();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = m(i, i);
    if (d < 0) return false;
    const double off = m.row(i).cwiseAbs().sum() - std::abs(d);
    if (d < off) return false;
  }
  return true;
}

}  // namespace exactsdp
