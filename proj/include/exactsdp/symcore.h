#ifndef EXACTSDP_SYMCORE_H_
#define EXACTSDP_SYMCORE_H_

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>

namespace exactsdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense real symmetric matrix. The lower triangle of the source is
// authoritative; the stored matrix is always exactly symmetric and finite.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n);
  // Mirrors the lower triangle of `source` into the upper triangle.
  explicit SymMatrix(const Matrix& source);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix Zero(std::size_t n) { return SymMatrix(n); }
  static SymMatrix Identity(std::size_t n);
  static SymMatrix Diagonal(const Vector& d);
  // (A + Aᵀ)/2 without any asymmetry check.
  static SymMatrix Symmetrized(const Matrix& a);
  // v vᵀ
  static SymMatrix Outer(const Vector& v);

  std::size_t n() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }

  // Sets both (i,j) and (j,i).
  void set(std::size_t i, std::size_t j, double value);

  double frobenius_norm() const { return m_.norm(); }
  bool is_zero() const { return m_.isZero(0.0); }
  // xᵀ A x
  double quad(const Vector& x) const;

  SymMatrix operator-() const;
  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator-=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns, matching eigenvalues
};

// Trace inner product Σ A(i,j) B(i,j). Throws DimensionError on mismatch.
double inner(const SymMatrix& a, const SymMatrix& b);

// Throws ConvergenceError if the eigensolver does not converge.
SpectralDecomposition eig(const SymMatrix& a);
double min_eig(const SymMatrix& a);
double max_eig(const SymMatrix& a);

// min_eig(a) >= -tol
bool is_psd(const SymMatrix& a, double tol);

// Nonnegative diagonal dominating the absolute off-diagonal row sums.
// Sufficient for positive semidefiniteness, not necessary.
bool is_diag_dominant_psd(const SymMatrix& a);

}  // namespace exactsdp

#endif  // EXACTSDP_SYMCORE_H_
