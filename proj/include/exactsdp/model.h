#ifndef EXACTSDP_MODEL_H_
#define EXACTSDP_MODEL_H_

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "exactsdp/symcore.h"

namespace exactsdp {

// How an inhomogeneous problem was lifted to one extra coordinate.
enum class LiftMode {
  // x = (u, u_{ℓ+1}) with u_{ℓ+1}² = 1 as the normalizer; u = x[0..ℓ)·x_ℓ.
  kAffine,
  // One quadratic constraint absorbed into H with a slack coordinate; u = x[0..ℓ).
  kSlack,
};

struct Lift {
  LiftMode mode = LiftMode::kAffine;
  std::size_t ell = 0;
};

// minimize xᵀQx  s.t.  xᵀHx = 1,  xᵀB_j x = 0 (eq),  xᵀB_k x <= 0 (ineq),
// and optionally A x = 0 (face_rows). The SDP relaxation replaces xxᵀ by X ⪰ 0.
struct ConicQcqp {
  SymMatrix Q;
  SymMatrix H;
  std::vector<SymMatrix> eq_blocks;
  std::vector<SymMatrix> ineq_blocks;
  std::optional<Matrix> face_rows;  // r x n
  std::optional<Lift> lift;
  nlohmann::json meta = nlohmann::json::object();

  std::size_t n() const { return Q.n(); }
  std::size_t num_constraints() const {
    return eq_blocks.size() + ineq_blocks.size();
  }
  // AᵀA, or nullopt without a face.
  std::optional<SymMatrix> face_block() const;

  // Throws DimensionError / InvalidArgument when the invariants fail.
  void validate() const;
};

// Returns p with the face A x = 0 attached (replacing any previous face).
ConicQcqp attach_face(ConicQcqp p, const Matrix& rows);

// u -> original coordinates from a lifted vector. nullopt when the affine
// coordinate is (numerically) zero and no de-homogenization exists.
std::optional<Vector> dehomogenize(const ConicQcqp& p, const Vector& x,
                                   double tol = 1e-9);

enum class Sense { kLessEqual, kEqual, kRange };

// q(u) = uᵀ Q u + 2 bᵀ u + c, constrained by q(u) <= 0, q(u) = 0 or
// lo <= q(u) <= hi.
struct QuadConstraint {
  SymMatrix Q;
  Vector b;
  double c = 0.0;
  Sense sense = Sense::kLessEqual;
  double lo = 0.0;
  double hi = 0.0;
};

struct InhomQcqp {
  SymMatrix Q0;
  Vector b0;
  double c0 = 0.0;
  std::vector<QuadConstraint> constraints;
  LiftMode mode = LiftMode::kAffine;
  // Index of the constraint absorbed into H; required for kSlack. It must be
  // homogeneous (b = 0) with sense <= and c < 0, i.e. uᵀQu <= -c.
  std::optional<std::size_t> normalizer;

  std::size_t ell() const { return Q0.n(); }
};

// Lifts p to dimension ℓ+1. Affine mode uses H = e_{ℓ+1}e_{ℓ+1}ᵀ and blocks
// (Q b; bᵀ c); slack mode absorbs the normalizer into H = diag(Q_N/(-c_N), 1)
// and maps uᵀPu + d <= 0 to diag(P + d·Q_N/(-c_N), d). Range constraints are
// split into two inequality blocks.
ConicQcqp homogenize(const InhomQcqp& p);

}  // namespace exactsdp

#endif  // EXACTSDP_MODEL_H_
