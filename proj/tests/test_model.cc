#include <gtest/gtest.h>

#include <random>

#include "exactsdp/error.h"
#include "exactsdp/model.h"
#include "exactsdp/oracle.h"
#include "exactsdp/problem_io.h"

namespace exactsdp {
namespace {

InhomQcqp ex41_canonical() {
  InhomQcqp q;
  q.Q0 = SymMatrix{{-1}};
  q.b0 = Vector::Zero(1);
  q.mode = LiftMode::kSlack;
  q.constraints.push_back({SymMatrix{{1}}, Vector::Zero(1), -1.0, Sense::kLessEqual, 0, 0});
  q.constraints.push_back({SymMatrix{{2}}, Vector::Zero(1), -1.0, Sense::kLessEqual, 0, 0});
  q.normalizer = 1;
  return q;
}

InhomQcqp ex43_scalar() {
  InhomQcqp q;
  q.Q0 = SymMatrix{{1}};
  q.b0 = Vector::Zero(1);
  q.mode = LiftMode::kAffine;
  QuadConstraint c{SymMatrix{{0}}, Vector::Constant(1, 0.5), 0.0, Sense::kRange, -1.0, 1.0};
  q.constraints.push_back(c);
  return q;
}

TEST(Homogenize, SlackLiftBlocks) {
  const ConicQcqp p = homogenize(ex41_canonical());
  ASSERT_EQ(p.n(), 2u);
  EXPECT_EQ(p.Q, (SymMatrix{{-1, 0}, {0, 0}}));
  EXPECT_EQ(p.H, (SymMatrix{{2, 0}, {0, 1}}));
  ASSERT_EQ(p.ineq_blocks.size(), 1u);
  // (Q1 - Q2, 0; 0, -1)
  EXPECT_EQ(p.ineq_blocks[0], (SymMatrix{{-1, 0}, {0, -1}}));
  ASSERT_TRUE(p.lift.has_value());
  EXPECT_EQ(p.lift->mode, LiftMode::kSlack);
}

TEST(Homogenize, RangeSplitsIntoTwoBlocks) {
  const ConicQcqp p = homogenize(ex43_scalar());
  ASSERT_EQ(p.ineq_blocks.size(), 2u);
  EXPECT_EQ(p.ineq_blocks[0], (SymMatrix{{0, -0.5}, {-0.5, -1}}));
  EXPECT_EQ(p.ineq_blocks[1], (SymMatrix{{0, 0.5}, {0.5, -1}}));
  EXPECT_EQ(p.H, (SymMatrix{{0, 0}, {0, 1}}));
  EXPECT_EQ(p.Q, (SymMatrix{{1, 0}, {0, 0}}));
}

TEST(Homogenize, ZeroObjective) {
  InhomQcqp q = ex43_scalar();
  q.Q0 = SymMatrix::Zero(1);
  const ConicQcqp p = homogenize(q);
  EXPECT_TRUE(p.Q.is_zero());
  EXPECT_EQ(p.Q.n(), 2u);
}

TEST(Homogenize, RangeIdentityOnRandomPsd) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int ell = 1; ell <= 4; ++ell) {
    InhomQcqp q;
    q.Q0 = SymMatrix::Identity(static_cast<std::size_t>(ell));
    q.b0 = Vector::Zero(ell);
    Matrix m(ell, ell);
    for (int i = 0; i < ell; ++i)
      for (int j = 0; j < ell; ++j) m(i, j) = g(rng);
    Vector b(ell);
    for (int i = 0; i < ell; ++i) b(i) = g(rng);
    q.constraints.push_back({SymMatrix::Symmetrized(m), b, 0.0, Sense::kRange, -1.0, 1.0});
    const ConicQcqp p = homogenize(q);
    const auto n = static_cast<int>(p.n());
    for (int t = 0; t < 20; ++t) {
      Matrix v(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = g(rng);
      const SymMatrix x = SymMatrix::Symmetrized(v * v.transpose());
      EXPECT_NEAR(inner(p.ineq_blocks[0] + p.ineq_blocks[1], x), -2 * x(n - 1, n - 1), 1e-12);
    }
  }
}

TEST(Homogenize, Errors) {
  InhomQcqp q = ex41_canonical();
  q.normalizer.reset();
  EXPECT_THROW(homogenize(q), InvalidArgument);
  q = ex41_canonical();
  q.normalizer = 5;
  EXPECT_THROW(homogenize(q), InvalidArgument);
  q = ex43_scalar();
  q.constraints[0].b = Vector::Zero(3);
  EXPECT_THROW(homogenize(q), DimensionError);
}

TEST(Homogenize, PreservesOptimalValueOnSlackLift) {
  // min -u^2 s.t. u^2 <= 1, 2u^2 <= 1 has value -1/2 at u = 1/sqrt(2).
  const ConicQcqp p = homogenize(ex41_canonical());
  const OracleResult r = oracle_min(p, 20000, 3);
  ASSERT_TRUE(r.found);
  EXPECT_NEAR(r.best_value, -0.5, 1e-4);
}

TEST(AttachFace, Examples) {
  ConicQcqp p;
  p.Q = SymMatrix::Identity(2);
  p.H = SymMatrix::Identity(2);
  Matrix a(1, 2);
  a << 1, 0;
  EXPECT_EQ(*attach_face(p, a).face_block(), (SymMatrix{{1, 0}, {0, 0}}));
  EXPECT_TRUE(attach_face(p, Matrix::Zero(1, 2)).face_block()->is_zero());
  EXPECT_EQ(*attach_face(p, Matrix::Identity(2, 2)).face_block(), SymMatrix::Identity(2));
  EXPECT_THROW(attach_face(p, Matrix::Zero(1, 3)), DimensionError);
  EXPECT_FALSE(p.face_block().has_value());
}

TEST(ConicQcqp, ValidateRejectsZeroH) {
  ConicQcqp p;
  p.Q = SymMatrix::Identity(2);
  p.H = SymMatrix::Zero(2);
  EXPECT_THROW(p.validate(), InvalidArgument);
  p.H = SymMatrix::Identity(3);
  EXPECT_THROW(p.validate(), DimensionError);
}

TEST(Dehomogenize, AffineLiftDividesByLastCoordinate) {
  const ConicQcqp p = homogenize(ex43_scalar());
  Vector x(2);
  x << 0.6, -2.0;
  const auto u = dehomogenize(p, x);
  ASSERT_TRUE(u.has_value());
  EXPECT_NEAR((*u)(0), -0.3, 1e-15);
  x(1) = 0.0;
  EXPECT_FALSE(dehomogenize(p, x).has_value());
}

TEST(ProblemIo, MinimalDocument) {
  const ConicQcqp p = parse_problem(R"({"n": 1, "Q": [[1]], "H": [[1]], "constraints": []})");
  EXPECT_EQ(p.n(), 1u);
  EXPECT_EQ(p.num_constraints(), 0u);
}

TEST(ProblemIo, AsymmetricMatrixRejected) {
  try {
    parse_problem(R"({"n": 2, "Q": [[1, 0.001], [0, 1]], "H": [[1, 0], [0, 1]], "constraints": []})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("asymmetric matrix"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("Q"), std::string::npos);
  }
}

TEST(ProblemIo, SchemaViolations) {
  EXPECT_THROW(parse_problem(R"({"n": 1, "H": [[1]], "constraints": []})"), ParseError);
  EXPECT_THROW(parse_problem(R"({"n": 1, "Q": [[1]], "H": [[1]], "constraints": [{"matrix": [[1]], "kind": "le"}]})"),
               ParseError);
  EXPECT_THROW(parse_problem(R"({"n": 2, "Q": [[1]], "H": [[1]], "constraints": []})"), ParseError);
  EXPECT_THROW(parse_problem(R"({"n": 1, "Q": [[1]], "H": [[0]], "constraints": []})"), Error);
  EXPECT_THROW(parse_problem("{not json"), ParseError);
  EXPECT_THROW(parse_problem(R"({"version": 9, "n": 1, "Q": [[1]], "H": [[1]], "constraints": []})"), ParseError);
}

TEST(ProblemIo, EqualityBlockRoundTrip) {
  ConicQcqp p;
  p.Q = SymMatrix{{3, 0}, {0, 5}};
  p.H = SymMatrix::Identity(2);
  // B - H with B = diag(2, 1)
  p.eq_blocks.push_back(SymMatrix{{2, 0}, {0, 1}} - p.H);
  EXPECT_EQ(p.eq_blocks[0], (SymMatrix{{1, 0}, {0, 0}}));
  const ConicQcqp back = parse_problem(emit_problem(p));
  EXPECT_EQ(back.Q, p.Q);
  EXPECT_EQ(back.H, p.H);
  ASSERT_EQ(back.eq_blocks.size(), 1u);
  EXPECT_EQ(back.eq_blocks[0], p.eq_blocks[0]);
  EXPECT_TRUE(back.ineq_blocks.empty());
}

TEST(ProblemIo, EmitIsByteStable) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  ConicQcqp p;
  Matrix q(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i, j) = g(rng);
  p.Q = SymMatrix::Symmetrized(q);
  p.H = SymMatrix::Identity(3);
  p.ineq_blocks.push_back(SymMatrix::Symmetrized(q * q.transpose()) * -1.0);
  Matrix a(1, 3);
  a << 0.1, 0.2, 1.0 / 3.0;
  p = attach_face(p, a);
  p.meta["name"] = "stability";
  const std::string once = emit_problem(p);
  const ConicQcqp back = parse_problem(once);
  EXPECT_EQ(emit_problem(back), once);
  EXPECT_EQ(back.Q, p.Q);
  EXPECT_EQ(*back.face_rows, *p.face_rows);
  EXPECT_EQ(back.meta["name"], "stability");
}

TEST(ProblemIo, SlightAsymmetryIsSymmetrized) {
  const ConicQcqp p =
      parse_problem(R"({"n": 2, "Q": [[1, 0.5], [0.5000000000001, 1]], "H": [[1, 0], [0, 1]], "constraints": []})");
  EXPECT_EQ(p.Q(0, 1), p.Q(1, 0));
}

TEST(ProblemIo, FileRoundTripAndMissingFile) {
  ConicQcqp p = homogenize(ex43_scalar());
  const std::string path = ::testing::TempDir() + "/roundtrip.json";
  write_problem_file(path, p);
  const ConicQcqp back = read_problem_file(path);
  EXPECT_EQ(back.ineq_blocks[1], p.ineq_blocks[1]);
  ASSERT_TRUE(back.lift.has_value());
  EXPECT_EQ(back.lift->mode, LiftMode::kAffine);
  EXPECT_THROW(read_problem_file(path + ".missing"), Error);
}

}  // namespace
}  // namespace exactsdp
