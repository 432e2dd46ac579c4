#include <gtest/gtest.h>

#include "exactsdp/certificates.h"
#include "exactsdp/error.h"
#include "exactsdp/instances.h"
#include "exactsdp/problem_io.h"
#include "exactsdp/sdp.h"

namespace exactsdp {
namespace {

InstanceSpec spec(Family f, std::uint64_t seed = 0) {
  InstanceSpec s;
  s.family = f;
  s.seed = seed;
  return s;
}

TEST(Build, Ex44CanonicalThreeBlocks) {
  InstanceSpec s = spec(Family::kEx44);
  s.ell = 1;
  s.gamma = 0.8;
  const ConicQcqp p = build(s);
  ASSERT_EQ(p.ineq_blocks.size(), 3u);
  EXPECT_EQ(p.n(), 2u);
  // -1 <= u <= 1 (linear term 2·(1/2)·u) splits into two blocks; the third is (-1/γ, 0; 0, γ).
  EXPECT_EQ(p.ineq_blocks[0], (SymMatrix{{0, -0.5}, {-0.5, -1}}));
  EXPECT_EQ(p.ineq_blocks[1], (SymMatrix{{0, 0.5}, {0.5, -1}}));
  EXPECT_NEAR(p.ineq_blocks[2](0, 0), -1.25, 1e-15);
  EXPECT_NEAR(p.ineq_blocks[2](1, 1), 0.8, 1e-15);
  EXPECT_EQ(p.ineq_blocks[2](0, 1), 0.0);
  CertifyOptions o;
  o.pairwise_only = true;
  EXPECT_EQ(certify_exactness(p, o).verdict, Verdict::kExactByPairwisePSD);
}

TEST(Build, Ex44PairwiseMarginClosedForm) {
  // -(B1 + B3) = (1/γ, 1/2; 1/2, 1 - γ); its determinant vanishes at γ = 4/5.
  for (double gamma : {0.3, 0.5, 0.8, 0.81, 1.0, 1.5}) {
    InstanceSpec s = spec(Family::kEx44);
    s.gamma = gamma;
    const ConicQcqp p = build(s);
    const double a = 1 / gamma, c = 1 - gamma, b = 0.5;
    const double lmin = 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    EXPECT_NEAR(min_eig((p.ineq_blocks[0] + p.ineq_blocks[2]) * -1.0), lmin, 1e-12) << gamma;
    EXPECT_NEAR(min_eig((p.ineq_blocks[1] + p.ineq_blocks[2]) * -1.0), lmin, 1e-12) << gamma;
  }
}

TEST(Build, Ex44ThresholdFlips) {
  CertifyOptions o;
  o.pairwise_only = true;
  for (double gamma : {0.1, 0.5, 0.8}) {
    InstanceSpec s = spec(Family::kEx44);
    s.gamma = gamma;
    EXPECT_TRUE(certify_exactness(build(s), o).exact()) << gamma;
  }
  for (double gamma : {0.81, 1.0, 2.0}) {
    InstanceSpec s = spec(Family::kEx44);
    s.gamma = gamma;
    EXPECT_EQ(certify_exactness(build(s), o).verdict, Verdict::kConditionFails) << gamma;
  }
}

TEST(Build, Ex45PairsAreNegativeDefinite) {
  for (int n = 2; n <= 7; ++n) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      InstanceSpec s = spec(Family::kEx45, seed);
      s.n = n;
      const ConicQcqp p = build(s);
      ASSERT_EQ(p.ineq_blocks.size(), static_cast<std::size_t>(n));
      const double off = 1.0 / (2.0 * n);
      for (int k = 0; k < n; ++k) {
        const SymMatrix& b = p.ineq_blocks[k];
        for (int i = 0; i < n; ++i) {
          if (i == k) {
            EXPECT_GT(b(i, i), 0.0);
            EXPECT_LE(b(i, i), 1.0);
          } else {
            EXPECT_GE(b(i, i), -3.0);
            EXPECT_LE(b(i, i), -2.0);
          }
          for (int j = 0; j < i; ++j) EXPECT_LE(std::abs(b(i, j)), off);
        }
        for (int l = k + 1; l < n; ++l) {
          const SymMatrix neg = (p.ineq_blocks[k] + p.ineq_blocks[l]) * -1.0;
          EXPECT_TRUE(is_diag_dominant_psd(neg));
          EXPECT_TRUE(is_psd(neg, 1e-10));
        }
      }
    }
  }
}

TEST(Build, Ex45SeedSevenIsDiagonallyDominant) {
  InstanceSpec s = spec(Family::kEx45, 7);
  s.n = 3;
  const ConicQcqp p = build(s);
  for (int k = 0; k < 3; ++k)
    for (int l = k + 1; l < 3; ++l)
      EXPECT_TRUE(is_diag_dominant_psd((p.ineq_blocks[k] + p.ineq_blocks[l]) * -1.0));
  EXPECT_EQ(certify_exactness(p).verdict, Verdict::kExactByPairwisePSD);
  EXPECT_NEAR(p.Q.frobenius_norm(), 1.0, 1e-12);
  EXPECT_EQ(p.H, SymMatrix::Identity(3));
}

TEST(Build, Ex42CanonicalEqualityBlock) {
  const ConicQcqp p = build(spec(Family::kEx42));
  ASSERT_EQ(p.eq_blocks.size(), 1u);
  EXPECT_TRUE(p.ineq_blocks.empty());
  EXPECT_EQ(p.eq_blocks[0], (SymMatrix{{1, 0}, {0, 0}}));
  EXPECT_EQ(p.Q, (SymMatrix{{3, 0}, {0, 5}}));
  ASSERT_TRUE(built_spec(p).expected.has_value());
  EXPECT_EQ(*built_spec(p).expected, 5.0);
}

TEST(Build, Ex41Canonical) {
  const ConicQcqp p = build(spec(Family::kEx41));
  EXPECT_EQ(p.n(), 2u);
  EXPECT_EQ(p.ineq_blocks.size(), 1u);
  EXPECT_EQ(*built_spec(p).expected, -0.5);
}

TEST(Build, Ex46AddsFace) {
  InstanceSpec s = spec(Family::kEx46, 3);
  s.base = Family::kEx45;
  s.n = 4;
  s.face_rank = 2;
  const ConicQcqp p = build(s);
  ASSERT_TRUE(p.face_rows.has_value());
  EXPECT_EQ(p.face_rows->rows(), 2);
  EXPECT_EQ(p.face_rows->cols(), 4);
  EXPECT_TRUE(is_psd(*p.face_block(), 1e-12));
  ASSERT_EQ(p.ineq_blocks.size(), 4u);
  InstanceSpec b = s;
  b.family = Family::kEx45;
  EXPECT_EQ(p.ineq_blocks[2], build(b).ineq_blocks[2]);
}

TEST(Build, RandomFamiliesMeetTheirContract) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ConicQcqp c = build(spec(Family::kRandomCertified, seed));
    EXPECT_TRUE(certify_exactness(c).exact()) << seed;
    EXPECT_NEAR(c.Q.frobenius_norm(), 1.0, 1e-12);
    const ConicQcqp u = build(spec(Family::kRandomUncertified, seed));
    EXPECT_EQ(certify_exactness(u).verdict, Verdict::kConditionFails) << seed;
  }
}

TEST(Build, Deterministic) {
  const Family fams[] = {Family::kEx41, Family::kEx42, Family::kEx43, Family::kEx44, Family::kEx45,
                         Family::kEx46, Family::kRandomCertified, Family::kRandomUncertified};
  for (Family f : fams) {
    InstanceSpec s = spec(f, 21);
    s.canonical = false;
    const std::string a = emit_problem(build(s));
    EXPECT_EQ(a, emit_problem(build(s))) << to_string(f);
    s.seed = 22;
    EXPECT_NE(a, emit_problem(build(s))) << to_string(f);
  }
}

TEST(Build, InvalidParameters) {
  InstanceSpec s = spec(Family::kEx44);
  s.gamma = 0.0;
  EXPECT_THROW(build(s), InvalidArgument);
  s.gamma = -1.0;
  EXPECT_THROW(build(s), InvalidArgument);
  s = spec(Family::kEx45);
  s.n = 0;
  EXPECT_THROW(build(s), InvalidArgument);
  s = spec(Family::kEx46);
  s.base = Family::kEx46;
  EXPECT_THROW(build(s), InvalidArgument);
  s = spec(Family::kEx46);
  s.face_rank = 10;
  EXPECT_THROW(build(s), InvalidArgument);
  s = spec(Family::kRandomCertified);
  s.m = 0;
  EXPECT_THROW(build(s), InvalidArgument);
}

TEST(InstanceSpecJson, RoundTripThroughProblemFile) {
  InstanceSpec s = spec(Family::kEx44, 17);
  s.gamma = 0.65;
  s.ell = 2;
  s.canonical = false;
  const ConicQcqp p = build(s);
  const InstanceSpec back = built_spec(parse_problem(emit_problem(p)));
  EXPECT_EQ(back.family, Family::kEx44);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_EQ(back.gamma, 0.65);
  EXPECT_EQ(back.ell, 2);
  EXPECT_FALSE(back.canonical);
  EXPECT_EQ(emit_problem(build(back)), emit_problem(p));
  EXPECT_EQ(spec_to_json(spec_from_json(spec_to_json(s))), spec_to_json(s));
  ConicQcqp bare;
  EXPECT_THROW(built_spec(bare), InvalidArgument);
}

TEST(FamilyNames, ParseAndPrint) {
  EXPECT_EQ(family_from_string("ex45"), Family::kEx45);
  EXPECT_EQ(family_from_string("Ex45"), Family::kEx45);
  EXPECT_EQ(family_from_string("random-certified"), Family::kRandomCertified);
  EXPECT_EQ(family_from_string("RandomUncertified"), Family::kRandomUncertified);
  EXPECT_THROW(family_from_string("ex47"), InvalidArgument);
  const Family fams[] = {Family::kEx41, Family::kEx42, Family::kEx43, Family::kEx44, Family::kEx45,
                         Family::kEx46, Family::kRandomCertified, Family::kRandomUncertified};
  for (Family f : fams) EXPECT_EQ(family_from_string(to_string(f)), f);
}

TEST(Generators, UnionBranchesShareObjective) {
  const std::vector<ConicQcqp> u = make_union(5, 3, 4);
  ASSERT_EQ(u.size(), 3u);
  for (const ConicQcqp& b : u) {
    EXPECT_EQ(b.Q, u[0].Q);
    EXPECT_EQ(b.H, SymMatrix::Identity(4));
    EXPECT_TRUE(certify_exactness(b).exact());
  }
  EXPECT_THROW(make_union(5, 0, 4), InvalidArgument);
  EXPECT_THROW(make_union(5, 2, 1), InvalidArgument);
}

TEST(Generators, InfeasibleAndFeasibleFace) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_EQ(solve(make_infeasible(seed, 4)).status, SdpStatus::kPrimalInfeasible) << seed;
    const ConicQcqp f = make_feasible_face(seed, 4);
    ASSERT_TRUE(f.face_rows.has_value());
    EXPECT_TRUE(solve(f).optimal()) << seed;
  }
  EXPECT_THROW(make_infeasible(0, 1), InvalidArgument);
  EXPECT_THROW(make_feasible_face(0, 1), InvalidArgument);
}

}  // namespace
}  // namespace exactsdp
