#include "exactsdp/instances.h"

#include <algorithm>
#include <cctype>
#include <random>

#include "exactsdp/certificates.h"
#include "exactsdp/error.h"

namespace exactsdp {
namespace {

constexpr int kDrawCap = 1000;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  Vector gaussian(int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  SymMatrix gaussian_sym(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = normal();
    }
    return SymMatrix(m);
  }
  // Unit Frobenius norm.
  SymMatrix unit_sym(int n) {
    SymMatrix g = gaussian_sym(n);
    return g * (1.0 / g.frobenius_norm());
  }
  SymMatrix positive_definite(int n, double floor) {
    Matrix g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = normal();
    }
    return SymMatrix::Symmetrized(g * g.transpose() / n + floor * Matrix::Identity(n, n));
  }
  Matrix gaussian_matrix(int r, int c) {
    Matrix g(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) g(i, j) = normal();
    }
    return g;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("build: " + what);
}

// G shifted so that <B, P> = -delta·tr(P) for the projector P (P = I when
// absent); P / tr(P) then satisfies <B,X> < 0 for delta > 0.
SymMatrix shifted(const SymMatrix& g, double delta, const Matrix* projector = nullptr) {
  const auto n = static_cast<Eigen::Index>(g.n());
  const Matrix p = projector ? *projector : Matrix::Identity(n, n);
  const double tr = p.trace();
  const double shift = g.dense().cwiseProduct(p).sum() / tr + delta;
  return g - SymMatrix::Identity(g.n()) * shift;
}

ConicQcqp ex41(const InstanceSpec& s, Rng& rng, std::optional<double>& expected) {
  InhomQcqp q;
  SymMatrix q0, q1, q2;
  if (s.canonical) {
    require(s.ell == 1, "canonical Ex41 has ell = 1");
    q0 = SymMatrix{{-1}};
    q1 = SymMatrix{{1}};
    q2 = SymMatrix{{2}};
    expected = -0.5;
  } else {
    q0 = rng.gaussian_sym(s.ell);
    q1 = rng.gaussian_sym(s.ell);
    q2 = rng.positive_definite(s.ell, 0.5);
  }
  q.Q0 = q0;
  q.b0 = Vector::Zero(s.ell);
  q.mode = LiftMode::kSlack;
  q.constraints.push_back({q1, Vector::Zero(s.ell), -1.0, Sense::kLessEqual, 0, 0});
  q.constraints.push_back({q2, Vector::Zero(s.ell), -1.0, Sense::kLessEqual, 0, 0});
  q.normalizer = 1;
  return homogenize(q);
}

ConicQcqp ex42(const InstanceSpec& s, Rng& rng, std::optional<double>& expected) {
  ConicQcqp p;
  SymMatrix b;
  if (s.canonical) {
    p.Q = SymMatrix{{3, 0}, {0, 5}};
    p.H = SymMatrix::Identity(2);
    b = SymMatrix{{2, 0}, {0, 1}};
    expected = 5.0;
  } else {
    p.Q = rng.unit_sym(s.n);
    p.H = SymMatrix::Identity(static_cast<std::size_t>(s.n));
    b = p.H + shifted(rng.gaussian_sym(s.n), 0.0);
  }
  p.eq_blocks.push_back(b - p.H);
  return p;
}

// -1 <= q1(u) <= 1, optionally with ‖u‖²/γ >= γ.
ConicQcqp stern(const InstanceSpec& s, Rng& rng, bool ball) {
  const int l = s.ell;
  InhomQcqp q;
  QuadConstraint c1;
  if (ball && s.canonical) {
    q.Q0 = l == 1 ? rng.gaussian_sym(1) : rng.positive_definite(l, 0.1);
    c1.Q = SymMatrix::Zero(static_cast<std::size_t>(l));
    c1.b = Vector::Zero(l);
    c1.b(l - 1) = 0.5;
  } else {
    q.Q0 = rng.gaussian_sym(l);
    c1.Q = rng.positive_definite(l, 0.2);
    c1.b = 0.5 * rng.gaussian(l);
  }
  q.b0 = rng.gaussian(l);
  c1.sense = Sense::kRange;
  c1.lo = -1.0;
  c1.hi = 1.0;
  q.constraints.push_back(c1);
  if (ball) {
    QuadConstraint c3;
    c3.Q = SymMatrix::Identity(static_cast<std::size_t>(l)) * (-1.0 / s.gamma);
    c3.b = Vector::Zero(l);
    c3.c = s.gamma;
    q.constraints.push_back(c3);
  }
  q.mode = LiftMode::kAffine;
  return homogenize(q);
}

ConicQcqp ex45(const InstanceSpec& s, Rng& rng) {
  const int n = s.n;
  ConicQcqp p;
  p.Q = rng.unit_sym(n);
  p.H = SymMatrix::Identity(static_cast<std::size_t>(n));
  const double off = 1.0 / (2.0 * n);
  for (int k = 0; k < n; ++k) {
    Matrix b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) b(i, j) = b(j, i) = rng.uniform(-off, off);
      b(i, i) = i == k ? 1.0 - rng.uniform(0.0, 1.0) : rng.uniform(-3.0, -2.0);
    }
    p.ineq_blocks.emplace_back(b);
  }
  return p;
}

ConicQcqp random_family(const InstanceSpec& s, Rng& rng, bool certified) {
  require(s.m >= 1, "random families need m >= 1");
  CertifyOptions opts;
  for (int draw = 0; draw < kDrawCap; ++draw) {
    ConicQcqp p;
    p.Q = rng.unit_sym(s.n);
    p.H = SymMatrix::Identity(static_cast<std::size_t>(s.n));
    for (int k = 0; k < s.m; ++k) {
      const double delta = certified ? rng.uniform(0.2, 1.0) : rng.uniform(0.0, 0.05);
      p.ineq_blocks.push_back(shifted(rng.unit_sym(s.n), delta));
    }
    const Certificate c = certify_exactness(p, opts);
    if (certified ? c.exact() : c.verdict == Verdict::kConditionFails) {
      p.meta["draws"] = draw + 1;
      return p;
    }
  }
  throw Error("build: draw cap of " + std::to_string(kDrawCap) + " exceeded for " +
              to_string(s.family));
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::kEx41: return "Ex41";
    case Family::kEx42: return "Ex42";
    case Family::kEx43: return "Ex43";
    case Family::kEx44: return "Ex44";
    case Family::kEx45: return "Ex45";
    case Family::kEx46: return "Ex46";
    case Family::kRandomCertified: return "RandomCertified";
    case Family::kRandomUncertified: return "RandomUncertified";
  }
  return "Unknown";
}

Family family_from_string(const std::string& s) {
  std::string k;
  for (char c : s) {
    if (c != '-' && c != '_') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (k == "ex41") return Family::kEx41;
  if (k == "ex42") return Family::kEx42;
  if (k == "ex43") return Family::kEx43;
  if (k == "ex44") return Family::kEx44;
  if (k == "ex45") return Family::kEx45;
  if (k == "ex46") return Family::kEx46;
  if (k == "randomcertified") return Family::kRandomCertified;
  if (k == "randomuncertified") return Family::kRandomUncertified;
  throw InvalidArgument("unknown instance family '" + s + "'");
}

ConicQcqp build(const InstanceSpec& spec) {
  InstanceSpec s = spec;
  require(s.n >= 1, "n must be positive");
  require(s.ell >= 1, "ell must be positive");
  Rng rng(s.seed);
  std::optional<double> expected;
  ConicQcqp p;
  switch (s.family) {
    case Family::kEx41: p = ex41(s, rng, expected); break;
    case Family::kEx42: p = ex42(s, rng, expected); break;
    case Family::kEx43: p = stern(s, rng, false); break;
    case Family::kEx44:
      require(s.gamma > 0, "gamma must be positive");
      p = stern(s, rng, true);
      break;
    case Family::kEx45: p = ex45(s, rng); break;
    case Family::kEx46: {
      require(s.base != Family::kEx46, "Ex46 needs a different base family");
      InstanceSpec b = s;
      b.family = s.base;
      p = build(b);
      expected.reset();
      require(s.face_rank >= 1 && static_cast<std::size_t>(s.face_rank) < p.n(),
              "face rank must lie in [1, n)");
      p = attach_face(p, rng.gaussian_matrix(s.face_rank, static_cast<int>(p.n())));
      break;
    }
    case Family::kRandomCertified: p = random_family(s, rng, true); break;
    case Family::kRandomUncertified: p = random_family(s, rng, false); break;
  }
  s.expected = expected;
  if (s.family == Family::kEx42 && s.canonical) s.n = 2;
  p.meta["instance"] = spec_to_json(s);
  p.validate();
  return p;
}

InstanceSpec built_spec(const ConicQcqp& p) {
  if (!p.meta.contains("instance")) throw InvalidArgument("problem has no instance metadata");
  return spec_from_json(p.meta["instance"]);
}

nlohmann::json spec_to_json(const InstanceSpec& s) {
  nlohmann::json j;
  j["family"] = to_string(s.family);
  j["seed"] = s.seed;
  j["canonical"] = s.canonical;
  switch (s.family) {
    case Family::kEx41:
    case Family::kEx43: j["ell"] = s.ell; break;
    case Family::kEx44:
      j["ell"] = s.ell;
      j["gamma"] = s.gamma;
      break;
    case Family::kEx42:
    case Family::kEx45: j["n"] = s.n; break;
    case Family::kEx46:
      j["n"] = s.n;
      j["ell"] = s.ell;
      j["gamma"] = s.gamma;
      j["base"] = to_string(s.base);
      j["face_rank"] = s.face_rank;
      break;
    case Family::kRandomCertified:
    case Family::kRandomUncertified:
      j["n"] = s.n;
      j["m"] = s.m;
      break;
  }
  j["expected"] = s.expected ? nlohmann::json(*s.expected) : nlohmann::json(nullptr);
  return j;
}

InstanceSpec spec_from_json(const nlohmann::json& j) {
  InstanceSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  s.canonical = j.value("canonical", true);
  s.n = j.value("n", s.n);
  s.ell = j.value("ell", s.ell);
  s.m = j.value("m", s.m);
  s.gamma = j.value("gamma", s.gamma);
  s.face_rank = j.value("face_rank", s.face_rank);
  if (j.contains("base")) s.base = family_from_string(j["base"].get<std::string>());
  if (j.contains("expected") && !j["expected"].is_null()) s.expected = j["expected"].get<double>();
  return s;
}

std::vector<ConicQcqp> make_union(std::uint64_t seed, int branches, int n) {
  if (branches < 1 || n < 2) throw InvalidArgument("make_union: need branches >= 1, n >= 2");
  Rng rng(seed);
  ConicQcqp base;
  base.Q = rng.unit_sym(n);
  base.H = SymMatrix::Identity(static_cast<std::size_t>(n));
  std::vector<ConicQcqp> out;
  for (int b = 0; b < branches; ++b) {
    ConicQcqp p = base;
    switch (b % 3) {
      case 0: p.ineq_blocks.push_back(shifted(rng.unit_sym(n), rng.uniform(0.05, 0.5))); break;
      case 1: p.eq_blocks.push_back(shifted(rng.unit_sym(n), 0.0)); break;
      default: {
        InstanceSpec s;
        s.n = n;
        s.seed = seed * 7919 + static_cast<std::uint64_t>(b);
        ConicQcqp e = build(s);
        p.ineq_blocks = e.ineq_blocks;
        break;
      }
    }
    p.meta["union_branch"] = b;
    out.push_back(std::move(p));
  }
  return out;
}

ConicQcqp make_infeasible(std::uint64_t seed, int n) {
  if (n < 2) throw InvalidArgument("make_infeasible: n >= 2");
  Rng rng(seed);
  ConicQcqp p;
  p.Q = rng.unit_sym(n);
  p.H = SymMatrix::Identity(static_cast<std::size_t>(n));
  p.ineq_blocks.push_back(shifted(rng.unit_sym(n), 0.3));
  if (seed % 2 == 0) {
    p.eq_blocks.push_back(rng.positive_definite(n, 0.1));
  } else {
    p.face_rows = rng.gaussian_matrix(n, n) + 0.5 * Matrix::Identity(n, n);
  }
  p.meta["constructed"] = "infeasible";
  return p;
}

ConicQcqp make_feasible_face(std::uint64_t seed, int n) {
  if (n < 2) throw InvalidArgument("make_feasible_face: n >= 2");
  Rng rng(seed);
  ConicQcqp p;
  p.Q = rng.unit_sym(n);
  p.H = SymMatrix::Identity(static_cast<std::size_t>(n));
  const int r = 1 + static_cast<int>(seed % static_cast<std::uint64_t>(n - 1));
  const Matrix a = rng.gaussian_matrix(r, n);
  const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  const Matrix null_proj = Matrix::Identity(n, n) - cod.pseudoInverse() * a;
  p.ineq_blocks.push_back(shifted(rng.unit_sym(n), 0.2, &null_proj));
  p.face_rows = a;
  p.meta["constructed"] = "feasible";
  return p;
}

}  // namespace exactsdp
