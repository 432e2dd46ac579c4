#include "exactsdp/oracle.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <tuple>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "exactsdp/error.h"

namespace exactsdp {
namespace {

std::vector<int> first_primes(std::size_t count) {
  std::vector<int> primes;
  for (int c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (int q : primes) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

double radical_inverse(long long index, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

// The constraint set seen by the oracle. The face enters as ‖Ax‖² = 0.
struct Forms {
  const ConicQcqp& p;
  std::vector<const Matrix*> eq;
  std::vector<const Matrix*> ineq;
  Matrix face;

  explicit Forms(const ConicQcqp& problem) : p(problem) {
    for (const auto& b : p.eq_blocks) eq.push_back(&b.dense());
    for (const auto& b : p.ineq_blocks) ineq.push_back(&b.dense());
    if (auto f = p.face_block(); f) {
      face = f->dense();
      eq.push_back(&face);
    }
  }

  double violation(const Vector& x) const {
    double v = 0.0;
    for (const Matrix* m : eq) v = std::max(v, std::abs(x.dot(*m * x)));
    for (const Matrix* m : ineq) v = std::max(v, x.dot(*m * x));
    return v;
  }

  double violation_sum(const Vector& x) const {
    double v = 0.0;
    for (const Matrix* m : eq) v += std::abs(x.dot(*m * x));
    for (const Matrix* m : ineq) v += std::max(0.0, x.dot(*m * x));
    return v;
  }
};

// Penalized objective in y with x = y / sqrt(yᵀHy).
struct PenaltyProblem {
  const Forms* forms;
  double mu;
};

double penalty_value(const PenaltyProblem& pp, const Vector& y, Vector* grad) {
  const ConicQcqp& p = pp.forms->p;
  const Matrix& h = p.H.dense();
  const Vector hy = h * y;
  const double s2 = y.dot(hy);
  if (!(s2 > 1e-14)) {
    if (grad) grad->setZero(y.size());
    return 1e30;
  }
  const double s = std::sqrt(s2);
  const Vector x = y / s;
  const Vector qx = p.Q.dense() * x;
  double f = x.dot(qx);
  Vector gx = 2.0 * qx;
  for (const Matrix* m : pp.forms->eq) {
    const Vector mx = *m * x;
    const double e = x.dot(mx);
    f += pp.mu * e * e;
    gx += 4.0 * pp.mu * e * mx;
  }
  for (const Matrix* m : pp.forms->ineq) {
    const Vector mx = *m * x;
    const double g = x.dot(mx);
    if (g > 0) {
      f += pp.mu * g * g;
      gx += 4.0 * pp.mu * g * mx;
    }
  }
  if (grad) *grad = (gx - (h * x) * x.dot(gx)) / s;
  return f;
}

double gsl_f(const gsl_vector* v, void* params) {
  const auto* pp = static_cast<const PenaltyProblem*>(params);
  const Eigen::Map<const Vector> y(v->data, static_cast<Eigen::Index>(v->size));
  return penalty_value(*pp, y, nullptr);
}

void gsl_df(const gsl_vector* v, void* params, gsl_vector* df) {
  const auto* pp = static_cast<const PenaltyProblem*>(params);
  const Eigen::Map<const Vector> y(v->data, static_cast<Eigen::Index>(v->size));
  Vector g;
  penalty_value(*pp, y, &g);
  for (std::size_t i = 0; i < df->size; ++i) gsl_vector_set(df, i, g(static_cast<Eigen::Index>(i)));
}

void gsl_fdf(const gsl_vector* v, void* params, double* f, gsl_vector* df) {
  const auto* pp = static_cast<const PenaltyProblem*>(params);
  const Eigen::Map<const Vector> y(v->data, static_cast<Eigen::Index>(v->size));
  Vector g;
  *f = penalty_value(*pp, y, &g);
  for (std::size_t i = 0; i < df->size; ++i) gsl_vector_set(df, i, g(static_cast<Eigen::Index>(i)));
}

Vector bfgs(const PenaltyProblem& pp, const Vector& start) {
  const auto n = static_cast<std::size_t>(start.size());
  gsl_multimin_function_fdf fn;
  fn.n = n;
  fn.f = gsl_f;
  fn.df = gsl_df;
  fn.fdf = gsl_fdf;
  fn.params = const_cast<PenaltyProblem*>(&pp);
  gsl_vector* x0 = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x0, i, start(static_cast<Eigen::Index>(i)));
  gsl_multimin_fdfminimizer* m =
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);
  gsl_multimin_fdfminimizer_set(m, &fn, x0, 0.01 * start.norm(), 0.1);
  for (int it = 0; it < 500; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(m->gradient, 1e-12) == GSL_SUCCESS) break;
  }
  Vector out(start.size());
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = gsl_vector_get(m->x, i);
  gsl_multimin_fdfminimizer_free(m);
  gsl_vector_free(x0);
  return out;
}

// Gauss-Newton projection onto the normalizer, the equalities and the
// currently violated inequalities.
Vector project(const Forms& forms, Vector x) {
  const Matrix& h = forms.p.H.dense();
  for (int it = 0; it < 30; ++it) {
    std::vector<const Matrix*> rows{&h};
    std::vector<double> target{1.0};
    for (const Matrix* m : forms.eq) {
      rows.push_back(m);
      target.push_back(0.0);
    }
    for (const Matrix* m : forms.ineq) {
      if (x.dot(*m * x) > 0) {
        rows.push_back(m);
        target.push_back(0.0);
      }
    }
    const auto k = static_cast<Eigen::Index>(rows.size());
    Matrix j(k, x.size());
    Vector r(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Vector mx = *rows[static_cast<std::size_t>(i)] * x;
      j.row(i) = 2.0 * mx.transpose();
      r(i) = x.dot(mx) - target[static_cast<std::size_t>(i)];
    }
    if (r.cwiseAbs().maxCoeff() <= 1e-14) break;
    const Matrix jjt = j * j.transpose() + 1e-14 * Matrix::Identity(k, k);
    const Vector step = j.transpose() * jjt.ldlt().solve(r);
    if (!step.allFinite()) break;
    x -= step;
  }
  return x;
}

}  // namespace

OracleResult oracle_min(const ConicQcqp& p, long long budget, std::uint64_t seed,
                        const OracleOptions& options) {
  p.validate();
  if (budget < 1) throw InvalidArgument("oracle_min: budget must be at least 1");
  const auto n = static_cast<Eigen::Index>(p.n());
  const Forms forms(p);
  const Matrix& h = p.H.dense();
  const Matrix& q = p.Q.dense();
  const std::vector<int> primes = first_primes(static_cast<std::size_t>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  OracleResult out;
  out.best_x = Vector::Zero(n);
  // Max-heap on (merit, sample index): the worst kept start is on top.
  using Start = std::tuple<double, long long, Vector>;
  auto cmp = [](const Start& a, const Start& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  };
  std::priority_queue<Start, std::vector<Start>, decltype(cmp)> starts(cmp);

  Vector d(n);
  for (long long i = 0; i < budget; ++i) {
    if (i % 2 == 0) {
      for (Eigen::Index c = 0; c < n; ++c) {
        d(c) = 2.0 * radical_inverse(i / 2 + 1, primes[static_cast<std::size_t>(c)]) - 1.0;
      }
    } else {
      for (Eigen::Index c = 0; c < n; ++c) d(c) = normal(rng);
    }
    const double dn = d.norm();
    if (dn == 0.0) continue;
    d /= dn;
    const double hd = d.dot(h * d);
    if (hd <= 1e-10) continue;
    const Vector x = d / std::sqrt(hd);
    ++out.samples_evaluated;
    const double obj = x.dot(q * x);
    const double viol = forms.violation(x);
    if (viol <= options.feasibility_tol && obj < out.best_value) {
      out.found = true;
      out.best_value = obj;
      out.best_x = x;
    }
    const double merit = obj + 1e3 * forms.violation_sum(x);
    if (static_cast<int>(starts.size()) < options.refine_starts) {
      starts.emplace(merit, i, x);
    } else if (merit < std::get<0>(starts.top())) {
      starts.pop();
      starts.emplace(merit, i, x);
    }
  }

  std::vector<Vector> seeds;
  while (!starts.empty()) {
    seeds.push_back(std::get<2>(starts.top()));
    starts.pop();
  }
  std::reverse(seeds.begin(), seeds.end());
  if (out.found) seeds.insert(seeds.begin(), out.best_x);

  gsl_error_handler_t* old_handler = gsl_set_error_handler_off();
  for (const Vector& s : seeds) {
    Vector y = s;
    double mu = 10.0;
    for (int stage = 0; stage < options.penalty_stages; ++stage, mu *= 10.0) {
      y = bfgs(PenaltyProblem{&forms, mu}, y);
    }
    const double hy = y.dot(h * y);
    if (!(hy > 1e-14)) continue;
    Vector x = project(forms, y / std::sqrt(hy));
    const double hx = x.dot(h * x);
    if (!(hx > 0)) continue;
    x /= std::sqrt(hx);
    if (!x.allFinite() || forms.violation(x) > options.feasibility_tol) continue;
    const double obj = x.dot(q * x);
    if (obj < out.best_value) {
      out.found = true;
      out.best_value = obj;
      out.best_x = x;
      out.refined = true;
    }
  }
  gsl_set_error_handler(old_handler);
  return out;
}

OracleResult oracle_union(std::span<const ConicQcqp> problems, long long budget,
                          std::uint64_t seed, const OracleOptions& options) {
  if (problems.empty()) throw InvalidArgument("oracle_union: no branches");
  OracleResult best;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    OracleResult r = oracle_min(problems[i], budget, seed + i, options);
    best.samples_evaluated += r.samples_evaluated;
    if (r.found && r.best_value < best.best_value) {
      const long long total = best.samples_evaluated;
      best = std::move(r);
      best.samples_evaluated = total;
      best.branch = static_cast<int>(i);
    }
  }
  return best;
}

nlohmann::json oracle_to_json(const OracleResult& r) {
  nlohmann::json j;
  j["found"] = r.found;
  j["best_value"] = r.found ? nlohmann::json(r.best_value) : nlohmann::json(nullptr);
  j["best_x"] = std::vector<double>(r.best_x.data(), r.best_x.data() + r.best_x.size());
  j["samples_evaluated"] = r.samples_evaluated;
  j["refined"] = r.refined;
  if (r.branch >= 0) j["branch"] = r.branch;
  return j;
}

}  // namespace exactsdp
