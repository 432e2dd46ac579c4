#include "exactsdp/scalar_search.h"

#include <cmath>

#include "exactsdp/error.h"

namespace exactsdp {

ConcaveSearchResult maximize_concave(const std::function<double(double)>& f,
                                     const ConcaveSearchOptions& options) {
  if (!(options.radius > 0)) {
    throw InvalidArgument("maximize_concave: radius must be positive");
  }
  constexpr double kInvPhi = 0.6180339887498949;
  ConcaveSearchResult best;
  best.value = -INFINITY;
  int evaluations = 0;
  auto eval = [&](double x) {
    ++evaluations;
    const double v = f(x);
    if (v > best.value) {
      best.value = v;
      best.arg = x;
    }
    return v;
  };
  const bool can_stop = options.stop_at.has_value();

  double radius = options.radius;
  for (int k = 0; k <= options.max_doublings; ++k) {
    const double lo = options.center - radius;
    const double hi = options.center + radius;
    double a = lo;
    double b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    for (int it = 0; it < options.max_iterations; ++it) {
      if (b - a <= options.x_tol * (1.0 + std::abs(0.5 * (a + b)))) break;
      if (can_stop && best.value >= *options.stop_at) break;
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = eval(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = eval(x1);
      }
    }
    const double x = 0.5 * (a + b);
    eval(x);
    best.doublings = k;
    if (can_stop && best.value >= *options.stop_at) break;
    const double edge = 1e-3 * (hi - lo);
    if (x - lo > edge && hi - x > edge) {
      best.interior = true;
      break;
    }
    radius *= 2.0;
  }
  best.evaluations = evaluations;
  return best;
}

}  // namespace exactsdp
