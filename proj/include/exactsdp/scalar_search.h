#ifndef EXACTSDP_SCALAR_SEARCH_H_
#define EXACTSDP_SCALAR_SEARCH_H_

#include <functional>
#include <optional>

namespace exactsdp {

struct ConcaveSearchOptions {
  double center = 0.0;
  double radius = 1.0;      // initial half-width of the bracket
  int max_doublings = 20;   // bracket doublings before giving up
  std::optional<double> stop_at;  // return as soon as f >= stop_at
  double x_tol = 1e-10;     // relative bracket width at convergence
  int max_iterations = 400; // golden-section steps per bracket
};

struct ConcaveSearchResult {
  double arg = 0.0;
  double value = 0.0;
  int doublings = 0;
  bool interior = false;  // maximizer strictly inside the final bracket
  int evaluations = 0;
};

// Golden-section maximization of a concave function of one variable with
// symmetric bracket doubling while the maximizer sits on the bracket edge.
ConcaveSearchResult maximize_concave(const std::function<double(double)>& f,
                                     const ConcaveSearchOptions& options = {});

}  // namespace exactsdp

#endif  // EXACTSDP_SCALAR_SEARCH_H_
