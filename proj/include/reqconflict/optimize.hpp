#pragma once

#include <functional>
#include <span>
#include <vector>

namespace reqconflict::optimize {

/// Returns f(x) and writes its gradient into `grad`. Must be smooth; an L1
/// term is supplied separately through Options::l1.
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct Options {
  std::size_t max_iterations = 100;
  std::size_t history = 6;  // curvature pairs kept
  double l1 = 0.0;          // coefficient of |x|_1, handled orthant-wise
  double epsilon = 1e-5;    // |pseudo-gradient| / max(1, |x|)
  std::size_t past = 10;    // window for the relative-decrease test
  double delta = 1e-5;
  std::size_t max_linesearch = 40;
  double armijo = 1e-4;
};

enum class Status { Converged, Stalled, MaxIterations, LineSearchFailed };

struct Result {
  std::vector<double> x;
  double objective = 0.0;       // f(x) + l1 |x|_1
  std::size_t iterations = 0;   // accepted steps
  Status status = Status::MaxIterations;
  std::vector<double> trace;    // objective at x0 and after every accepted step
};

/// Limited-memory quasi-Newton minimisation. With l1 > 0 this is OWL-QN:
/// steps use the pseudo-gradient, directions are sign-constrained against
/// it, and each trial point is projected back onto the current orthant.
Result minimize(const ObjectiveFn& f, std::vector<double> x0, const Options& options = {});

const char* to_string(Status s);

}  // namespace reqconflict::optimize
