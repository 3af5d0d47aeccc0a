#include <doctest.h>

#include <cmath>

#include "reqconflict/optimize.hpp"

using namespace reqconflict;

TEST_SUITE("optimize") {

TEST_CASE("smooth quadratic converges to its minimum") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    double v = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double c = static_cast<double>(i + 1);
      v += c * (x[i] - c) * (x[i] - c);
      g[i] = 2 * c * (x[i] - c);
    }
    return v;
  };
  auto r = optimize::minimize(f, std::vector<double>(5, 0.0));
  CHECK(r.status == optimize::Status::Converged);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.x[i] == doctest::Approx(static_cast<double>(i + 1)).epsilon(1e-4));
}

TEST_CASE("Rosenbrock") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  optimize::Options opts;
  opts.max_iterations = 500;
  opts.epsilon = 1e-8;
  auto r = optimize::minimize(f, {-1.2, 1.0}, opts);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("L1 term soft-thresholds a separable quadratic") {
  // argmin 0.5 (x - a)^2 + l1 |x| = sign(a) max(|a| - l1, 0)
  auto f = [](std::span<const double> x, std::span<double> g) {
    const double a[] = {3.0, -2.0, 0.4};
    double v = 0;
    for (std::size_t i = 0; i < 3; ++i) {
      v += 0.5 * (x[i] - a[i]) * (x[i] - a[i]);
      g[i] = x[i] - a[i];
    }
    return v;
  };
  optimize::Options opts;
  opts.l1 = 1.0;
  auto r = optimize::minimize(f, {0.0, 0.0, 0.0}, opts);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.x[2] == 0.0);
  CHECK(r.objective == doctest::Approx(0.5 + 0.5 + 0.08 + 3.0).epsilon(1e-6));
}

TEST_CASE("objective trace never increases") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    double v = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      v += std::cosh(x[i] - 0.3 * static_cast<double>(i));
      g[i] = std::sinh(x[i] - 0.3 * static_cast<double>(i));
    }
    return v;
  };
  optimize::Options opts;
  opts.l1 = 0.2;
  auto r = optimize::minimize(f, std::vector<double>(6, 2.0), opts);
  REQUIRE(r.trace.size() == r.iterations + 1);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
}

TEST_CASE("iteration cap is honoured") {
  auto f = [](std::span<const double> x, std::span<double> g) {
    double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  optimize::Options opts;
  opts.max_iterations = 3;
  auto r = optimize::minimize(f, {-1.2, 1.0}, opts);
  CHECK(r.iterations <= 3);
  CHECK(r.status == optimize::Status::MaxIterations);
}

}
