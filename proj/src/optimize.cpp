#include "reqconflict/optimize.hpp"

#include <cmath>
#include <deque>

namespace reqconflict::optimize {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

void pseudo_gradient(std::span<const double> x, std::span<const double> g, double l1, std::span<double> pg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (l1 == 0.0) {
      pg[i] = g[i];
    } else if (x[i] > 0.0) {
      pg[i] = g[i] + l1;
    } else if (x[i] < 0.0) {
      pg[i] = g[i] - l1;
    } else if (g[i] + l1 < 0.0) {
      pg[i] = g[i] + l1;
    } else if (g[i] - l1 > 0.0) {
      pg[i] = g[i] - l1;
    } else {
      pg[i] = 0.0;
    }
  }
}

struct Pair {
  std::vector<double> s, y;
  double rho = 0.0;
};

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Converged:
      return "converged";
    case Status::Stalled:
      return "stalled";
    case Status::MaxIterations:
      return "max-iterations";
    case Status::LineSearchFailed:
      return "line-search-failed";
  }
  return "unknown";
}

Result minimize(const ObjectiveFn& f, std::vector<double> x, const Options& opt) {
  const std::size_t n = x.size();
  const double l1 = opt.l1;
  std::vector<double> g(n), pg(n), d(n), xn(n), gn(n), q(n);
  std::deque<Pair> memory;

  Result res;
  double fx = f(x, g) + l1 * l1_norm(x);
  pseudo_gradient(x, g, l1, pg);
  res.trace.push_back(fx);

  auto converged = [&] {
    double xnorm = std::sqrt(dot(x, x));
    return std::sqrt(dot(pg, pg)) / std::max(1.0, xnorm) <= opt.epsilon;
  };

  if (converged()) {
    res.status = Status::Converged;
  } else {
    for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
    double step = 1.0 / std::sqrt(dot(d, d));
    res.status = Status::MaxIterations;

    while (res.iterations < opt.max_iterations) {
      if (l1 > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
          if (d[i] * pg[i] >= 0.0) d[i] = 0.0;
        }
      }
      if (dot(pg, d) >= 0.0) {  // lost descent: restart from steepest descent
        memory.clear();
        for (std::size_t i = 0; i < n; ++i) d[i] = -pg[i];
        step = 1.0 / std::sqrt(dot(d, d));
      }

      bool accepted = false;
      double fn = 0.0;
      for (std::size_t ls = 0; ls < opt.max_linesearch; ++ls) {
        for (std::size_t i = 0; i < n; ++i) {
          xn[i] = x[i] + step * d[i];
          if (l1 > 0.0) {
            double orthant = x[i] != 0.0 ? x[i] : -pg[i];
            if (xn[i] * orthant <= 0.0) xn[i] = 0.0;
          }
        }
        fn = f(xn, gn) + l1 * l1_norm(xn);
        double decrease = 0.0;
        for (std::size_t i = 0; i < n; ++i) decrease += pg[i] * (xn[i] - x[i]);
        if (fn <= fx + opt.armijo * decrease && fn <= fx) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        res.status = Status::LineSearchFailed;
        break;
      }

      Pair pair;
      pair.s.resize(n);
      pair.y.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        pair.s[i] = xn[i] - x[i];
        pair.y[i] = gn[i] - g[i];
      }
      x.swap(xn);
      g.swap(gn);
      fx = fn;
      pseudo_gradient(x, g, l1, pg);
      ++res.iterations;
      res.trace.push_back(fx);

      if (converged()) {
        res.status = Status::Converged;
        break;
      }
      if (res.iterations >= opt.past && opt.past > 0) {
        double before = res.trace[res.trace.size() - 1 - opt.past];
        if ((before - fx) / std::max(std::abs(fx), 1e-12) < opt.delta) {
          res.status = Status::Stalled;
          break;
        }
      }

      double ys = dot(pair.y, pair.s);
      if (ys > 1e-10) {
        pair.rho = 1.0 / ys;
        memory.push_back(std::move(pair));
        if (memory.size() > opt.history) memory.pop_front();
      }

      // Two-loop recursion on the pseudo-gradient.
      for (std::size_t i = 0; i < n; ++i) q[i] = -pg[i];
      std::vector<double> alpha(memory.size());
      for (std::size_t m = memory.size(); m-- > 0;) {
        alpha[m] = memory[m].rho * dot(memory[m].s, q);
        for (std::size_t i = 0; i < n; ++i) q[i] -= alpha[m] * memory[m].y[i];
      }
      if (!memory.empty()) {
        const auto& last = memory.back();
        double gamma = dot(last.s, last.y) / std::max(dot(last.y, last.y), 1e-300);
        for (auto& v : q) v *= gamma;
      } else {
        double gamma = 1.0 / std::sqrt(dot(pg, pg));
        for (auto& v : q) v *= gamma;
      }
      for (std::size_t m = 0; m < memory.size(); ++m) {
        double beta = memory[m].rho * dot(memory[m].y, q);
        for (std::size_t i = 0; i < n; ++i) q[i] += (alpha[m] - beta) * memory[m].s[i];
      }
      d = q;
      step = 1.0;
    }
  }

  res.objective = fx;
  res.x = std::move(x);
  return res;
}

}  // namespace reqconflict::optimize
