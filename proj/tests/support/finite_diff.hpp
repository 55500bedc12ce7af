#pragma once

#include <functional>
#include <vector>

namespace testsupport {

// Independent finite-difference oracles. They only see black-box callables,
// never the tape internals they are used to check.

inline double central_first(const std::function<double(double)>& f, double x,
                            double h = 1e-4) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central_second(const std::function<double(double)>& f, double x,
                             double h = 1e-4) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline std::vector<double> grad_central(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f(x);
    x[i] = keep - h;
    const double fm = f(x);
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double rel_err(double got, double want, double floor = 1e-12) {
  const double denom = std::max(std::abs(want), floor);
  return std::abs(got - want) / denom;
}

}  // namespace testsupport
