#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "rfis/numerics.hpp"

// Reference values computed by direct quadrature, independent of the library.
namespace oracle {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Midpoint rule over one period; exact for trigonometric polynomials of low degree.
inline double phase_mean(const std::function<double(double)>& f, int n = 720) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f((i + 0.5) * kTwoPi / n);
  return s / n;
}

// E[exp(-(x1 - x2)^2)] for independent standard normals, by 2-d Simpson quadrature.
inline double gaussian_pair_k_squared() {
  return simpson(
      [](double x1) {
        return normal_pdf(x1) *
               simpson([x1](double x2) { return normal_pdf(x2) * std::exp(-(x1 - x2) * (x1 - x2)); }, -9, 9, 600);
      },
      -9, 9, 600);
}

// Mean of exp(-(xi - xj)^2 / s^2) over all ordered pairs of a 1-d sample.
inline double sample_pair_k_squared(const std::vector<double>& a, const std::vector<double>& b, double s = 1.0) {
  long double acc = 0.0L;
  for (double x : a)
    for (double y : b) acc += std::exp(-(x - y) * (x - y) / (s * s));
  return static_cast<double>(acc / (static_cast<long double>(a.size()) * b.size()));
}

inline std::vector<double> column(const rfis::Dataset& d) {
  return {d.values().begin(), d.values().end()};
}

}  // namespace oracle
