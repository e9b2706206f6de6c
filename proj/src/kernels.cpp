#include "rfis/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace rfis {

std::string_view to_string(KernelKind kind) noexcept {
  return kind == KernelKind::gaussian ? "gaussian" : "exponential";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "gaussian") return KernelKind::gaussian;
  if (name == "exponential") return KernelKind::exponential;
  fail(ErrorCode::config, "unknown kernel kind '" + std::string(name) + "' (expected gaussian or exponential)");
}

KernelSpec::KernelSpec(KernelKind kind, double scale) : kind_(kind), scale_(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::invalid_argument, "kernel scale must be positive and finite");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size())
    fail(ErrorCode::invalid_dimension, "kernel arguments have dimensions " + std::to_string(x1.size()) + " and " +
                                           std::to_string(x2.size()));
  const double s2 = spec.scale() * spec.scale();
  if (spec.kind() == KernelKind::gaussian) return std::exp(-squared_distance(x1, x2) / (2.0 * s2));
  // Symmetric by construction: dot() is a plain ascending sum of commutative products.
  return std::exp(dot(x1, x2) / s2);
}

Matrix gram(const KernelSpec& spec, const Dataset& a, const Dataset& b) {
  if (a.dim() != b.dim()) fail(ErrorCode::invalid_dimension, "gram: datasets differ in dimension");
  Matrix m{a.size(), b.size(), std::vector<double>(a.size() * b.size())};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = kernel_eval(spec, a.point(i), b.point(j));
  return m;
}

std::vector<double> symmetric_eigenvalues(Matrix m) {
  const std::size_t n = m.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = m(k, p), akq = m(k, q);
          m(k, p) = c * akp - s * akq;
          m(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = m(p, k), aqk = m(q, k);
          m(p, k) = c * apk - s * aqk;
          m(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = m(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double psd_check(const KernelSpec& spec, const Dataset& a) {
  if (a.size() > kPsdCheckMaxPoints)
    fail(ErrorCode::invalid_argument, "psd_check is limited to " + std::to_string(kPsdCheckMaxPoints) + " points, got " +
                                          std::to_string(a.size()));
  return symmetric_eigenvalues(gram(spec, a, a)).front();
}

}  // namespace rfis
