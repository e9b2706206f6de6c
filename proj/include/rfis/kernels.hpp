#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfis/numerics.hpp"

namespace rfis {

enum class KernelKind { gaussian, exponential };

std::string_view to_string(KernelKind kind) noexcept;
KernelKind parse_kernel_kind(std::string_view name);

/// gaussian:    K(x1, x2) = exp(-|x1 - x2|^2 / (2 scale^2))
/// exponential: K(x1, x2) = exp(x1 . x2 / scale^2)
class KernelSpec {
 public:
  explicit KernelSpec(KernelKind kind, double scale = 1.0);

  KernelKind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  KernelKind kind_;
  double scale_;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x1, std::span<const double> x2);

/// Dense row-major matrix; used for Gram matrices only.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

Matrix gram(const KernelSpec& spec, const Dataset& a, const Dataset& b);

inline constexpr std::size_t kPsdCheckMaxPoints = 64;

/// Smallest eigenvalue of gram(spec, a, a), by cyclic Jacobi rotation.
double psd_check(const KernelSpec& spec, const Dataset& a);

/// Eigenvalues of a small symmetric matrix, ascending.
std::vector<double> symmetric_eigenvalues(Matrix m);

}  // namespace rfis
