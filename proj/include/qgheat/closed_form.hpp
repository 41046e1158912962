#pragma once

#include <cmath>
#include <numbers>

#include "qgheat/errors.hpp"

namespace qgheat {

inline constexpr double kInvSqrt4Pi = 0.28209479177387814;  // (4*pi)^{-1/2}

/// Free-line Gaussian kernel (4 pi t)^{-1/2} exp(-u^2 / (4t)).
inline double gauss_kernel(double t, double u) {
  return std::exp(-u * u / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

/// Closed-form 1-D heat kernels: free line, Neumann interval (0, a),
/// Dirichlet interval (-a, a). Small t uses the method of images with the
/// reflection sum truncated below 1e-16 relative; large t uses the
/// eigenfunction series. Crossover at t = a^2 / pi (equal work on both sides).
class ClosedFormKernel {
 public:
  enum class Variant { free_line, neumann_interval, dirichlet_interval };

  static ClosedFormKernel free_line() { return ClosedFormKernel(Variant::free_line, 0.0); }
  static ClosedFormKernel neumann(double length) {
    if (!(length > 0.0)) throw ValidationError("interval length must be positive");
    return ClosedFormKernel(Variant::neumann_interval, length);
  }
  static ClosedFormKernel dirichlet(double half_width) {
    if (!(half_width > 0.0)) throw ValidationError("half-width must be positive");
    return ClosedFormKernel(Variant::dirichlet_interval, half_width);
  }

  Variant variant() const { return variant_; }
  double a() const { return a_; }
  double crossover_t() const { return a_ * a_ / std::numbers::pi; }

  double eval(double t, double x, double y) const {
    if (!(t > 0.0)) throw ValidationError("kernel time must be positive");
    check_domain(x);
    check_domain(y);
    if (variant_ == Variant::free_line) return gauss_kernel(t, x - y);
    return (t < crossover_t()) ? eval_images(t, x, y) : eval_series(t, x, y);
  }

  /// Image (Poisson-summation) form; accurate for small t.
  double eval_images(double t, double x, double y) const {
    check_domain(x);
    check_domain(y);
    switch (variant_) {
      case Variant::free_line:
        return gauss_kernel(t, x - y);
      case Variant::neumann_interval: {
        // period 2a; even reflections, all positive
        const int N = image_count(t, 2.0 * a_);
        double sum = 0.0;
        for (int n = -N; n <= N; ++n)
          sum += gauss_kernel(t, x - y + 2.0 * n * a_) + gauss_kernel(t, x + y + 2.0 * n * a_);
        return sum;
      }
      case Variant::dirichlet_interval: {
        // period 4a on (-a, a); odd reflections alternate in sign
        const int N = image_count(t, 4.0 * a_);
        double sum = 0.0;
        for (int n = -N; n <= N; ++n)
          sum += gauss_kernel(t, x - y + 4.0 * n * a_) - gauss_kernel(t, x + y + 2.0 * a_ + 4.0 * n * a_);
        return sum;
      }
    }
    return 0.0;
  }

  /// Eigenfunction series; accurate for large t.
  double eval_series(double t, double x, double y) const {
    check_domain(x);
    check_domain(y);
    const double pi = std::numbers::pi;
    switch (variant_) {
      case Variant::free_line:
        return gauss_kernel(t, x - y);
      case Variant::neumann_interval: {
        double sum = 1.0 / a_;
        for (int k = 1;; ++k) {
          const double w = std::exp(-pi * pi * k * k * t / (a_ * a_));
          if (2.0 / a_ * w < 1e-18) break;
          sum += 2.0 / a_ * w * std::cos(pi * k * x / a_) * std::cos(pi * k * y / a_);
        }
        return sum;
      }
      case Variant::dirichlet_interval: {
        const double L = 2.0 * a_;
        double sum = 0.0;
        for (int k = 1;; ++k) {
          const double w = std::exp(-pi * pi * k * k * t / (L * L));
          if (2.0 / L * w < 1e-18 && k > 1) break;
          sum += 2.0 / L * w * std::sin(pi * k * (x + a_) / L) * std::sin(pi * k * (y + a_) / L);
        }
        return sum;
      }
    }
    return 0.0;
  }

 private:
  ClosedFormKernel(Variant v, double a) : variant_(v), a_(a) {}

  void check_domain(double x) const {
    switch (variant_) {
      case Variant::free_line:
        return;
      case Variant::neumann_interval:
        if (!(x >= 0.0 && x <= a_)) throw ValidationError("point outside [0, a]");
        return;
      case Variant::dirichlet_interval:
        if (!(x >= -a_ && x <= a_)) throw ValidationError("point outside [-a, a]");
        return;
    }
  }

  /// Reflections needed so the farthest Gaussian tail is below 1e-16 of the
  /// on-diagonal scale: |u| > sqrt(4 t log(1e18)) plus one period of margin.
  static int image_count(double t, double period) {
    const double cutoff = std::sqrt(4.0 * t * 42.0) + 2.0 * period;
    return std::max(1, static_cast<int>(std::ceil(cutoff / period)));
  }

  Variant variant_;
  double a_;
};

/// Heat content of the Dirichlet interval from its centre:
/// integral over (-a, a) of K_a(t, 0, x) dx, term-wise via erf.
inline double heat_content_dirichlet(double a, double t) {
  if (!(a > 0.0) || !(t > 0.0)) throw ValidationError("a and t must be positive");
  const double s = 2.0 * std::sqrt(t);
  auto segment = [&](double c) {  // integral over (-a,a) of gauss_kernel(t, x + c)
    return 0.5 * (std::erf((a + c) / s) - std::erf((-a + c) / s));
  };
  const double cutoff = std::sqrt(4.0 * t * 42.0) + a;
  const int N = std::max(1, static_cast<int>(std::ceil(cutoff / (4.0 * a))) + 1);
  double sum = 0.0;
  for (int n = -N; n <= N; ++n) sum += segment(4.0 * n * a) - segment(2.0 * a + 4.0 * n * a);
  return sum;
}

}  // namespace qgheat
