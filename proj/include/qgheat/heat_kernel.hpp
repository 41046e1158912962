#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "qgheat/closed_form.hpp"
#include "qgheat/eigen.hpp"
#include "qgheat/errors.hpp"

namespace qgheat {

/// Spectral heat kernel K(t,x,y) = sum_n e^{-lambda_n t} phi_n(x) phi_n(y),
/// using the full computed spectrum. Valid down to t ~ 10 h^2; below that the
/// mesh has no modes left to represent the continuum kernel.
inline double kernel_eval(const SpectralData& sd, double t, const PointOnGraph& x,
                          const PointOnGraph& y) {
  if (!(t > 0.0)) throw ValidationError("kernel time must be positive");
  if (!sd.mesh || !sd.has_vectors()) throw ValidationError("spectral data has no mesh/eigenvectors");
  const Mesh& m = *sd.mesh;
  auto [kx, fx] = m.locate(x);
  auto [ky, fy] = m.locate(y);
  const int xa = m.node(x.edge, kx), xb = m.node(x.edge, kx + 1);
  const int ya = m.node(y.edge, ky), yb = m.node(y.edge, ky + 1);
  const double cxa = (1.0 - fx) / std::sqrt(sd.weights[xa]), cxb = fx / std::sqrt(sd.weights[xb]);
  const double cya = (1.0 - fy) / std::sqrt(sd.weights[ya]), cyb = fy / std::sqrt(sd.weights[yb]);
  const int n = sd.size();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = std::exp(-sd.eigenvalues[k] * t);
    if (w == 0.0) continue;
    const double px = cxa * sd.vec(xa, k) + cxb * sd.vec(xb, k);
    const double py = cya * sd.vec(ya, k) + cyb * sd.vec(yb, k);
    sum += w * px * py;
  }
  return sum;
}

/// Kernel between two mesh nodes (no interpolation).
inline double kernel_node_eval(const SpectralData& sd, double t, int i, int j) {
  if (!(t > 0.0)) throw ValidationError("kernel time must be positive");
  const int n = sd.size();
  double sum = 0.0;
  for (int k = 0; k < n; ++k)
    sum += std::exp(-sd.eigenvalues[k] * t) * sd.vec(i, k) * sd.vec(j, k);
  return sum / std::sqrt(sd.weights[i] * sd.weights[j]);
}

struct Extrapolation {
  double limit = 0.0;
  double uncertainty = 0.0;
};

/// Fit f(t) = A + b e^{-c/t} through three samples with t1 > t2 > t3 and
/// return A. The correction model matches the exponentially small boundary
/// terms of 1-D heat kernels. Falls back to the smallest-t sample when the
/// differences do not resolve a decaying exponential.
inline Extrapolation extrapolate_exponential(double t1, double f1, double t2, double f2, double t3,
                                             double f3) {
  const Extrapolation fallback{f3, std::abs(f3 - f2)};
  const double d12 = f1 - f2, d23 = f2 - f3;
  if (d23 == 0.0 || !std::isfinite(d12 / d23)) return {f3, std::abs(d12) + std::abs(d23)};
  const double r = d12 / d23;
  auto ratio = [&](double c) {
    const double e1 = std::exp(-c / t1), e2 = std::exp(-c / t2), e3 = std::exp(-c / t3);
    return (e1 - e2) / (e2 - e3);
  };
  const double r0 = (1.0 / t2 - 1.0 / t1) / (1.0 / t3 - 1.0 / t2);  // c -> 0 limit
  if (!(r > r0)) return fallback;
  double lo = 1e-12 * t3, hi = t3;
  const double hi_max = 600.0 / (1.0 / t2 - 1.0 / t1);
  while (ratio(hi) < r) {
    hi *= 2.0;
    if (hi > hi_max) return fallback;  // correction already below resolution
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ratio(mid) < r ? lo : hi) = mid;
  }
  const double c = 0.5 * (lo + hi);
  const double e2 = std::exp(-c / t2), e3 = std::exp(-c / t3);
  if (e2 == e3) return fallback;
  const double b = d23 / (e2 - e3);
  const double limit = f3 - b * e3;
  // A correction decaying slower than ~x0.75 per grid step is not resolvable
  // from three points (the ratio equation is nearly degenerate there, e.g.
  // for algebraic contamination ~1/t); cap the extrapolated jump instead of
  // trusting a barely-determined c.
  if (std::abs(limit - f3) > 3.0 * std::abs(d23)) return fallback;
  return {limit, std::abs(limit - f3)};
}

struct DiagonalLimit {
  std::vector<double> t;
  std::vector<double> scaled;  // sqrt(t) * K(t,x,x)
  double limit = 0.0;
  double uncertainty = 0.0;
};

/// Extrapolated t -> 0 limit of t^{1/2} K(t,x,x) at a non-vertex point.
/// For quantum graphs this approaches (4 pi)^{-1/2} at interior points.
inline DiagonalLimit diagonal_limit(const SpectralData& sd, const PointOnGraph& x,
                                    std::span<const double> t_grid) {
  if (!sd.mesh) throw ValidationError("spectral data has no mesh");
  const Mesh& m = *sd.mesh;
  m.graph->check_point(x);
  const double len = m.graph->edges()[x.edge].length;
  if (x.s < 1e-12 || len - x.s < 1e-12)
    throw ValidationError("diagonal limit excluded at vertices (exceptional set)");
  if (t_grid.size() < 3) throw ValidationError("need at least 3 grid points");
  const double floor = 10.0 * m.max_h * m.max_h;
  DiagonalLimit out;
  for (size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (i > 0 && !(t < t_grid[i - 1])) throw ValidationError("t grid must be strictly decreasing");
    if (t < floor) throw ValidationError("t grid enters the mesh-resolution floor 10 h^2");
    out.t.push_back(t);
    out.scaled.push_back(std::sqrt(t) * kernel_eval(sd, t, x, x));
  }
  const size_t n = out.t.size();
  auto ex = extrapolate_exponential(out.t[n - 3], out.scaled[n - 3], out.t[n - 2], out.scaled[n - 2],
                                    out.t[n - 1], out.scaled[n - 1]);
  out.limit = ex.limit;
  out.uncertainty = ex.uncertainty;
  return out;
}

}  // namespace qgheat
