#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "qgheat/errors.hpp"
#include "qgheat/mesh.hpp"
#include "qgheat/operators.hpp"

namespace qgheat {

/// Full spectral decomposition of a DiscreteOperator: ascending eigenvalues
/// (repeated by multiplicity) and orthonormal eigenvectors in the weighted
/// coordinates. phi_n(node) = vec(node, n) / sqrt(weight(node)).
struct SpectralData {
  std::vector<double> eigenvalues;
  std::vector<double> vectors;  // column-major; empty if eigenvalues-only
  std::vector<double> weights;
  std::shared_ptr<const Mesh> mesh;
  OperatorKind kind = OperatorKind::h0;
  double sup_v = 0.0;
  bool pinned = false;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  bool has_vectors() const { return !vectors.empty(); }
  double vec(int node, int k) const { return vectors[static_cast<size_t>(k) * size() + node]; }
  double phi_node(int k, int node) const { return vec(node, k) / std::sqrt(weights[node]); }
};

namespace detail {

/// Householder reduction of a symmetric matrix to tridiagonal form
/// (EISPACK tred2). z is n x n column-major; on exit it holds the
/// accumulated orthogonal transform when accumulate is true.
inline void householder_tridiagonalize(int n, std::vector<double>& z, std::vector<double>& d,
                                       std::vector<double>& e, bool accumulate) {
  auto Z = [&](int i, int j) -> double& { return z[static_cast<size_t>(j) * n + i]; };
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(Z(i, k));
      if (scale == 0.0) {
        e[i] = Z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          Z(i, k) /= scale;
          h += Z(i, k) * Z(i, k);
        }
        double f = Z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        Z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          Z(j, i) = Z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += Z(j, k) * Z(i, k);
          for (int k = j + 1; k <= l; ++k) g += Z(k, j) * Z(i, k);
          e[j] = g / h;
          f += e[j] * Z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = Z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) Z(j, k) -= f * e[k] + g * Z(i, k);
        }
      }
    } else {
      e[i] = Z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (accumulate) {
      if (d[i] != 0.0) {
        for (int j = 0; j <= l; ++j) {
          double g = 0.0;
          for (int k = 0; k <= l; ++k) g += Z(i, k) * Z(k, j);
          for (int k = 0; k <= l; ++k) Z(k, j) -= g * Z(k, i);
        }
      }
      d[i] = Z(i, i);
      Z(i, i) = 1.0;
      for (int j = 0; j <= l; ++j) Z(j, i) = Z(i, j) = 0.0;
    } else {
      d[i] = Z(i, i);
    }
  }
}

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix
/// (EISPACK tql2). Accumulates rotations into z when accumulate is true;
/// z columns are contiguous, so the rotation updates stream well.
inline void ql_implicit_shift(int n, std::vector<double>& d, std::vector<double>& e,
                              std::vector<double>& z, bool accumulate, int max_iter = 50) {
  auto Z = [&](int i, int j) -> double& { return z[static_cast<size_t>(j) * n + i]; };
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter)
          throw NumericalError("QL iteration failed to converge after " + std::to_string(max_iter) +
                               " sweeps (n=" + std::to_string(n) + ", index " + std::to_string(l) +
                               ", offdiag " + std::to_string(e[l]) + ")");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (accumulate) {
            double* zi = &Z(0, i);
            double* zi1 = &Z(0, i + 1);
            for (int k = 0; k < n; ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline bool is_tridiagonal(const DiscreteOperator& a) {
  const int n = a.size();
  for (int j = 0; j < n; ++j)
    for (int i = j + 2; i < n; ++i)
      if (a.at(i, j) != 0.0) return false;
  return true;
}

inline void sort_ascending(std::vector<double>& d, std::vector<double>* z, int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return d[i] < d[j]; });
  std::vector<double> ds(n);
  for (int k = 0; k < n; ++k) ds[k] = d[idx[k]];
  d = std::move(ds);
  if (z) {
    std::vector<double> zs(z->size());
    for (int k = 0; k < n; ++k)
      std::copy(z->begin() + static_cast<size_t>(idx[k]) * n,
                z->begin() + static_cast<size_t>(idx[k] + 1) * n,
                zs.begin() + static_cast<size_t>(k) * n);
    *z = std::move(zs);
  }
}

}  // namespace detail

inline constexpr int kEigenDimensionCap = 4096;

/// Snap the ground state of an h0 operator to the exact (H4) pair
/// (lambda_1 = 0, v_1 = normalized W^{1/2} 1) when the computed values are
/// within the documented thresholds.
inline void pin_ground_state(SpectralData& sd) {
  if (sd.kind != OperatorKind::h0 || sd.size() == 0) return;
  double norm = 0.0;
  for (double l : sd.eigenvalues) norm = std::max(norm, std::abs(l));
  if (norm == 0.0 || std::abs(sd.eigenvalues[0]) >= 1e-10 * norm) return;
  if (sd.has_vectors()) {
    const int n = sd.size();
    std::vector<double> c(n);
    double cn = 0.0;
    for (int i = 0; i < n; ++i) {
      c[i] = std::sqrt(sd.weights[i]);
      cn += c[i] * c[i];
    }
    cn = std::sqrt(cn);
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += sd.vec(i, 0) * c[i] / cn;
    if (1.0 - std::abs(dot) > 1e-6) return;
    const double sign = (dot >= 0.0) ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) sd.vectors[i] = sign * c[i] / cn;
  }
  sd.eigenvalues[0] = 0.0;
  sd.pinned = true;
}

inline SpectralData eigendecompose_impl(const DiscreteOperator& a, bool with_vectors,
                                        int cap = kEigenDimensionCap) {
  const int n = a.size();
  if (n > cap)
    throw ValidationError("matrix dimension " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
  std::vector<double> d, e, z;
  if (detail::is_tridiagonal(a)) {
    d.resize(n);
    e.assign(n, 0.0);
    for (int i = 0; i < n; ++i) d[i] = a.at(i, i);
    for (int i = 1; i < n; ++i) e[i] = a.at(i, i - 1);
    if (with_vectors) {
      z.assign(static_cast<size_t>(n) * n, 0.0);
      for (int i = 0; i < n; ++i) z[static_cast<size_t>(i) * n + i] = 1.0;
    }
  } else {
    z = a.data();
    detail::householder_tridiagonalize(n, z, d, e, with_vectors);
    if (!with_vectors) z.clear();
  }
  detail::ql_implicit_shift(n, d, e, z, with_vectors);
  detail::sort_ascending(d, with_vectors ? &z : nullptr, n);

  SpectralData sd;
  sd.eigenvalues = std::move(d);
  sd.vectors = std::move(z);
  sd.weights = a.weights();
  sd.mesh = a.mesh();
  sd.kind = a.kind();
  sd.sup_v = a.sup_v();
  pin_ground_state(sd);
  return sd;
}

/// Deterministic full decomposition with eigenvectors.
inline SpectralData eigendecompose(const DiscreteOperator& a, int cap = kEigenDimensionCap) {
  return eigendecompose_impl(a, true, cap);
}

/// Eigenvalues only; skips transform accumulation (the O(n^3) part for
/// tridiagonal input).
inline std::vector<double> eigenvalues_only(const DiscreteOperator& a, int cap = kEigenDimensionCap) {
  return eigendecompose_impl(a, false, cap).eigenvalues;
}

/// phi_k at an arbitrary point: linear interpolation of node values of the
/// k-th eigenfunction along the edge. Normalization: sum_i w_i phi_k(i)^2 = 1.
inline double eigenfunction_at(const SpectralData& sd, int k, const PointOnGraph& p) {
  if (k < 0 || k >= sd.size()) throw ValidationError("eigenfunction index out of range");
  if (!sd.mesh || !sd.has_vectors()) throw ValidationError("spectral data has no mesh/eigenvectors");
  const Mesh& m = *sd.mesh;
  auto [seg, frac] = m.locate(p);
  const int a = m.node(p.edge, seg);
  const int b = m.node(p.edge, seg + 1);
  return (1.0 - frac) * sd.phi_node(k, a) + frac * sd.phi_node(k, b);
}

}  // namespace qgheat
