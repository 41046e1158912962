#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "qgheat/errors.hpp"
#include "qgheat/graph.hpp"
#include "qgheat/mesh.hpp"

namespace qgheat {

enum class OperatorKind { h0, h, combinatorial, dirichlet_interval };

/// Symmetric finite-dimensional operator in the weighted (mass-lumped)
/// coordinates: A = W^{-1/2} S W^{-1/2} for metric-graph kinds. Immutable
/// after assembly.
class DiscreteOperator {
 public:
  DiscreteOperator(int n, OperatorKind kind, std::vector<double> data, std::vector<double> weights,
                   std::shared_ptr<const Mesh> mesh = nullptr, double sup_v = 0.0)
      : n_(n), kind_(kind), data_(std::move(data)), weights_(std::move(weights)),
        mesh_(std::move(mesh)), sup_v_(sup_v) {}

  int size() const { return n_; }
  OperatorKind kind() const { return kind_; }
  int weyl_dimension() const { return 1; }
  double sup_v() const { return sup_v_; }
  const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& data() const { return data_; }

  double at(int i, int j) const { return data_[static_cast<size_t>(j) * n_ + i]; }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += at(i, i);
    return s;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  /// A + diag(d), preserving weights and mesh.
  DiscreteOperator shifted_diagonal(const std::vector<double>& d, OperatorKind kind, double sup_v) const {
    std::vector<double> a = data_;
    for (int i = 0; i < n_; ++i) a[static_cast<size_t>(i) * n_ + i] += d[i];
    return DiscreteOperator(n_, kind, std::move(a), weights_, mesh_, sup_v);
  }

 private:
  int n_;
  OperatorKind kind_;
  std::vector<double> data_;     // column-major n x n
  std::vector<double> weights_;  // lumped quadrature weight per node
  std::shared_ptr<const Mesh> mesh_;
  double sup_v_;
};

/// Lumped-basis diagonal of V: per node, the weight-averaged value of V over
/// the incident edge sides. At interior nodes this is just V at the node.
inline std::vector<double> node_potential_values(const Mesh& m, const PotentialSpec& v) {
  std::vector<double> acc(m.node_count, 0.0);
  for (size_t e = 0; e < m.edge_meshes.size(); ++e) {
    const auto& em = m.edge_meshes[e];
    const double half = 0.5 * em.h;
    for (int k = 0; k <= em.segments; ++k) {
      const double val = v.evaluate({static_cast<int>(e), k * em.h});
      const int sides = (k == 0 || k == em.segments) ? 1 : 2;
      acc[m.node(static_cast<int>(e), k)] += half * sides * val;
    }
  }
  for (int i = 0; i < m.node_count; ++i) acc[i] /= m.weight[i];
  return acc;
}

/// H0 = -d^2/dx^2 with Kirchhoff vertex conditions: mass-lumped linear FEM.
/// The stiffness matrix has exactly zero row sums, so W^{1/2} * 1 is an exact
/// null vector of the returned symmetrized operator.
inline DiscreteOperator assemble_h0(std::shared_ptr<const Mesh> mesh) {
  const Mesh& m = *mesh;
  const int n = m.node_count;
  std::vector<double> s(static_cast<size_t>(n) * n, 0.0);
  auto S = [&](int i, int j) -> double& { return s[static_cast<size_t>(j) * n + i]; };
  for (size_t e = 0; e < m.edge_meshes.size(); ++e) {
    const auto& em = m.edge_meshes[e];
    const double c = 1.0 / em.h;
    for (int k = 0; k < em.segments; ++k) {
      const int a = m.node(static_cast<int>(e), k);
      const int b = m.node(static_cast<int>(e), k + 1);
      S(a, a) += c;
      S(b, b) += c;
      S(a, b) -= c;
      S(b, a) -= c;
    }
  }
  std::vector<double> isqw(n);
  for (int i = 0; i < n; ++i) isqw[i] = 1.0 / std::sqrt(m.weight[i]);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s[static_cast<size_t>(j) * n + i] *= isqw[i] * isqw[j];
  return DiscreteOperator(n, OperatorKind::h0, std::move(s), m.weight, std::move(mesh));
}

inline DiscreteOperator assemble_h0(const MetricGraph& g, double target_h) {
  return assemble_h0(std::make_shared<const Mesh>(build_mesh(g, target_h)));
}

/// H = H0 + V; the potential is diagonal in the lumped basis.
inline DiscreteOperator assemble_h(const DiscreteOperator& h0, const PotentialSpec& v) {
  if (h0.kind() != OperatorKind::h0 || !h0.mesh())
    throw ValidationError("assemble_h expects an h0 operator with a mesh");
  auto d = node_potential_values(*h0.mesh(), v);
  return h0.shifted_diagonal(d, OperatorKind::h, v.sup_norm());
}

inline DiscreteOperator assemble_h(const MetricGraph& g, const PotentialSpec& v, double target_h) {
  return assemble_h(assemble_h0(g, target_h), v);
}

/// Combinatorial L = D - A plus diag(V) on l^2(X) with unit weights.
inline DiscreteOperator assemble_combinatorial(const CombinatorialGraph& g) {
  const int n = g.size();
  std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = g.weight(i, j);
      deg += w;
      a[static_cast<size_t>(j) * n + i] = -w;
    }
    a[static_cast<size_t>(i) * n + i] = deg + g.potential(i);
  }
  return DiscreteOperator(n, OperatorKind::combinatorial, std::move(a),
                          std::vector<double>(n, 1.0), nullptr, g.sup_potential());
}

/// Dirichlet Laplacian on (-a, a): endpoints are removed from the unknowns.
/// Node i sits at x = -a + (i+1) h; all quadrature weights equal h.
struct DirichletInterval {
  DiscreteOperator op;
  double a;
  double h;
  double node_x(int i) const { return -a + (i + 1) * h; }
};

inline DirichletInterval assemble_dirichlet_interval(double a, double target_h) {
  if (!(a > 0.0)) throw ValidationError("half-width must be positive");
  if (!(target_h > 0.0) || target_h >= 2.0 * a) throw ValidationError("mesh spacing too coarse");
  const int segs = std::max(2, static_cast<int>(std::ceil(2.0 * a / target_h)));
  const double h = 2.0 * a / segs;
  const int n = segs - 1;
  std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
  const double c = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    m[static_cast<size_t>(i) * n + i] = 2.0 * c;
    if (i + 1 < n) {
      m[static_cast<size_t>(i + 1) * n + i] = -c;
      m[static_cast<size_t>(i) * n + i + 1] = -c;
    }
  }
  return DirichletInterval{DiscreteOperator(n, OperatorKind::dirichlet_interval, std::move(m),
                                            std::vector<double>(n, h)),
                           a, h};
}

}  // namespace qgheat
