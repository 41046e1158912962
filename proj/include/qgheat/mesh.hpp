#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "qgheat/errors.hpp"
#include "qgheat/graph.hpp"

namespace qgheat {

/// Uniform per-edge mesh of a metric graph. Every edge e gets
/// h_e = length_e / ceil(length_e / target_h) so the edge is meshed exactly.
/// Edge-endpoint nodes meeting at a vertex share one global index. Node
/// weights are the lumped P1 masses: half-sum of adjacent subinterval
/// lengths over all incident edge sides.
struct Mesh {
  struct EdgeMesh {
    int segments = 0;        // number of subintervals (>= 2)
    double h = 0.0;          // subinterval length
    int first_interior = 0;  // global index of the node at s = h
  };

  std::shared_ptr<const MetricGraph> graph;
  std::vector<EdgeMesh> edge_meshes;
  std::vector<int> vertex_node;  // global node per vertex
  std::vector<double> weight;    // lumped mass per global node
  int node_count = 0;
  double max_h = 0.0;

  /// Global index of node k on edge e (k = 0..segments).
  int node(int e, int k) const {
    const auto& em = edge_meshes[e];
    if (k == 0) return vertex_node[graph->edges()[e].from];
    if (k == em.segments) return vertex_node[graph->edges()[e].to];
    return em.first_interior + k - 1;
  }

  /// Arclength position of a point on the graph, as a (lower node, fraction)
  /// pair on its edge. Fraction is in [0, 1).
  std::pair<int, double> locate(const PointOnGraph& p) const {
    graph->check_point(p);
    const auto& em = edge_meshes[p.edge];
    double u = p.s / em.h;
    int k = std::min(static_cast<int>(u), em.segments - 1);
    return {k, u - k};
  }
};

/// Build a mesh with spacing at most target_h on every edge. Global node
/// indices are assigned in edge-walk order, so a simple path graph yields a
/// tridiagonal stiffness matrix.
inline Mesh build_mesh(std::shared_ptr<const MetricGraph> graph, double target_h) {
  const auto& g = *graph;
  if (!(target_h > 0.0)) throw ValidationError("mesh spacing must be positive");
  double min_len = g.edges()[0].length;
  for (const auto& e : g.edges()) min_len = std::min(min_len, e.length);
  if (target_h >= min_len) throw ValidationError("mesh spacing too coarse for shortest edge");

  Mesh m;
  m.graph = std::move(graph);
  m.vertex_node.assign(g.vertex_count(), -1);
  int next = 0;
  for (const auto& e : g.edges()) {
    int segs = static_cast<int>(std::ceil(e.length / target_h));
    if (e.from == e.to) segs = std::max(segs, 3);  // loop: keep nodes distinct
    segs = std::max(segs, 2);
    Mesh::EdgeMesh em;
    em.segments = segs;
    em.h = e.length / segs;
    if (m.vertex_node[e.from] < 0) m.vertex_node[e.from] = next++;
    em.first_interior = next;
    next += segs - 1;
    if (m.vertex_node[e.to] < 0) m.vertex_node[e.to] = next++;
    m.edge_meshes.push_back(em);
    m.max_h = std::max(m.max_h, em.h);
  }
  m.node_count = next;

  m.weight.assign(m.node_count, 0.0);
  for (size_t e = 0; e < m.edge_meshes.size(); ++e) {
    const auto& em = m.edge_meshes[e];
    const double half = 0.5 * em.h;
    for (int k = 0; k < em.segments; ++k) {
      m.weight[m.node(static_cast<int>(e), k)] += half;
      m.weight[m.node(static_cast<int>(e), k + 1)] += half;
    }
  }
  return m;
}

inline Mesh build_mesh(const MetricGraph& g, double target_h) {
  return build_mesh(std::make_shared<const MetricGraph>(g), target_h);
}

}  // namespace qgheat
