#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qgheat/errors.hpp"
#include "qgheat/format.hpp"

namespace qgheat {

/// An edge of a compact metric graph, parametrized by arclength [0, length].
struct Edge {
  std::string id;
  int from = -1;  // vertex index at s = 0
  int to = -1;    // vertex index at s = length
  double length = 0.0;
};

/// A point on a metric graph: edge index plus arclength coordinate.
struct PointOnGraph {
  int edge = 0;
  double s = 0.0;
};

/// Compact connected metric graph. Immutable after construction; Kirchhoff
/// conditions are implied at every vertex (Neumann at degree-1 vertices).
/// Loops and multi-edges are allowed.
class MetricGraph {
 public:
  struct EdgeDecl {
    std::string id;
    std::string from;
    std::string to;
    double length;
  };

  MetricGraph(std::vector<std::string> vertex_ids, const std::vector<EdgeDecl>& decls) {
    vertex_ids_ = std::move(vertex_ids);
    for (int i = 0; i < static_cast<int>(vertex_ids_.size()); ++i) {
      if (!index_.emplace(vertex_ids_[i], i).second)
        throw ValidationError("duplicate vertex id '" + vertex_ids_[i] + "'");
    }
    for (const auto& d : decls) {
      Edge e;
      e.id = d.id;
      e.from = vertex_index_checked(d.from);
      e.to = vertex_index_checked(d.to);
      if (!(d.length > 0.0))
        throw ValidationError("edge '" + d.id + "' has non-positive length");
      e.length = d.length;
      edges_.push_back(std::move(e));
    }
    if (vertex_ids_.empty()) throw ValidationError("graph has no vertices");
    if (edges_.empty()) throw ValidationError("graph has no edges");
    check_connected();
  }

  int vertex_count() const { return static_cast<int>(vertex_ids_.size()); }
  const std::vector<std::string>& vertex_ids() const { return vertex_ids_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int vertex_index(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? -1 : it->second;
  }

  int edge_index(std::string_view id) const {
    for (int i = 0; i < static_cast<int>(edges_.size()); ++i)
      if (edges_[i].id == id) return i;
    return -1;
  }

  /// |X| = sum of edge lengths.
  double total_volume() const {
    double v = 0.0;
    for (const auto& e : edges_) v += e.length;
    return v;
  }

  int degree(int v) const {
    int d = 0;
    for (const auto& e : edges_) {
      if (e.from == v) ++d;
      if (e.to == v) ++d;  // a loop contributes 2
    }
    return d;
  }

  void check_point(const PointOnGraph& p) const {
    if (p.edge < 0 || p.edge >= static_cast<int>(edges_.size()))
      throw ValidationError("point references unknown edge");
    if (!(p.s >= 0.0 && p.s <= edges_[p.edge].length))
      throw ValidationError("arclength coordinate outside edge");
  }

 private:
  int vertex_index_checked(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown vertex reference '" + id + "'");
    return it->second;
  }

  void check_connected() const {
    std::vector<char> seen(vertex_ids_.size(), 0);
    std::vector<int> stack{edges_[0].from};
    seen[edges_[0].from] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const auto& e : edges_) {
        for (int w : {e.from == v ? e.to : -1, e.to == v ? e.from : -1}) {
          if (w >= 0 && !seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
        }
      }
    }
    for (size_t v = 0; v < seen.size(); ++v)
      if (!seen[v]) throw ValidationError("graph is disconnected (vertex '" + vertex_ids_[v] + "' unreachable)");
  }

  std::vector<std::string> vertex_ids_;
  std::vector<Edge> edges_;
  std::map<std::string, int> index_;
};

/// Finite combinatorial graph with symmetric non-negative adjacency weights
/// and a diagonal potential per vertex.
class CombinatorialGraph {
 public:
  CombinatorialGraph(int n, std::vector<double> adjacency, std::vector<double> potential)
      : n_(n), adj_(std::move(adjacency)), v_(std::move(potential)) {
    if (n_ <= 0) throw ValidationError("vertex count must be positive");
    if (adj_.size() != static_cast<size_t>(n_) * n_) throw ValidationError("adjacency size mismatch");
    if (v_.size() != static_cast<size_t>(n_)) throw ValidationError("potential size mismatch");
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        if (adj_[i * n_ + j] < 0.0) throw ValidationError("negative adjacency weight");
        if (adj_[i * n_ + j] != adj_[j * n_ + i]) throw ValidationError("adjacency not symmetric");
      }
    check_connected();
  }

  int size() const { return n_; }
  double weight(int i, int j) const { return adj_[i * n_ + j]; }
  double potential(int i) const { return v_[i]; }
  const std::vector<double>& potential() const { return v_; }

  double potential_sum() const {
    double s = 0.0;
    for (double x : v_) s += x;
    return s;
  }

  double sup_potential() const {
    double s = 0.0;
    for (double x : v_) s = std::max(s, std::abs(x));
    return s;
  }

 private:
  void check_connected() const {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < n_; ++w)
        if (adj_[v * n_ + w] > 0.0 && !seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    for (int v = 0; v < n_; ++v)
      if (!seen[v]) throw ValidationError("combinatorial graph is disconnected");
  }

  int n_;
  std::vector<double> adj_;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Potentials
// ---------------------------------------------------------------------------

struct ConstantPotential {
  double value;
};

/// amp * cos(2*pi*mode*s/length); full periods, so the edge integral vanishes
/// for mode >= 1.
struct CosinePotential {
  double amplitude;
  int mode;
};

struct BumpPotential {
  double amplitude;
  double center;
  double width;
};

/// Values at uniformly spaced nodes including both endpoints.
struct SampledPotential {
  std::vector<double> values;
};

using EdgePotential = std::variant<ConstantPotential, CosinePotential, BumpPotential, SampledPotential>;

/// Bounded potential V on a metric graph, one specification per edge.
/// Edges without an explicit spec carry V = 0.
class PotentialSpec {
 public:
  explicit PotentialSpec(const MetricGraph& g) {
    for (const auto& e : g.edges()) lengths_.push_back(e.length);
    specs_.assign(lengths_.size(), ConstantPotential{0.0});
  }

  void set_edge(int edge, EdgePotential p) {
    if (edge < 0 || edge >= static_cast<int>(specs_.size()))
      throw ValidationError("potential references unknown edge");
    if (auto* s = std::get_if<SampledPotential>(&p)) {
      if (s->values.size() < 2) throw ValidationError("sampled potential needs at least 2 values");
    }
    if (auto* c = std::get_if<CosinePotential>(&p)) {
      if (c->mode < 0) throw ValidationError("cosine mode must be non-negative");
    }
    if (auto* b = std::get_if<BumpPotential>(&p)) {
      if (!(b->width > 0.0)) throw ValidationError("bump width must be positive");
    }
    specs_[edge] = std::move(p);
  }

  void set_all_edges(const EdgePotential& p) {
    for (int e = 0; e < static_cast<int>(specs_.size()); ++e) set_edge(e, p);
  }

  int edge_count() const { return static_cast<int>(specs_.size()); }
  const EdgePotential& edge_spec(int e) const { return specs_[e]; }
  double edge_length(int e) const { return lengths_[e]; }

  double evaluate(const PointOnGraph& p) const {
    if (p.edge < 0 || p.edge >= static_cast<int>(specs_.size()))
      throw ValidationError("point off graph");
    const double len = lengths_[p.edge];
    if (!(p.s >= 0.0 && p.s <= len)) throw ValidationError("point off graph");
    return eval_spec(specs_[p.edge], len, p.s);
  }

  /// Uniform-norm bound over the whole graph.
  double sup_norm() const {
    double m = 0.0;
    for (size_t e = 0; e < specs_.size(); ++e) m = std::max(m, edge_sup(specs_[e], lengths_[e]));
    return m;
  }

  /// Integral of V over X: closed form for constant/cosine, composite
  /// trapezoid for bump/sampled.
  double integral() const {
    double total = 0.0;
    for (size_t e = 0; e < specs_.size(); ++e) total += edge_integral(specs_[e], lengths_[e]);
    return total;
  }

  bool is_zero() const {
    for (size_t e = 0; e < specs_.size(); ++e)
      if (edge_sup(specs_[e], lengths_[e]) != 0.0) return false;
    return true;
  }

 private:
  static double eval_spec(const EdgePotential& spec, double len, double s) {
    if (const auto* c = std::get_if<ConstantPotential>(&spec)) return c->value;
    if (const auto* c = std::get_if<CosinePotential>(&spec))
      return c->amplitude * std::cos(2.0 * std::numbers::pi * c->mode * s / len);
    if (const auto* b = std::get_if<BumpPotential>(&spec)) {
      const double u = (s - b->center) / b->width;
      return b->amplitude * std::exp(-0.5 * u * u);
    }
    const auto& sp = std::get<SampledPotential>(spec);
    const size_t m = sp.values.size() - 1;
    double u = s / len * static_cast<double>(m);
    size_t i = std::min(static_cast<size_t>(u), m - 1);
    double f = u - static_cast<double>(i);
    return (1.0 - f) * sp.values[i] + f * sp.values[i + 1];
  }

  static double edge_sup(const EdgePotential& spec, double len) {
    if (const auto* c = std::get_if<ConstantPotential>(&spec)) return std::abs(c->value);
    if (const auto* c = std::get_if<CosinePotential>(&spec)) return std::abs(c->amplitude);
    if (const auto* b = std::get_if<BumpPotential>(&spec)) {
      const double s = std::clamp(b->center, 0.0, len);
      const double u = (s - b->center) / b->width;
      return std::abs(b->amplitude) * std::exp(-0.5 * u * u);
    }
    const auto& sp = std::get<SampledPotential>(spec);
    double m = 0.0;
    for (double v : sp.values) m = std::max(m, std::abs(v));
    return m;
  }

  static double edge_integral(const EdgePotential& spec, double len) {
    if (const auto* c = std::get_if<ConstantPotential>(&spec)) return c->value * len;
    if (const auto* c = std::get_if<CosinePotential>(&spec)) {
      if (c->mode == 0) return c->amplitude * len;
      return 0.0;  // whole periods of cos
    }
    // Trapezoid rule, fixed resolution; mesh-independent by construction.
    const int segments = 4096;
    const double h = len / segments;
    double sum = 0.5 * (eval_spec(spec, len, 0.0) + eval_spec(spec, len, len));
    for (int i = 1; i < segments; ++i) sum += eval_spec(spec, len, i * h);
    return sum * h;
  }

  std::vector<EdgePotential> specs_;
  std::vector<double> lengths_;
};

// ---------------------------------------------------------------------------
// GRAPH file format
// ---------------------------------------------------------------------------

struct ParsedGraph {
  MetricGraph graph;
  PotentialSpec potential;
};

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) {
    if (t[0] == '#') break;
    toks.push_back(t);
  }
  return toks;
}

inline double parse_kv_double(const std::string& tok, std::string_view key, int line) {
  const std::string prefix = std::string(key) + "=";
  if (tok.rfind(prefix, 0) != 0)
    throw ParseError("expected '" + prefix + "<value>', got '" + tok + "'", line);
  bool ok = false;
  double x = parse_double(std::string_view(tok).substr(prefix.size()), ok);
  if (!ok) throw ParseError("cannot parse number in '" + tok + "'", line);
  return x;
}

}  // namespace detail

/// Parse the line-oriented GRAPH format:
///   vertex <id>
///   edge <id> <vid> <vid> length=<float>
///   potential <edge-id> const <c> | cos amp=<a> mode=<k> | bump amp=<a> center=<s> width=<w>
inline ParsedGraph parse_graph_file(const std::string& text) {
  std::vector<std::string> vertices;
  std::vector<MetricGraph::EdgeDecl> edges;
  struct PotLine {
    std::string edge_id;
    EdgePotential pot;
    int line;
  };
  std::vector<PotLine> potentials;

  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    if (toks[0] == "vertex") {
      if (toks.size() != 2) throw ParseError("expected 'vertex <id>'", lineno);
      vertices.push_back(toks[1]);
    } else if (toks[0] == "edge") {
      if (toks.size() != 5) throw ParseError("expected 'edge <id> <vid> <vid> length=<float>'", lineno);
      double len = detail::parse_kv_double(toks[4], "length", lineno);
      if (!(len > 0.0)) throw ParseError("non-positive edge length", lineno);
      edges.push_back({toks[1], toks[2], toks[3], len});
    } else if (toks[0] == "potential") {
      if (toks.size() < 3) throw ParseError("expected 'potential <edge-id> <kind> ...'", lineno);
      const std::string& kind = toks[2];
      if (kind == "const") {
        if (toks.size() != 4) throw ParseError("expected 'potential <edge> const <c>'", lineno);
        bool ok = false;
        double c = parse_double(toks[3], ok);
        if (!ok) throw ParseError("cannot parse constant '" + toks[3] + "'", lineno);
        potentials.push_back({toks[1], ConstantPotential{c}, lineno});
      } else if (kind == "cos") {
        if (toks.size() != 5) throw ParseError("expected 'potential <edge> cos amp=<a> mode=<k>'", lineno);
        double amp = detail::parse_kv_double(toks[3], "amp", lineno);
        double mode = detail::parse_kv_double(toks[4], "mode", lineno);
        if (mode < 0 || mode != std::floor(mode)) throw ParseError("mode must be a non-negative integer", lineno);
        potentials.push_back({toks[1], CosinePotential{amp, static_cast<int>(mode)}, lineno});
      } else if (kind == "bump") {
        if (toks.size() != 6)
          throw ParseError("expected 'potential <edge> bump amp=<a> center=<s> width=<w>'", lineno);
        double amp = detail::parse_kv_double(toks[3], "amp", lineno);
        double center = detail::parse_kv_double(toks[4], "center", lineno);
        double width = detail::parse_kv_double(toks[5], "width", lineno);
        if (!(width > 0.0)) throw ParseError("bump width must be positive", lineno);
        potentials.push_back({toks[1], BumpPotential{amp, center, width}, lineno});
      } else {
        throw ParseError("unknown potential kind '" + kind + "'", lineno);
      }
    } else {
      throw ParseError("unknown directive '" + toks[0] + "'", lineno);
    }
  }

  MetricGraph g(std::move(vertices), edges);
  PotentialSpec pot(g);
  for (auto& pl : potentials) {
    int e = g.edge_index(pl.edge_id);
    if (e < 0) throw ParseError("potential references unknown edge '" + pl.edge_id + "'", pl.line);
    pot.set_edge(e, std::move(pl.pot));
  }
  return ParsedGraph{std::move(g), std::move(pot)};
}

inline MetricGraph parse_graph(const std::string& text) { return parse_graph_file(text).graph; }

/// Serialize in the GRAPH format. Floats use shortest round-trip decimals,
/// so parse(serialize(g)) reproduces g bit-exactly.
inline std::string serialize_graph(const MetricGraph& g, const PotentialSpec* pot = nullptr) {
  std::ostringstream os;
  for (const auto& v : g.vertex_ids()) os << "vertex " << v << "\n";
  for (const auto& e : g.edges())
    os << "edge " << e.id << " " << g.vertex_ids()[e.from] << " " << g.vertex_ids()[e.to]
       << " length=" << format_double(e.length) << "\n";
  if (pot) {
    for (int e = 0; e < pot->edge_count(); ++e) {
      const auto& spec = pot->edge_spec(e);
      if (const auto* c = std::get_if<ConstantPotential>(&spec)) {
        if (c->value != 0.0) os << "potential " << g.edges()[e].id << " const " << format_double(c->value) << "\n";
      } else if (const auto* c = std::get_if<CosinePotential>(&spec)) {
        os << "potential " << g.edges()[e].id << " cos amp=" << format_double(c->amplitude)
           << " mode=" << c->mode << "\n";
      } else if (const auto* b = std::get_if<BumpPotential>(&spec)) {
        os << "potential " << g.edges()[e].id << " bump amp=" << format_double(b->amplitude)
           << " center=" << format_double(b->center) << " width=" << format_double(b->width) << "\n";
      }
      // sampled potentials are in-process only
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Builtin graphs
// ---------------------------------------------------------------------------

inline MetricGraph make_interval(double length = 1.0) {
  return MetricGraph({"a", "b"}, {{"e1", "a", "b", length}});
}

inline MetricGraph make_loop(double length = 1.0) {
  return MetricGraph({"v"}, {{"e1", "v", "v", length}});
}

inline MetricGraph make_star3(double l1 = 1.0, double l2 = 1.0, double l3 = 1.0) {
  return MetricGraph({"c", "a", "b", "d"},
                     {{"e1", "a", "c", l1}, {"e2", "b", "c", l2}, {"e3", "d", "c", l3}});
}

/// Loop of length 1 with a pendant edge of length 1.
inline MetricGraph make_lasso() {
  return MetricGraph({"v", "w"}, {{"e1", "v", "v", 1.0}, {"e2", "v", "w", 1.0}});
}

inline MetricGraph make_builtin(std::string_view name) {
  if (name == "interval") return make_interval();
  if (name == "loop") return make_loop();
  if (name == "star3") return make_star3();
  if (name == "lasso") return make_lasso();
  throw ValidationError("unknown builtin graph '" + std::string(name) + "'");
}

}  // namespace qgheat
