#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "qgheat/graph.hpp"

using namespace qgheat;
using Catch::Approx;

TEST_CASE("parse minimal interval graph") {
  auto g = parse_graph("vertex a\nvertex b\nedge e1 a b length=1.0\n");
  CHECK(g.vertex_count() == 2);
  CHECK(g.edges().size() == 1);
  CHECK(g.total_volume() == Approx(1.0));
}

TEST_CASE("parse rejects non-positive length") {
  CHECK_THROWS_AS(parse_graph("vertex a\nvertex b\nedge e1 a b length=-1\n"), ParseError);
  CHECK_THROWS_AS(parse_graph("vertex a\nvertex b\nedge e1 a b length=0\n"), ParseError);
}

TEST_CASE("parse rejects unknown vertex reference") {
  CHECK_THROWS_AS(parse_graph("vertex a\nedge e1 a z length=1\n"), ValidationError);
}

TEST_CASE("disconnected graph rejected") {
  const std::string text =
      "vertex a\nvertex b\nvertex c\nvertex d\n"
      "edge e1 a b length=1\nedge e2 c d length=1\n";
  CHECK_THROWS_AS(parse_graph(text), ValidationError);
}

TEST_CASE("syntax errors carry line numbers") {
  try {
    parse_graph("vertex a\nvertex b\nedge e1 a b\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("comments and blank lines ignored") {
  auto g = parse_graph("# interval\n\nvertex a\nvertex b # end\nedge e1 a b length=2.5\n");
  CHECK(g.total_volume() == Approx(2.5));
}

TEST_CASE("total volume is additive") {
  CHECK(make_interval(1.0).total_volume() == Approx(1.0));
  CHECK(make_star3().total_volume() == Approx(3.0));
  const double two_pi = 2.0 * std::numbers::pi;
  CHECK(make_loop(two_pi).total_volume() == Approx(6.283185307179586));
  CHECK(make_lasso().total_volume() == Approx(2.0));
}

TEST_CASE("potential evaluation") {
  auto g = make_interval(1.0);
  PotentialSpec v(g);

  SECTION("constant") {
    v.set_edge(0, ConstantPotential{0.5});
    CHECK(v.evaluate({0, 0.0}) == Approx(0.5));
    CHECK(v.evaluate({0, 0.73}) == Approx(0.5));
    CHECK(v.sup_norm() == Approx(0.5));
    CHECK(v.integral() == Approx(0.5));
  }

  SECTION("cosine mode 1") {
    v.set_edge(0, CosinePotential{1.0, 1});
    CHECK(v.evaluate({0, 0.0}) == Approx(1.0));
    CHECK(v.evaluate({0, 0.5}) == Approx(-1.0));
    CHECK(v.integral() == Approx(0.0));
    CHECK(v.sup_norm() == Approx(1.0));
  }

  SECTION("bump integral by quadrature") {
    v.set_edge(0, BumpPotential{2.0, 0.5, 0.05});
    // narrow bump far from edge ends: integral ~ amp * width * sqrt(2 pi)
    CHECK(v.integral() == Approx(2.0 * 0.05 * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-6));
    CHECK(v.sup_norm() == Approx(2.0));
  }

  SECTION("point off graph") {
    CHECK_THROWS_AS(v.evaluate({0, 1.5}), ValidationError);
    CHECK_THROWS_AS(v.evaluate({3, 0.5}), ValidationError);
  }
}

TEST_CASE("potential never exceeds stored sup norm", "[property]") {
  auto g = make_star3(1.0, 0.7, 1.3);
  PotentialSpec v(g);
  v.set_edge(0, CosinePotential{1.4, 3});
  v.set_edge(1, BumpPotential{-2.0, 0.3, 0.1});
  v.set_edge(2, SampledPotential{{0.1, -0.9, 0.4, 0.2}});
  const double sup = v.sup_norm();
  std::mt19937 rng(12345);
  for (int i = 0; i < 500; ++i) {
    int e = static_cast<int>(rng() % 3);
    std::uniform_real_distribution<double> dist(0.0, g.edges()[e].length);
    CHECK(std::abs(v.evaluate({e, dist(rng)})) <= sup + 1e-12);
  }
}

TEST_CASE("serialize/parse round-trip is exact", "[property]") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> len(0.01, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    MetricGraph g({"c", "a", "b", "d"}, {{"e1", "a", "c", len(rng)},
                                         {"e2", "b", "c", len(rng)},
                                         {"e3", "d", "c", len(rng)}});
    PotentialSpec v(g);
    v.set_edge(0, ConstantPotential{len(rng)});
    v.set_edge(1, CosinePotential{len(rng), 2});
    v.set_edge(2, BumpPotential{len(rng), len(rng), len(rng)});
    auto parsed = parse_graph_file(serialize_graph(g, &v));
    REQUIRE(parsed.graph.edges().size() == 3);
    for (int e = 0; e < 3; ++e) {
      CHECK(parsed.graph.edges()[e].length == g.edges()[e].length);  // bit-exact
      for (double s : {0.0, 0.25 * g.edges()[e].length, 0.5 * g.edges()[e].length})
        CHECK(parsed.potential.evaluate({e, s}) == v.evaluate({e, s}));
    }
    CHECK(serialize_graph(parsed.graph, &parsed.potential) == serialize_graph(g, &v));
  }
}

TEST_CASE("loops and multi-edges permitted") {
  CHECK_NOTHROW(make_loop());
  CHECK_NOTHROW(make_lasso());
  CHECK_NOTHROW(MetricGraph({"a", "b"}, {{"e1", "a", "b", 1.0}, {"e2", "a", "b", 2.0}}));
}

TEST_CASE("combinatorial graph validation") {
  // path on 3 vertices
  std::vector<double> adj{0, 1, 0, 1, 0, 1, 0, 1, 0};
  CHECK_NOTHROW(CombinatorialGraph(3, adj, {0, 0, 0}));
  std::vector<double> asym{0, 1, 0, 0, 0, 1, 0, 1, 0};
  CHECK_THROWS_AS(CombinatorialGraph(3, asym, {0, 0, 0}), ValidationError);
  std::vector<double> disc{0, 0, 0, 0, 0, 1, 0, 1, 0};
  CHECK_THROWS_AS(CombinatorialGraph(3, disc, {0, 0, 0}), ValidationError);
}
