#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qgheat/analysis.hpp"
#include "qgheat/csv.hpp"
#include "qgheat/eigen.hpp"
#include "qgheat/graph.hpp"
#include "qgheat/operators.hpp"

using namespace qgheat;
using Catch::Approx;

namespace {

/// Exact Neumann unit-interval spectrum pi^2 (n-1)^2, truncated.
std::vector<double> interval_spectrum(size_t n) {
  std::vector<double> lam(n);
  for (size_t k = 0; k < n; ++k)
    lam[k] = std::numbers::pi * std::numbers::pi * static_cast<double>(k) * static_cast<double>(k);
  return lam;
}

SpectrumPair shifted_pair(size_t n, double c) {
  SpectrumPair sp;
  sp.lambda = interval_spectrum(n);
  sp.mu = sp.lambda;
  for (double& m : sp.mu) m += c;
  sp.volume = 1.0;
  sp.sup_v = std::abs(c);
  sp.int_v = c;
  return sp;
}

}  // namespace

TEST_CASE("heat trace basics") {
  auto g = make_interval(1.0);
  auto sd = eigendecompose(assemble_h0(g, 0.005));

  SECTION("t -> infinity leaves only the ground state") {
    CHECK(heat_trace(sd, 100.0) == Approx(1.0).margin(1e-12));
  }
  SECTION("matches the theta-series oracle at moderate t") {
    for (double t : {0.5, 0.2, 0.1})
      CHECK(heat_trace(sd, t) == Approx(oracles::neumann_interval_trace(t)).margin(1e-4));
  }
  SECTION("Mercer identity holds at matrix level (no throw)") {
    for (double t : {1e-3, 0.1, 1.0, 10.0}) CHECK_NOTHROW(heat_trace(sd, t));
  }
  SECTION("rejects non-positive t") {
    CHECK_THROWS_AS(heat_trace(sd, 0.0), ValidationError);
  }
}

TEST_CASE("sigma vanishes identically for V = 0") {
  auto sp = shifted_pair(400, 0.0);
  auto grid = geometric_grid_desc(1e-4, 0.1, 11);
  auto curve = sigma_of_t(sp, grid);
  for (double s : curve.sigma) CHECK(std::abs(s) < 1e-10);
  CHECK(std::abs(curve.limit) < 1e-10);
}

TEST_CASE("sigma limit for constant V on closed-form interval spectra") {
  auto sp = shifted_pair(2000, 0.7);
  auto grid = geometric_grid_desc(1e-4, 0.1, 11);
  auto curve = sigma_of_t(sp, grid);
  CHECK_FALSE(curve.tail_flagged);
  CHECK(curve.limit == Approx(0.7 * kInvSqrt4Pi).margin(1e-3));
  // sigma(t) approaches c a |X| from above at rate O(sqrt(t))
  CHECK(std::abs(curve.sigma.back() - 0.7 * kInvSqrt4Pi) <
        std::abs(curve.sigma.front() - 0.7 * kInvSqrt4Pi));
  CHECK(std::abs(curve.sigma.back() - 0.7 * kInvSqrt4Pi) < 5e-3);
}

TEST_CASE("sigma flags truncation-starved grids") {
  auto sp = shifted_pair(40, 0.7);  // short spectrum
  auto grid = geometric_grid_desc(1e-6, 1e-4, 5);
  auto curve = sigma_of_t(sp, grid);
  CHECK(curve.tail_flagged);
}

TEST_CASE("sigma limit for zero-mean cosine potential straddles 0") {
  auto g = make_interval(1.0);
  PotentialSpec v(g);
  v.set_edge(0, CosinePotential{1.0, 1});
  auto h0 = assemble_h0(g, 1e-3);
  SpectrumPair sp;
  sp.lambda = eigenvalues_only(h0);
  sp.mu = eigenvalues_only(assemble_h(h0, v));
  sp.volume = 1.0;
  sp.sup_v = 1.0;
  sp.int_v = 0.0;
  CHECK(sp.mu[0] < -1e-3);  // premain contrapositive
  auto grid = geometric_grid_desc(1e-3, 0.128, 8);
  auto curve = sigma_of_t(sp, grid);
  CHECK(std::abs(curve.limit) <= std::max(curve.uncertainty, 5e-4));
}

TEST_CASE("maincorollary splitting bound with synthetic spectra") {
  // mu_n = lambda_n + eps for n >= N: sigma stays below finite part + c eps
  const size_t n = 800, N = 20;
  const double eps = 0.05;
  SpectrumPair sp;
  sp.lambda = interval_spectrum(n);
  sp.mu = sp.lambda;
  for (size_t k = 0; k < n; ++k) sp.mu[k] += (k < N) ? -0.2 : eps;
  double c = 0.0;  // c = sup_t sqrt(t) tr e^{-H0 t}
  for (double t = 1e-4; t <= 1.0; t *= 1.3)
    c = std::max(c, std::sqrt(t) * trace_from_eigenvalues(sp.lambda, t));
  double finite = 0.0;
  for (double t = 1e-4; t < 1.0; t *= 2.0) {
    double s1 = 0.0;
    for (size_t k = 0; k < N; ++k) s1 += std::exp(-sp.lambda[k] * t) - std::exp(-sp.mu[k] * t);
    s1 /= std::sqrt(t);
    finite = std::max(finite, s1);
  }
  auto grid = geometric_grid_desc(1e-4, 0.5, 14);
  auto curve = sigma_of_t(sp, grid);
  for (double s : curve.sigma) CHECK(s <= finite + c * eps + 1e-9);
}

TEST_CASE("trace expansion residual") {
  auto g = make_interval(1.0);
  auto mesh = std::make_shared<const Mesh>(build_mesh(g, 0.005));
  auto h0 = assemble_h0(mesh);
  auto sd0 = eigendecompose(h0);

  SECTION("V = 0 gives rho identically 0") {
    PotentialSpec v(g);
    auto sdh = eigendecompose(assemble_h(h0, v));
    auto grid = geometric_grid_desc(1e-3, 0.1, 8);
    auto rep = trace_expansion_residual(sd0, sdh, v, grid);
    for (double r : rep.rho) CHECK(std::abs(r) < 1e-10);
  }

  SECTION("V = const c: exact formula and slope 3/2") {
    const double c = 0.6;
    PotentialSpec v(g);
    v.set_all_edges(ConstantPotential{c});
    auto sdh = eigendecompose(assemble_h(h0, v));
    auto grid = geometric_grid_desc(1e-3, 0.1, 8);
    auto rep = trace_expansion_residual(sd0, sdh, v, grid);
    for (size_t i = 0; i < rep.t.size(); ++i) {
      const double t = rep.t[i];
      // oracle: rho(t) = tr e^{-H0 t} (e^{-ct} - 1 + ct), exact at matrix level
      const double oracle = rep.trace0[i] * (std::exp(-c * t) - 1.0 + c * t);
      CHECK(rep.rho[i] == Approx(oracle).epsilon(1e-5).margin(1e-9));
    }
    CHECK(rep.fitted_exponent == Approx(1.5).margin(0.15));
  }

  SECTION("mesh floor enforced") {
    PotentialSpec v(g);
    auto sdh = eigendecompose(assemble_h(h0, v));
    std::vector<double> bad{1e-6};
    CHECK_THROWS_AS(trace_expansion_residual(sd0, sdh, v, bad), ValidationError);
  }
}

TEST_CASE("ambarzumyan verdict") {
  SECTION("identical spectra pass") {
    auto sp = shifted_pair(100, 0.0);
    auto v = ambarzumyan_verdict(sp, TailPolicy{0.3, 1e-8, 1e-8});
    CHECK(v.status == VerdictStatus::pass);
  }
  SECTION("constant shift fails the tail criterion") {
    auto sp = shifted_pair(100, 0.1);
    auto v = ambarzumyan_verdict(sp, TailPolicy{0.3, 1e-4, 1e-8});
    CHECK(v.status == VerdictStatus::fail);
  }
  SECTION("cosine potential fails mu_1 >= 0") {
    auto g = make_interval(1.0);
    PotentialSpec pot(g);
    pot.set_edge(0, CosinePotential{1.0, 1});
    auto h0 = assemble_h0(g, 0.005);
    SpectrumPair sp;
    sp.lambda = eigenvalues_only(h0);
    sp.mu = eigenvalues_only(assemble_h(h0, pot));
    auto v = ambarzumyan_verdict(sp, TailPolicy{0.3, 1e-2, 1e-8});
    CHECK(v.status == VerdictStatus::fail);
    CHECK(v.rationale.find("mu_1") != std::string::npos);
  }
  SECTION("borderline tail is indeterminate") {
    auto sp = shifted_pair(100, 1e-4);
    auto v = ambarzumyan_verdict(sp, TailPolicy{0.3, 1e-4, 1e-8});
    CHECK(v.status == VerdictStatus::indeterminate);
  }
  SECTION("too few eigenvalues rejected") {
    auto sp = shifted_pair(20, 0.0);
    CHECK_THROWS_AS(ambarzumyan_verdict(sp), ValidationError);
  }
}

TEST_CASE("premain verdict") {
  SECTION("V = 0 trivially consistent") {
    auto sp = shifted_pair(60, 0.0);
    CHECK(premain_verdict(sp, 0.0).status == VerdictStatus::pass);
  }
  SECTION("zero-mean nonzero V: mu_1 < 0 confirms the contrapositive") {
    auto g = make_interval(1.0);
    PotentialSpec pot(g);
    pot.set_edge(0, CosinePotential{1.0, 1});
    auto h0 = assemble_h0(g, 0.005);
    SpectrumPair sp;
    sp.lambda = eigenvalues_only(h0);
    sp.mu = eigenvalues_only(assemble_h(h0, pot));
    sp.sup_v = 1.0;
    auto v = premain_verdict(sp, pot.integral());
    CHECK(v.status == VerdictStatus::pass);
    CHECK(sp.mu[0] < 0.0);
  }
  SECTION("V >= 0 nonzero: not applicable") {
    auto sp = shifted_pair(60, 0.5);
    CHECK(premain_verdict(sp, 0.5).status == VerdictStatus::not_applicable);
  }
  SECTION("fabricated contradiction is flagged") {
    auto sp = shifted_pair(60, 0.0);
    sp.sup_v = 1.0;  // claims V != 0 while spectra coincide and int V = 0
    CHECK(premain_verdict(sp, 0.0).status == VerdictStatus::fail);
  }
}

TEST_CASE("combinatorial trace identity") {
  SECTION("path-3 with V = (1,-1,0)") {
    CombinatorialGraph g(3, {0, 1, 0, 1, 0, 1, 0, 1, 0}, {1.0, -1.0, 0.0});
    auto v = combinatorial_trace_identity(g);
    CHECK(v.status == VerdictStatus::pass);
    for (auto& [k, val] : v.metrics)
      if (k == "sum_mu_minus_lambda") CHECK(val == Approx(0.0).margin(1e-10));
  }
  SECTION("random graphs n = 20") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> w(0.1, 2.0), pv(-3.0, 3.0);
    for (int rep = 0; rep < 5; ++rep) {
      const int n = 20;
      std::vector<double> adj(n * n, 0.0), pot(n);
      for (int i = 1; i < n; ++i) {
        int j = static_cast<int>(rng() % i);
        adj[i * n + j] = adj[j * n + i] = w(rng);
      }
      for (int e = 0; e < 15; ++e) {
        int i = static_cast<int>(rng() % n), j = static_cast<int>(rng() % n);
        if (i != j) adj[i * n + j] = adj[j * n + i] = w(rng);
      }
      for (double& p : pot) p = pv(rng);
      CombinatorialGraph g(n, adj, pot);
      CHECK(combinatorial_trace_identity(g).status == VerdictStatus::pass);
    }
  }
}

TEST_CASE("ground state curve") {
  auto g = make_interval(1.0);

  SECTION("V = 0 gives F identically 0") {
    PotentialSpec v(g);
    auto gsc = ground_state_curve(g, v, linear_grid(-2.0, 2.0, 9), 0.02);
    for (double f : gsc.f) CHECK(std::abs(f) < 1e-9);
  }

  SECTION("V = const c gives F(s) = s c exactly") {
    PotentialSpec v(g);
    v.set_all_edges(ConstantPotential{0.4});
    auto gsc = ground_state_curve(g, v, linear_grid(-2.0, 2.0, 9), 0.02);
    for (size_t i = 0; i < gsc.s.size(); ++i)
      CHECK(gsc.f[i] == Approx(0.4 * gsc.s[i]).margin(1e-9));
    CHECK(gsc.max_second_diff <= 1e-8);
  }

  SECTION("cosine potential: concave with maximum 0 at s = 0, F'(0) = 0") {
    PotentialSpec v(g);
    v.set_edge(0, CosinePotential{1.0, 1});
    auto grid = linear_grid(-2.0, 2.0, 41);
    auto gsc = ground_state_curve(g, v, grid, 0.01);
    CHECK(gsc.max_second_diff <= 1e-8);
    int zi = 20;
    CHECK(gsc.s[zi] == 0.0);
    CHECK(gsc.f[zi] == 0.0);
    for (double f : gsc.f) CHECK(f <= 1e-12);
    // F'(0) = |X|^{-1} int V = 0 up to O(step)
    CHECK(std::abs(gsc.fprime0) < 0.05);
  }

  SECTION("sandwich monotonicity: V + delta shifts every mu_n by delta") {
    PotentialSpec v(g);
    v.set_edge(0, CosinePotential{1.0, 1});
    PotentialSpec vd(g);
    vd.set_edge(0, CosinePotential{1.0, 1});
    auto h0 = assemble_h0(g, 0.02);
    auto mu = eigenvalues_only(assemble_h(h0, v));
    const double delta = 0.3;
    auto hd = assemble_h(h0, vd).shifted_diagonal(
        std::vector<double>(h0.size(), delta), OperatorKind::h, v.sup_norm() + delta);
    auto mud = eigenvalues_only(hd);
    for (size_t k = 0; k < mu.size(); ++k) CHECK(mud[k] - mu[k] == Approx(delta).margin(1e-10));
  }
}

TEST_CASE("CSV output is deterministic with fixed headers") {
  auto sp = shifted_pair(10, 0.5);
  std::ostringstream a, b;
  write_spectrum_csv(a, sp.lambda, sp.mu, 10);
  write_spectrum_csv(b, sp.lambda, sp.mu, 10);
  CHECK(a.str() == b.str());
  CHECK(a.str().substr(0, 16) == "n,lambda_n,mu_n\n");

  auto curve = sigma_of_t(shifted_pair(100, 0.3), geometric_grid_desc(0.01, 0.1, 5));
  std::ostringstream c;
  write_sigma_csv(c, curve);
  CHECK(c.str().substr(0, 8) == "t,sigma\n");
}
