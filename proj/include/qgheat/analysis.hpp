#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qgheat/closed_form.hpp"
#include "qgheat/eigen.hpp"
#include "qgheat/errors.hpp"
#include "qgheat/fit.hpp"
#include "qgheat/heat_kernel.hpp"
#include "qgheat/operators.hpp"

namespace qgheat {

// ---------------------------------------------------------------------------
// Spectra and traces
// ---------------------------------------------------------------------------

/// Paired truncated spectra of H0 and H = H0 + V on the same space.
struct SpectrumPair {
  std::vector<double> lambda;  // H0, ascending, lambda[0] = 0
  std::vector<double> mu;      // H, ascending
  int weyl_d = 1;
  double volume = 1.0;
  double weyl_a = kInvSqrt4Pi;
  std::optional<double> sup_v;  // ||V||_inf when the potential is known
  std::optional<double> int_v;  // integral of V when known

  void validate() const {
    if (lambda.size() != mu.size()) throw ValidationError("spectra must have equal truncation length");
    if (lambda.empty()) throw ValidationError("empty spectra");
    for (size_t i = 1; i < lambda.size(); ++i) {
      if (lambda[i] < lambda[i - 1]) throw ValidationError("lambda not ascending");
      if (mu[i] < mu[i - 1]) throw ValidationError("mu not ascending");
    }
    if (std::abs(lambda[0]) > 1e-8 * std::max(1.0, std::abs(lambda.back())))
      throw ValidationError("lambda_1 must be 0");
  }
};

inline double trace_from_eigenvalues(std::span<const double> eigenvalues, double t) {
  if (!(t > 0.0)) throw ValidationError("trace time must be positive");
  double s = 0.0;
  for (double l : eigenvalues) s += std::exp(-l * t);
  return s;
}

/// tr e^{-Ht} as the eigenvalue sum. When eigenvectors are available the
/// Mercer quadrature of the kernel diagonal is computed as well and the two
/// must agree to 1e-8 relative.
inline double heat_trace(const SpectralData& sd, double t) {
  const double tr = trace_from_eigenvalues(sd.eigenvalues, t);
  if (sd.has_vectors()) {
    const int n = sd.size();
    double quad = 0.0;
    for (int k = 0; k < n; ++k) {
      const double w = std::exp(-sd.eigenvalues[k] * t);
      if (w == 0.0) continue;
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += sd.vec(i, k) * sd.vec(i, k);
      quad += w * s;
    }
    if (std::abs(quad - tr) > 1e-8 * std::max(1.0, std::abs(tr)))
      throw NumericalError("Mercer consistency failed: trace " + std::to_string(tr) +
                           " vs kernel quadrature " + std::to_string(quad));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// sigma(t)
// ---------------------------------------------------------------------------

/// sigma(t) = t^{d/2-1} sum_n (e^{-lambda_n t} - e^{-mu_n t}) on a decreasing
/// t grid, with the t -> 0 limit extracted by the sqrt(t) correction model on
/// adjacent grid pairs. tail_flagged marks points where the truncation-tail
/// estimate exceeds 10% of |sigma|.
struct SigmaCurve {
  std::vector<double> t;      // strictly decreasing
  std::vector<double> sigma;
  std::vector<double> tail_bound;
  double limit = 0.0;
  double uncertainty = 0.0;
  bool tail_flagged = false;
};

/// Weyl-model bound on the omitted tail of the sigma sum: eigenvalues beyond
/// the truncation are modelled as lambda_n ~ c n^2 with c = lambda_N / N^2,
/// summed by the Gaussian integral.
inline double sigma_tail_bound(const SpectrumPair& sp, double t) {
  const size_t n = sp.lambda.size();
  const double lam_n = sp.lambda.back();
  if (lam_n <= 0.0) return 0.0;
  const double c = lam_n / (static_cast<double>(n) * n);
  const double amp = sp.sup_v ? -std::expm1(-std::min(*sp.sup_v * t, 700.0)) : 1.0;
  const double tail_count = std::sqrt(std::numbers::pi / (4.0 * c * t)) *
                            std::erfc(static_cast<double>(n) * std::sqrt(c * t));
  return std::pow(t, 0.5 * sp.weyl_d - 1.0) * amp * tail_count;
}

inline SigmaCurve sigma_of_t(const SpectrumPair& sp, std::span<const double> t_grid) {
  sp.validate();
  if (t_grid.size() < 2) throw ValidationError("sigma needs at least 2 grid points");
  SigmaCurve curve;
  for (size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t > 0.0)) throw ValidationError("t grid must be positive");
    if (i > 0 && !(t < t_grid[i - 1])) throw ValidationError("t grid must be strictly decreasing");
    double sum = 0.0;
    for (size_t k = 0; k < sp.lambda.size(); ++k) {
      // e^{-lambda t} - e^{-mu t} without cancellation
      sum -= std::exp(-sp.lambda[k] * t) * std::expm1(-(sp.mu[k] - sp.lambda[k]) * t);
    }
    const double s = std::pow(t, 0.5 * sp.weyl_d - 1.0) * sum;
    const double tail = sigma_tail_bound(sp, t);
    curve.t.push_back(t);
    curve.sigma.push_back(s);
    curve.tail_bound.push_back(tail);
    if (tail > 0.1 * std::abs(s) && tail > 1e-12) curve.tail_flagged = true;
  }

  // Pairwise extrapolants of the model sigma = L + b sqrt(t).
  std::vector<double> lims;
  for (size_t i = 0; i + 1 < curve.t.size(); ++i) {
    const double r1 = std::sqrt(curve.t[i]), r2 = std::sqrt(curve.t[i + 1]);
    const double b = (curve.sigma[i] - curve.sigma[i + 1]) / (r1 - r2);
    lims.push_back(curve.sigma[i] - b * r1);
  }
  curve.limit = lims.back();
  const size_t k = lims.size() >= 3 ? lims.size() - 3 : 0;
  double lo = lims[k], hi = lims[k];
  for (size_t i = k; i < lims.size(); ++i) {
    lo = std::min(lo, lims[i]);
    hi = std::max(hi, lims[i]);
  }
  curve.uncertainty = hi - lo;
  return curve;
}

// ---------------------------------------------------------------------------
// Trace expansion residual rho(t)
// ---------------------------------------------------------------------------

/// rho(t) = tr e^{-Ht} - tr e^{-H0 t} + t * int K0(t,x,x) V(x) dx, with a
/// log-log slope fit of |rho| against t. Theory for d = 1 gives exponent 3/2.
struct TraceExpansionReport {
  std::vector<double> t;
  std::vector<double> trace0;
  std::vector<double> traceH;
  std::vector<double> first_order;  // t * int K0(t,x,x) V(x) dx
  std::vector<double> rho;
  double fitted_exponent = 0.0;
  double exponent_stderr = 0.0;
};

inline TraceExpansionReport trace_expansion_residual(const SpectralData& sd0, const SpectralData& sdh,
                                                     const PotentialSpec& v,
                                                     std::span<const double> t_grid) {
  if (!sd0.mesh || !sd0.has_vectors()) throw ValidationError("sd0 needs mesh and eigenvectors");
  const Mesh& m = *sd0.mesh;
  const double floor = 10.0 * m.max_h * m.max_h;
  const auto vnode = node_potential_values(m, v);
  const int n = sd0.size();
  // q_k = <V phi_k, phi_k> in the lumped quadrature
  std::vector<double> q(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += sd0.vec(i, k) * sd0.vec(i, k) * vnode[i];
    q[k] = s;
  }

  TraceExpansionReport rep;
  for (double t : t_grid) {
    if (t < floor || t > 1.0) throw ValidationError("residual grid must lie in [10 h^2, 1]");
    const double tr0 = trace_from_eigenvalues(sd0.eigenvalues, t);
    const double trh = trace_from_eigenvalues(sdh.eigenvalues, t);
    double fo = 0.0;
    for (int k = 0; k < n; ++k) fo += std::exp(-sd0.eigenvalues[k] * t) * q[k];
    fo *= t;
    rep.t.push_back(t);
    rep.trace0.push_back(tr0);
    rep.traceH.push_back(trh);
    rep.first_order.push_back(fo);
    rep.rho.push_back(trh - tr0 + fo);
  }

  std::vector<double> lx, ly;
  for (size_t i = 0; i < rep.t.size(); ++i) {
    if (std::abs(rep.rho[i]) > 1e-14 * (1.0 + std::abs(rep.trace0[i]))) {
      lx.push_back(std::log(rep.t[i]));
      ly.push_back(std::log(std::abs(rep.rho[i])));
    }
  }
  if (lx.size() >= 2) {
    const auto f = fit_line(lx, ly);
    rep.fitted_exponent = f.slope;
    rep.exponent_stderr = f.slope_stderr;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

enum class VerdictStatus { pass, fail, indeterminate, not_applicable };

inline const char* to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "pass";
    case VerdictStatus::fail: return "fail";
    case VerdictStatus::indeterminate: return "indeterminate";
    case VerdictStatus::not_applicable: return "not-applicable";
  }
  return "?";
}

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::indeterminate;
  std::vector<std::pair<std::string, double>> metrics;
  std::string rationale;
};

/// Finite-truncation stand-in for the limsup criterion: examine the last
/// window_fraction of indices and compare max(mu_n - lambda_n) against eps.
/// eps should absorb the eigenvalue discretization error at those indices;
/// mesh_error_eps provides the k^4 h^2 model (error ~ lambda^2 h^2 / 12,
/// taken with a 3x safety factor).
struct TailPolicy {
  double window_fraction = 0.3;
  double eps = 1e-8;
  double mu1_tol = 1e-8;

  static double mesh_error_eps(double lambda_at_window, double h) {
    return 3.0 * lambda_at_window * lambda_at_window * h * h / 12.0;
  }
};

/// Checks of the extended Ambarzumyan hypotheses: mu_1 >= 0 and the tail
/// criterion. A pass means "consistent with V = 0"; finitely many
/// eigenvalues can never prove V = 0. Resolution rule: with margin
/// m = max_tail_diff / eps, m <= 0.9 passes, m >= 1.1 fails, anything in
/// between is indeterminate.
inline Verdict ambarzumyan_verdict(const SpectrumPair& sp, const TailPolicy& policy = {}) {
  sp.validate();
  const size_t n = sp.lambda.size();
  if (n < 50) throw ValidationError("ambarzumyan_verdict needs at least 50 eigenvalues");
  Verdict v;
  v.name = "ambarzumyan";
  const double mu1 = sp.mu[0];
  const bool mu1_ok = mu1 >= -policy.mu1_tol;

  const size_t start = n - std::max<size_t>(1, static_cast<size_t>(std::floor(policy.window_fraction * n)));
  double max_diff = -std::numeric_limits<double>::infinity();
  for (size_t i = start; i < n; ++i) max_diff = std::max(max_diff, sp.mu[i] - sp.lambda[i]);

  v.metrics = {{"mu1", mu1},
               {"tail_max_diff", max_diff},
               {"tail_eps", policy.eps},
               {"tail_window_start", static_cast<double>(start + 1)}};

  if (!mu1_ok) {
    v.status = VerdictStatus::fail;
    v.rationale = "hypotheses violated: mu_1 < 0";
    return v;
  }
  bool tail_ok, borderline = false;
  if (policy.eps > 0.0) {
    const double margin = max_diff / policy.eps;
    tail_ok = margin <= 0.9;
    borderline = margin > 0.9 && margin < 1.1;
  } else {
    tail_ok = max_diff <= 0.0;
  }
  if (borderline) {
    v.status = VerdictStatus::indeterminate;
    v.rationale = "tail criterion straddles the resolution threshold";
  } else if (tail_ok) {
    v.status = VerdictStatus::pass;
    v.rationale = "consistent with V = 0 (mu_1 >= 0 and tail differences within eps)";
  } else {
    v.status = VerdictStatus::fail;
    v.rationale = "hypotheses violated: limsup proxy max(mu_n - lambda_n) exceeds eps";
  }
  return v;
}

/// End-to-end self-test of the mu_1 >= 0, int V <= 0 => V = 0 theorem: if
/// both hypotheses hold numerically for a nonzero V the pipeline is broken.
inline Verdict premain_verdict(const SpectrumPair& sp, double int_v) {
  sp.validate();
  Verdict v;
  v.name = "premain";
  const double tol = 1e-8;
  const double mu1 = sp.mu[0];
  const bool v_known_zero = sp.sup_v && *sp.sup_v == 0.0;
  v.metrics = {{"mu1", mu1}, {"int_v", int_v}};
  if (v_known_zero) {
    v.status = VerdictStatus::pass;
    v.rationale = "V = 0: trivially consistent";
    return v;
  }
  if (mu1 >= -tol && int_v <= tol) {
    v.status = VerdictStatus::fail;
    v.rationale = "contradiction: mu_1 >= 0 and int V <= 0 with V != 0 (numerical pipeline bug)";
    return v;
  }
  if (int_v > tol) {
    v.status = VerdictStatus::not_applicable;
    v.rationale = "int V > 0: theorem hypotheses not all met";
    return v;
  }
  v.status = VerdictStatus::pass;
  v.rationale = "consistent with the contrapositive: int V <= 0 and V != 0 forces mu_1 < 0";
  return v;
}

/// Exact finite identity sum mu - sum lambda = sum V for combinatorial graphs.
inline Verdict combinatorial_trace_identity(const CombinatorialGraph& g) {
  Verdict v;
  v.name = "combinatorial-trace-identity";
  const CombinatorialGraph g0(
      g.size(),
      [&] {
        std::vector<double> a(static_cast<size_t>(g.size()) * g.size());
        for (int i = 0; i < g.size(); ++i)
          for (int j = 0; j < g.size(); ++j) a[static_cast<size_t>(i) * g.size() + j] = g.weight(i, j);
        return a;
      }(),
      std::vector<double>(g.size(), 0.0));
  const auto lam = eigenvalues_only(assemble_combinatorial(g0));
  const auto mu = eigenvalues_only(assemble_combinatorial(g));
  double sum_l = 0.0, sum_m = 0.0;
  for (double x : lam) sum_l += x;
  for (double x : mu) sum_m += x;
  const double sum_v = g.potential_sum();
  const double gap = std::abs(sum_m - sum_l - sum_v);
  const double scale = g.size() * g.sup_potential() + std::abs(sum_l);
  v.metrics = {{"sum_mu_minus_lambda", sum_m - sum_l}, {"sum_v", sum_v}, {"gap", gap}};
  v.status = (gap <= 1e-9 * std::max(1.0, scale)) ? VerdictStatus::pass : VerdictStatus::fail;
  v.rationale = "tr[H - H0] = tr[V] identity";
  return v;
}

// ---------------------------------------------------------------------------
// Ground-state coupling curve F(s) = mu_1(H0 + sV)
// ---------------------------------------------------------------------------

struct GroundStateCurve {
  std::vector<double> s;
  std::vector<double> f;
  double fprime0 = 0.0;           // forward difference at s = 0
  double max_second_diff = 0.0;   // concavity: should be <= ~0
};

/// Sweep mu_1(H0 + sV) over an ascending s grid containing 0, on one fixed
/// mesh. F is concave and F(0) = 0; F'(0) should match |X|^{-1} int V.
inline GroundStateCurve ground_state_curve(const MetricGraph& g, const PotentialSpec& v,
                                           std::span<const double> s_grid, double target_h) {
  if (s_grid.size() < 3) throw ValidationError("s grid needs at least 3 points");
  const auto h0 = assemble_h0(g, target_h);
  const auto vnode = node_potential_values(*h0.mesh(), v);
  const double sup = v.sup_norm();
  GroundStateCurve curve;
  int zero_index = -1;
  for (size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (i > 0 && !(s > s_grid[i - 1])) throw ValidationError("s grid must be strictly increasing");
    if (s == 0.0) zero_index = static_cast<int>(i);
    std::vector<double> sv(vnode.size());
    for (size_t k = 0; k < vnode.size(); ++k) sv[k] = s * vnode[k];
    const auto op = (s == 0.0) ? h0 : h0.shifted_diagonal(sv, OperatorKind::h, std::abs(s) * sup);
    curve.s.push_back(s);
    curve.f.push_back(eigenvalues_only(op)[0]);
  }
  if (zero_index < 0) throw ValidationError("s grid must include 0");
  if (zero_index + 1 >= static_cast<int>(curve.s.size()))
    throw ValidationError("s grid needs a point after 0 for the forward difference");
  curve.fprime0 = (curve.f[zero_index + 1] - curve.f[zero_index]) /
                  (curve.s[zero_index + 1] - curve.s[zero_index]);
  for (size_t i = 1; i + 1 < curve.f.size(); ++i)
    curve.max_second_diff = std::max(curve.max_second_diff,
                                     curve.f[i - 1] - 2.0 * curve.f[i] + curve.f[i + 1]);
  return curve;
}

// ---------------------------------------------------------------------------
// Grids
// ---------------------------------------------------------------------------

/// Decreasing geometric grid from t_max down to t_min (inclusive endpoints).
inline std::vector<double> geometric_grid_desc(double t_min, double t_max, int points) {
  if (!(t_min > 0.0) || !(t_min < t_max) || points < 2) throw ValidationError("bad geometric grid");
  std::vector<double> g(points);
  const double r = std::pow(t_min / t_max, 1.0 / (points - 1));
  for (int i = 0; i < points; ++i) g[i] = t_max * std::pow(r, i);
  g.back() = t_min;
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (!(lo < hi) || points < 2) throw ValidationError("bad linear grid");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

}  // namespace qgheat
