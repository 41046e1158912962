// qgheat: spectra, heat traces, sigma(t) diagnostics and inverse-spectral
// consistency checks for Schrodinger operators on metric graphs.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qgheat/qgheat.hpp"

namespace {

using namespace qgheat;

struct RunConfig {
  std::string graph_path;
  std::string builtin;
  std::string potential = "zero";
  double target_h = 0.01;
  int neigs = 0;  // 0 = all
  double t_min = 1e-3, t_max = 1.0;
  int t_points = 20;
  double s_min = -2.0, s_max = 2.0;
  int s_points = 41;
  std::string out_path;
  std::uint32_t seed = 1;
  // kernel query
  double t = 0.1;
  int x_edge = 0, y_edge = 0;
  double x_s = 0.5, y_s = 0.5;
};

struct Problem {
  MetricGraph graph;
  PotentialSpec potential;
};

EdgePotential parse_potential_flag(const std::string& s) {
  if (s == "zero") return ConstantPotential{0.0};
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(s.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      bool ok = false;
      const double x = parse_double(tok, ok);
      if (!ok) throw ValidationError("cannot parse number '" + tok + "' in --potential spec");
      args.push_back(x);
    }
  }
  if (kind == "const" && args.size() == 1) return ConstantPotential{args[0]};
  if (kind == "cos" && args.size() == 2) return CosinePotential{args[0], static_cast<int>(args[1])};
  if (kind == "bump" && args.size() == 3) return BumpPotential{args[0], args[1], args[2]};
  throw ValidationError("bad --potential spec '" + s +
                        "' (expected zero | const:C | cos:AMP,MODE | bump:AMP,CENTER,WIDTH)");
}

Problem load_problem(const RunConfig& cfg) {
  if (cfg.graph_path.empty() == cfg.builtin.empty())
    throw ValidationError("exactly one of --graph and --builtin is required");
  if (!cfg.graph_path.empty()) {
    std::ifstream in(cfg.graph_path);
    if (!in) throw ValidationError("cannot open graph file: " + cfg.graph_path);
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_graph_file(buf.str());
    Problem p{std::move(parsed.graph), std::move(parsed.potential)};
    if (cfg.potential != "zero") p.potential.set_all_edges(parse_potential_flag(cfg.potential));
    return p;
  }
  MetricGraph g = make_builtin(cfg.builtin);
  PotentialSpec v(g);
  v.set_all_edges(parse_potential_flag(cfg.potential));
  return Problem{std::move(g), std::move(v)};
}

/// Output sink: --out file if given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw ValidationError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

SpectrumPair paired_spectra(const Problem& p, double target_h) {
  auto h0 = assemble_h0(p.graph, target_h);
  SpectrumPair sp;
  sp.lambda = eigenvalues_only(h0);
  sp.mu = p.potential.is_zero() ? sp.lambda : eigenvalues_only(assemble_h(h0, p.potential));
  sp.volume = p.graph.total_volume();
  sp.sup_v = p.potential.sup_norm();
  sp.int_v = p.potential.integral();
  return sp;
}

int cmd_spectrum(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  auto sp = paired_spectra(p, cfg.target_h);
  Sink sink(cfg.out_path);
  const size_t count = cfg.neigs > 0 ? static_cast<size_t>(cfg.neigs) : sp.lambda.size();
  write_spectrum_csv(sink.stream(), sp.lambda, sp.mu, count);
  return 0;
}

int cmd_sigma(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  auto sp = paired_spectra(p, cfg.target_h);
  auto curve = sigma_of_t(sp, geometric_grid_desc(cfg.t_min, cfg.t_max, cfg.t_points));
  Sink sink(cfg.out_path);
  write_sigma_csv(sink.stream(), curve);
  std::cerr << "sigma limit = " << format_double(curve.limit) << " +- "
            << format_double(curve.uncertainty)
            << "  (a * int V = " << format_double(kInvSqrt4Pi * *sp.int_v) << ")\n";
  if (curve.tail_flagged) {
    std::cerr << "warning: truncation tail exceeds 10% of |sigma| on part of the grid; "
                 "refine the mesh or raise t_min\n";
    return 3;
  }
  return 0;
}

int cmd_residual(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  auto h0 = assemble_h0(p.graph, cfg.target_h);
  auto sd0 = eigendecompose(h0);
  auto sdh = eigendecompose(assemble_h(h0, p.potential));
  auto rep = trace_expansion_residual(sd0, sdh, p.potential,
                                      geometric_grid_desc(cfg.t_min, cfg.t_max, cfg.t_points));
  Sink sink(cfg.out_path);
  write_residual_csv(sink.stream(), rep);
  std::cerr << "fitted |rho| exponent = " << format_double(rep.fitted_exponent) << " +- "
            << format_double(rep.exponent_stderr) << "\n";
  return 0;
}

int cmd_curve(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  auto curve = ground_state_curve(p.graph, p.potential,
                                  linear_grid(cfg.s_min, cfg.s_max, cfg.s_points), cfg.target_h);
  Sink sink(cfg.out_path);
  write_curve_csv(sink.stream(), curve);
  std::cerr << "F'(0) = " << format_double(curve.fprime0) << "  (|X|^-1 int V = "
            << format_double(p.potential.integral() / p.graph.total_volume())
            << "), max second difference = " << format_double(curve.max_second_diff) << "\n";
  return 0;
}

void print_verdict(std::ostream& os, const Verdict& v) {
  os << v.name << ": " << to_string(v.status) << "\n  " << v.rationale << "\n";
  for (const auto& [key, val] : v.metrics) os << "  " << key << " = " << format_double(val) << "\n";
}

/// Seeded spot check of the kernel sandwich e^{-|V|t} K0 <= K <= e^{|V|t} K0
/// at random points with t >= 10 h^2.
Verdict sandwich_spot_check(const Problem& p, const SpectralData& sd0, const SpectralData& sdh,
                            std::uint32_t seed) {
  Verdict v;
  v.name = "kernel-sandwich-spot-check";
  const double sup = p.potential.sup_norm();
  const double h = sd0.mesh->max_h;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> tdist(10.0 * h * h, 0.5);
  std::uniform_int_distribution<int> edist(0, static_cast<int>(p.graph.edges().size()) - 1);
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    const double t = tdist(rng);
    const int ex = edist(rng), ey = edist(rng);
    std::uniform_real_distribution<double> xs(0.0, p.graph.edges()[ex].length);
    std::uniform_real_distribution<double> ys(0.0, p.graph.edges()[ey].length);
    const PointOnGraph x{ex, xs(rng)}, y{ey, ys(rng)};
    const double k0 = kernel_eval(sd0, t, x, y);
    const double k = kernel_eval(sdh, t, x, y);
    worst = std::min(worst, k - std::exp(-sup * t) * k0);
    worst = std::min(worst, std::exp(sup * t) * k0 - k);
  }
  v.metrics = {{"worst_slack", worst}};
  v.status = worst >= -1e-6 ? VerdictStatus::pass : VerdictStatus::fail;
  v.rationale = "10 random (t,x,y) samples of the heat-kernel sandwich";
  return v;
}

int cmd_check(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  auto h0 = assemble_h0(p.graph, cfg.target_h);
  auto sd0 = eigendecompose(h0);
  auto sdh = p.potential.is_zero() ? sd0 : eigendecompose(assemble_h(h0, p.potential));

  SpectrumPair sp;
  sp.lambda = sd0.eigenvalues;
  sp.mu = sdh.eigenvalues;
  sp.volume = p.graph.total_volume();
  sp.sup_v = p.potential.sup_norm();
  sp.int_v = p.potential.integral();

  TailPolicy policy;
  const size_t wstart = sp.lambda.size() - std::max<size_t>(1, sp.lambda.size() * 3 / 10);
  policy.eps = std::max(1e-8, TailPolicy::mesh_error_eps(sp.lambda[wstart], sd0.mesh->max_h));

  Sink sink(cfg.out_path);
  auto& os = sink.stream();
  os << "graph volume = " << format_double(sp.volume)
     << ", nodes = " << sd0.size() << ", h = " << format_double(sd0.mesh->max_h) << "\n";
  os << "||V||_inf = " << format_double(*sp.sup_v) << ", int V = " << format_double(*sp.int_v)
     << "\n\n";
  print_verdict(os, ambarzumyan_verdict(sp, policy));
  os << "\n";
  print_verdict(os, premain_verdict(sp, *sp.int_v));
  os << "\n";
  print_verdict(os, sandwich_spot_check(p, sd0, sdh, cfg.seed));
  return 0;
}

int cmd_kernel(const RunConfig& cfg) {
  auto p = load_problem(cfg);
  const PointOnGraph x{cfg.x_edge, cfg.x_s}, y{cfg.y_edge, cfg.y_s};
  p.graph.check_point(x);
  p.graph.check_point(y);
  auto h0 = assemble_h0(p.graph, cfg.target_h);
  auto sd0 = eigendecompose(h0);
  auto sdh = p.potential.is_zero() ? sd0 : eigendecompose(assemble_h(h0, p.potential));
  const double k0 = kernel_eval(sd0, cfg.t, x, y);
  const double k = kernel_eval(sdh, cfg.t, x, y);
  const double sup = p.potential.sup_norm();

  Sink sink(cfg.out_path);
  auto& os = sink.stream();
  os << "t = " << format_double(cfg.t) << "\n";
  os << "K0(t,x,y) = " << format_double(k0) << "\n";
  os << "K(t,x,y)  = " << format_double(k) << "\n";
  os << "sandwich: [" << format_double(std::exp(-sup * cfg.t) * k0) << ", "
     << format_double(std::exp(sup * cfg.t) * k0) << "]\n";
  os << "1/|X| = " << format_double(1.0 / p.graph.total_volume()) << "\n";
  if (p.graph.edges().size() == 1 && p.graph.vertex_count() == 2) {
    const auto cf = ClosedFormKernel::neumann(p.graph.edges()[0].length);
    os << "closed form K0 = " << format_double(cf.eval(cfg.t, cfg.x_s, cfg.y_s)) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heat-kernel spectral toolkit for metric graphs"};
  app.require_subcommand(1);
  RunConfig cfg;

  app.set_help_flag("--help", "print help");
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print help");  // frees -h/--h for the mesh spacing
    sub->add_option("--graph", cfg.graph_path, "GRAPH file path");
    sub->add_option("--builtin", cfg.builtin, "builtin graph: interval | loop | star3 | lasso");
    sub->add_option("--potential", cfg.potential,
                    "potential on every edge: zero | const:C | cos:AMP,MODE | bump:AMP,CENTER,WIDTH");
    sub->add_option("--h", cfg.target_h, "mesh target spacing")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "seed for randomized self-checks");
    sub->add_option("--out", cfg.out_path, "output path (default stdout)");
  };
  auto add_tgrid = [&](CLI::App* sub) {
    sub->add_option("--tmin", cfg.t_min, "smallest t")->check(CLI::PositiveNumber);
    sub->add_option("--tmax", cfg.t_max, "largest t")->check(CLI::PositiveNumber);
    sub->add_option("--tpoints", cfg.t_points, "t-grid size (geometric)")->check(CLI::Range(2, 100000));
  };

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue pairs (n, lambda_n, mu_n) as CSV");
  add_common(spectrum);
  spectrum->add_option("--neigs", cfg.neigs, "eigenvalue count to report (0 = all)");

  auto* sigma = app.add_subcommand("sigma", "sigma(t) curve and extrapolated t -> 0 limit");
  add_common(sigma);
  add_tgrid(sigma);

  auto* residual = app.add_subcommand("residual", "trace-expansion residual rho(t) and its order");
  add_common(residual);
  add_tgrid(residual);

  auto* curve = app.add_subcommand("curve", "ground-state coupling curve F(s) = mu_1(H0 + sV)");
  add_common(curve);
  curve->add_option("--smin", cfg.s_min, "smallest s");
  curve->add_option("--smax", cfg.s_max, "largest s");
  curve->add_option("--spoints", cfg.s_points, "s-grid size")->check(CLI::Range(3, 100000));

  auto* check = app.add_subcommand("check", "inverse-spectral consistency verdicts");
  add_common(check);

  auto* kernel = app.add_subcommand("kernel", "heat kernel values and sandwich bounds at a point");
  add_common(kernel);
  kernel->add_option("--t", cfg.t, "time")->check(CLI::PositiveNumber);
  kernel->add_option("--xedge", cfg.x_edge, "edge index of x");
  kernel->add_option("--xs", cfg.x_s, "arclength of x along its edge");
  kernel->add_option("--yedge", cfg.y_edge, "edge index of y");
  kernel->add_option("--ys", cfg.y_s, "arclength of y along its edge");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (sigma->parsed()) return cmd_sigma(cfg);
    if (residual->parsed()) return cmd_residual(cfg);
    if (curve->parsed()) return cmd_curve(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (kernel->parsed()) return cmd_kernel(cfg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
