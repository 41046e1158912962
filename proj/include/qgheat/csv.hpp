#pragma once

#include <ostream>
#include <span>

#include "qgheat/analysis.hpp"
#include "qgheat/format.hpp"

namespace qgheat {

// CSV output: comma separated, '.' decimal, header row, LF endings,
// shortest round-trip floats. Byte-identical for identical inputs.

inline void write_spectrum_csv(std::ostream& os, std::span<const double> lambda,
                               std::span<const double> mu, size_t count) {
  os << "n,lambda_n,mu_n\n";
  const size_t n = std::min({count, lambda.size(), mu.size()});
  for (size_t i = 0; i < n; ++i)
    os << (i + 1) << "," << format_double(lambda[i]) << "," << format_double(mu[i]) << "\n";
}

inline void write_sigma_csv(std::ostream& os, const SigmaCurve& curve) {
  os << "t,sigma\n";
  for (size_t i = 0; i < curve.t.size(); ++i)
    os << format_double(curve.t[i]) << "," << format_double(curve.sigma[i]) << "\n";
}

inline void write_residual_csv(std::ostream& os, const TraceExpansionReport& rep) {
  os << "t,trace0,traceH,first_order_term,rho\n";
  for (size_t i = 0; i < rep.t.size(); ++i)
    os << format_double(rep.t[i]) << "," << format_double(rep.trace0[i]) << ","
       << format_double(rep.traceH[i]) << "," << format_double(rep.first_order[i]) << ","
       << format_double(rep.rho[i]) << "\n";
}

inline void write_curve_csv(std::ostream& os, const GroundStateCurve& curve) {
  os << "s,F\n";
  for (size_t i = 0; i < curve.s.size(); ++i)
    os << format_double(curve.s[i]) << "," << format_double(curve.f[i]) << "\n";
}

}  // namespace qgheat
