#include "opa/numeric.hpp"

#include <cmath>

#include "opa/error.hpp"

namespace opa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::envelope_overflow: return "envelope_overflow";
    case ErrorCode::cannot_certify: return "cannot_certify";
    case ErrorCode::not_reproducible: return "not_reproducible";
    case ErrorCode::undecidable: return "undecidable";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::no_convergence: return "no_convergence";
    case ErrorCode::orthogonal_data: return "orthogonal_data";
    case ErrorCode::ill_conditioned: return "ill_conditioned";
  }
  return "unknown";
}

cplx ipow(cplx z, std::size_t e) {
  cplx result = 1.0;
  cplx base = z;
  while (e > 0) {
    if (e & 1u) result *= base;
    base *= base;
    e >>= 1u;
  }
  return result;
}

double falling_factorial(double k, unsigned n) {
  double p = 1.0;
  for (unsigned j = 0; j < n; ++j) p *= (k - j);
  return p;
}

double rising_factorial(double k, unsigned n) {
  double p = 1.0;
  for (unsigned j = 1; j <= n; ++j) p *= (k + j);
  return p;
}

double power_geometric_tail(double exponent, double ratio, std::size_t start) {
  if (ratio < 0.0 || ratio > 1.0 || std::isnan(ratio)) return kInfinity;
  if (ratio == 0.0) return start == 0 ? 1.0 : 0.0;
  const double n = static_cast<double>(start);
  if (ratio < 1.0) {
    const double first = std::pow(n + 1.0, exponent) * std::pow(ratio, n);
    if (exponent <= 0.0) return first / (1.0 - ratio);
    // consecutive-term ratio is decreasing in k, so bound it at k = start
    const double q = std::pow((n + 2.0) / (n + 1.0), exponent) * ratio;
    if (q >= 1.0) return kInfinity;
    return first / (1.0 - q);
  }
  // ratio == 1: (k+1)^e <= int_k^{k+1} x^e dx for decreasing x^e
  if (exponent >= -1.0) return kInfinity;
  if (start == 0) return 1.0 + 1.0 / (-exponent - 1.0);
  return std::pow(n, exponent + 1.0) / (-exponent - 1.0);
}

}  // namespace opa
