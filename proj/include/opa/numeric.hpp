#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>

namespace opa {

using cplx = std::complex<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Floor added to every certified comparison so that double rounding does not
/// produce false negatives.
inline constexpr double kComparisonFloor = 1e-12;

/// A value together with a rigorous bound on its truncation error.
struct Certified {
  cplx value{};
  double error = 0.0;
};

// Neumaier compensated summation for complex terms.
class CompensatedSum {
 public:
  void add(cplx term) {
    re_.add(term.real());
    im_.add(term.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  struct Lane {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
      const double t = sum + x;
      if (std::abs(sum) >= std::abs(x))
        carry += (sum - t) + x;
      else
        carry += (x - t) + sum;
      sum = t;
    }
    double value() const { return sum + carry; }
  };
  Lane re_;
  Lane im_;
};

/// z^e with the convention 0^0 = 1.
cplx ipow(cplx z, std::size_t e);

/// P_n(k) = k(k-1)...(k-n+1), the falling factorial (P_0 = 1).
double falling_factorial(double k, unsigned n);

/// F_n(k) = (k+1)(k+2)...(k+n), the shifted rising factorial (F_0 = 1).
double rising_factorial(double k, unsigned n);

/// Upper bound for sum_{k >= start} (k+1)^exponent * ratio^k, with
/// 0 <= ratio <= 1. Returns kInfinity when the series diverges or no finite
/// bound can be derived from `start`.
double power_geometric_tail(double exponent, double ratio, std::size_t start);

}  // namespace opa
