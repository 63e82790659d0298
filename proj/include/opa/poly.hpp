#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "opa/numeric.hpp"

namespace opa {

/// Dense complex polynomial; coeffs()[k] is the z^k coefficient.
///
/// Exact trailing zeros are dropped on construction so that degree() is
/// meaningful. Near-zero trailing coefficients are only removed by an explicit
/// normalized() call.
class CPoly {
 public:
  CPoly() = default;
  explicit CPoly(std::vector<cplx> coeffs);
  CPoly(std::initializer_list<cplx> coeffs);

  static CPoly constant(cplx c) { return CPoly({c}); }
  static CPoly monomial(std::size_t k, cplx c = 1.0);

  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  std::size_t size() const { return coeffs_.size(); }
  std::span<const cplx> coeffs() const { return coeffs_; }
  /// Coefficient of z^k, zero past the degree.
  cplx operator[](std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : cplx{}; }

  cplx eval(cplx z) const;
  /// Sum of |a_k| |z|^k, the natural scale for rounding error in eval().
  double abs_eval(double radius) const;
  CPoly derivative(unsigned order = 1) const;
  /// z^k * p
  CPoly shifted(std::size_t k) const;
  CPoly normalized(double tol = 1e-14) const;
  /// p / leading coefficient.
  CPoly monic() const;
  double max_abs_coeff() const;

  CPoly& operator+=(const CPoly& other);
  CPoly& operator-=(const CPoly& other);
  CPoly& operator*=(cplx c);

  friend CPoly operator+(CPoly a, const CPoly& b) { return a += b; }
  friend CPoly operator-(CPoly a, const CPoly& b) { return a -= b; }
  friend CPoly operator*(CPoly a, cplx c) { return a *= c; }
  friend CPoly operator*(cplx c, CPoly a) { return a *= c; }
  friend CPoly operator*(const CPoly& a, const CPoly& b);
  friend bool operator==(const CPoly&, const CPoly&) = default;

 private:
  void trim_exact_zeros();
  std::vector<cplx> coeffs_;
};

CPoly poly_mul(const CPoly& a, const CPoly& b);

/// First n+1 Taylor coefficients of num/den (formal division, den(0) != 0).
CPoly formal_quotient(const CPoly& num, const CPoly& den, std::size_t n);

/// Divides p by (z - root), returning the quotient; the remainder p(root)
/// is written to *remainder when non-null.
CPoly deflate(const CPoly& p, cplx root, cplx* remainder = nullptr);

}  // namespace opa
