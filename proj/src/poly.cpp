#include "opa/poly.hpp"

#include <algorithm>
#include <cmath>

#include "opa/error.hpp"

namespace opa {

CPoly::CPoly(std::vector<cplx> coeffs) : coeffs_(std::move(coeffs)) { trim_exact_zeros(); }

CPoly::CPoly(std::initializer_list<cplx> coeffs) : coeffs_(coeffs) { trim_exact_zeros(); }

CPoly CPoly::monomial(std::size_t k, cplx c) {
  std::vector<cplx> v(k + 1);
  v[k] = c;
  return CPoly(std::move(v));
}

void CPoly::trim_exact_zeros() {
  while (!coeffs_.empty() && coeffs_.back() == cplx{}) coeffs_.pop_back();
}

cplx CPoly::eval(cplx z) const {
  cplx acc{};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double CPoly::abs_eval(double radius) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * radius + std::abs(*it);
  return acc;
}

CPoly CPoly::derivative(unsigned order) const {
  if (coeffs_.size() <= order) return {};
  std::vector<cplx> out(coeffs_.size() - order);
  for (std::size_t k = order; k < coeffs_.size(); ++k)
    out[k - order] = falling_factorial(static_cast<double>(k), order) * coeffs_[k];
  return CPoly(std::move(out));
}

CPoly CPoly::shifted(std::size_t k) const {
  if (is_zero()) return {};
  std::vector<cplx> out(k, cplx{});
  out.insert(out.end(), coeffs_.begin(), coeffs_.end());
  return CPoly(std::move(out));
}

CPoly CPoly::normalized(double tol) const {
  std::vector<cplx> out = coeffs_;
  while (!out.empty() && std::abs(out.back()) <= tol) out.pop_back();
  return CPoly(std::move(out));
}

CPoly CPoly::monic() const {
  if (is_zero()) throw Error(ErrorCode::invalid_argument, "cannot monicize the zero polynomial");
  return *this * (1.0 / coeffs_.back());
}

double CPoly::max_abs_coeff() const {
  double m = 0.0;
  for (const cplx& c : coeffs_) m = std::max(m, std::abs(c));
  return m;
}

CPoly& CPoly::operator+=(const CPoly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  trim_exact_zeros();
  return *this;
}

CPoly& CPoly::operator-=(const CPoly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size());
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  trim_exact_zeros();
  return *this;
}

CPoly& CPoly::operator*=(cplx c) {
  for (cplx& a : coeffs_) a *= c;
  trim_exact_zeros();
  return *this;
}

CPoly operator*(const CPoly& a, const CPoly& b) { return poly_mul(a, b); }

CPoly poly_mul(const CPoly& a, const CPoly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<cplx> out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return CPoly(std::move(out));
}

CPoly formal_quotient(const CPoly& num, const CPoly& den, std::size_t n) {
  if (den[0] == cplx{}) throw Error(ErrorCode::invalid_argument, "formal_quotient needs den(0) != 0");
  std::vector<cplx> q(n + 1);
  const std::size_t dd = den.size();
  for (std::size_t k = 0; k <= n; ++k) {
    cplx acc = num[k];
    for (std::size_t j = 1; j < dd && j <= k; ++j) acc -= den[j] * q[k - j];
    q[k] = acc / den[0];
  }
  return CPoly(std::move(q));
}

CPoly deflate(const CPoly& p, cplx root, cplx* remainder) {
  if (p.degree() < 1) {
    if (remainder) *remainder = p[0];
    return {};
  }
  const std::size_t d = static_cast<std::size_t>(p.degree());
  std::vector<cplx> q(d);
  cplx acc = p[d];
  for (std::size_t k = d; k-- > 0;) {
    q[k] = acc;
    acc = p[k] + acc * root;
  }
  if (remainder) *remainder = acc;
  return CPoly(std::move(q));
}

}  // namespace opa
