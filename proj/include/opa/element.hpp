#pragma once

#include <variant>

#include "opa/poly.hpp"
#include "opa/series.hpp"

namespace opa {

/// A function on the disk, held exactly as a polynomial when possible and as
/// a certified truncated series otherwise.
class Element {
 public:
  Element() : value_(CPoly{}) {}
  Element(CPoly p) : value_(std::move(p)) {}  // NOLINT(google-explicit-constructor)
  Element(TruncSeries s);                      // NOLINT(google-explicit-constructor)

  bool is_polynomial() const { return std::holds_alternative<CPoly>(value_); }
  const CPoly& poly() const;
  TruncSeries series() const;

  cplx at_zero() const;
  Element shifted(std::size_t k) const;
  Element times(const CPoly& p) const;
  Element scaled(cplx c) const;
  /// this - other
  Element minus(const Element& other) const;

 private:
  std::variant<CPoly, TruncSeries> value_;
};

}  // namespace opa
