#include "opa/element.hpp"

#include "opa/error.hpp"

namespace opa {

Element::Element(TruncSeries s) {
  if (s.is_polynomial())
    value_ = s.to_poly();
  else
    value_ = std::move(s);
}

const CPoly& Element::poly() const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return *p;
  throw Error(ErrorCode::invalid_argument, "element is not a polynomial");
}

TruncSeries Element::series() const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return TruncSeries::from_poly(*p);
  return std::get<TruncSeries>(value_);
}

cplx Element::at_zero() const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return (*p)[0];
  return std::get<TruncSeries>(value_).coeff(0);
}

Element Element::shifted(std::size_t k) const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return p->shifted(k);
  return std::get<TruncSeries>(value_).shifted(k);
}

Element Element::times(const CPoly& q) const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return *p * q;
  return series_mul(TruncSeries::from_poly(q), std::get<TruncSeries>(value_));
}

Element Element::scaled(cplx c) const {
  if (const auto* p = std::get_if<CPoly>(&value_)) return *p * c;
  return std::get<TruncSeries>(value_).scaled(c);
}

Element Element::minus(const Element& other) const {
  if (is_polynomial() && other.is_polynomial()) return poly() - other.poly();
  return series_add(series(), other.series(), -1.0);
}

}  // namespace opa
