#include <cmath>
#include <random>

#include "doctest.h"
#include "opa/element.hpp"
#include "opa/error.hpp"
#include "opa/numeric.hpp"
#include "opa/poly.hpp"
#include "opa/series.hpp"
#include "oracles.hpp"

using namespace opa;

namespace {

CPoly random_poly(std::mt19937_64& gen, int degree) {
  std::normal_distribution<double> d;
  std::vector<cplx> c(static_cast<std::size_t>(degree) + 1);
  for (auto& x : c) x = {d(gen), d(gen)};
  return CPoly(c);
}

}  // namespace

TEST_CASE("factorials and geometric tails") {
  CHECK(falling_factorial(5, 0) == 1.0);
  CHECK(falling_factorial(5, 3) == 60.0);
  CHECK(falling_factorial(2, 3) == 0.0);
  CHECK(rising_factorial(0, 3) == 6.0);
  CHECK(rising_factorial(-2, 3) == 0.0);
  CHECK(ipow(cplx{0, 0}, 0) == cplx{1, 0});
  CHECK(std::abs(ipow(cplx{0, 1}, 6) - cplx{-1, 0}) < 1e-15);

  // sum_{k>=10} 2^-k = 2^-9, sum_{k>=3} (k+1)^-2 = zeta(2) - 1 - 1/4 - 1/9
  CHECK(power_geometric_tail(0, 0.5, 10) >= std::ldexp(1.0, -9) * (1 - 1e-15));
  CHECK(power_geometric_tail(0, 0.5, 10) <= std::ldexp(1.0, -9) * 1.01);
  const double z2tail = static_cast<double>(oracle::zeta2()) - 1 - 0.25 - 1.0 / 9;
  CHECK(power_geometric_tail(-2, 1.0, 3) >= z2tail);
  CHECK(power_geometric_tail(-2, 1.0, 3) <= z2tail * 1.5);
  CHECK(power_geometric_tail(-1, 1.0, 3) == kInfinity);
}

TEST_CASE("compensated sum keeps small terms") {
  CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 10; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value().real() == 10.0);
}

TEST_CASE("polynomial arithmetic") {
  const CPoly p{1.0, -1.0};
  CHECK(p.degree() == 1);
  CHECK(CPoly{}.degree() == -1);
  CHECK(CPoly({1.0, 0.0, 0.0}).degree() == 0);
  CHECK((p * p) == CPoly{1.0, -2.0, 1.0});
  CHECK(p.eval(0.5) == cplx{0.5, 0});
  CHECK(p.shifted(2) == CPoly{0.0, 0.0, 1.0, -1.0});
  CHECK(CPoly{1.0, 2.0, 3.0}.derivative(2) == CPoly{6.0});
  CHECK(CPoly{2.0, 4.0}.monic() == CPoly{0.5, 1.0});
  CHECK(CPoly({1.0, 1e-17}).normalized().degree() == 0);

  cplx rem;
  const CPoly q = deflate(CPoly{-0.5, 1.0} * CPoly{-2.0, 1.0}, 2.0, &rem);
  CHECK(std::abs(rem) < 1e-15);
  CHECK(std::abs(q[0] + 0.5) < 1e-15);

  // 1/(1-z) to order 4
  CHECK(formal_quotient(CPoly{1.0}, CPoly{1.0, -1.0}, 4) == CPoly{1.0, 1.0, 1.0, 1.0, 1.0});
}

TEST_CASE("polynomial product matches the oracle convolution") {
  auto gen = oracle::rng(7);
  for (int t = 0; t < 20; ++t) {
    const CPoly a = random_poly(gen, t % 6);
    const CPoly b = random_poly(gen, (t * 3) % 5);
    const auto ref = oracle::mul(oracle::widen({a.coeffs().begin(), a.coeffs().end()}),
                                 oracle::widen({b.coeffs().begin(), b.coeffs().end()}));
    const CPoly c = poly_mul(a, b);
    REQUIRE(c.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(std::abs(oracle::lcplx(c[k]) - ref[k]) < 1e-13L);
  }
}

TEST_CASE("geometric and Blaschke series") {
  const TruncSeries g = TruncSeries::geometric(0.5);
  CHECK(!g.is_polynomial());
  CHECK(g.coeff(3) == cplx{0.125, 0});
  CHECK(std::abs(g.eval(0.5).value - cplx{4.0 / 3.0, 0}) <= g.eval(0.5).error + 1e-15);

  const cplx beta{0.3, -0.4};
  const TruncSeries b = TruncSeries::blaschke_factor(beta, 40);
  const auto ref = oracle::blaschke(beta, 40);
  for (std::size_t k = 0; k < 40; ++k) CHECK(std::abs(oracle::lcplx(b.coeff(k)) - ref[k]) < 1e-15L);
  // envelope covers the exact coefficients past the prefix
  const auto far = oracle::blaschke(beta, 200);
  for (std::size_t k = 40; k < 200; ++k) CHECK(std::abs(far[k]) <= b.tail().bound(k) * (1 + 1e-12));

  // z for beta = 0
  const TruncSeries z = TruncSeries::blaschke_factor(0.0);
  CHECK(z.is_polynomial());
  CHECK(z.to_poly() == CPoly{0.0, 1.0});
}

TEST_CASE("rational series from the worked example") {
  // (1/2 - z) / (1 - z/2) * 1/(1 - z/3) ... here only (1/2 - z) * 1/(1 - z)
  const TruncSeries s = series_mul(TruncSeries::from_poly(CPoly{0.5, -1.0}), TruncSeries::geometric(1.0 / 2.0));
  CHECK(std::abs(s.coeff(0) - cplx{0.5, 0}) < 1e-15);
  CHECK(std::abs(s.coeff(1) - cplx{-0.75, 0}) < 1e-15);
  CHECK(std::abs(s.coeff(2) - cplx{-0.375, 0}) < 1e-15);

  // num/den cancels a common factor exactly
  const TruncSeries r = TruncSeries::rational(CPoly{1.0, -0.5} * CPoly{1.0, 1.0}, CPoly{1.0, -0.5});
  CHECK(r.is_polynomial());
  CHECK(std::abs(r.to_poly()[1] - cplx{1.0, 0}) < 1e-14);

  CHECK_THROWS_AS(TruncSeries::rational(CPoly{1.0}, CPoly{1.0, -2.0}), Error);
}

TEST_CASE("series accessors and errors") {
  const TruncSeries g = TruncSeries::geometric(0.25, 8);
  CHECK(g.size() == 8);
  CHECK(g.extended(30).size() >= 30);
  CHECK(std::abs(g.extended(30).coeff(20) - std::pow(0.25, 20)) < 1e-25);
  try {
    (void)TruncSeries({1.0, 2.0}, Envelope{1.0, 0.5, 0.0}).coeff(5);
    FAIL("expected index_out_of_range");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::index_out_of_range);
  }
  CHECK(taylor_truncate(g, 2) == CPoly{1.0, 0.25, 0.0625});
  CHECK(tail_length(Envelope{1.0, 0.5, 0.0}, 1e-10) >= 33);

  const TruncSeries sum = series_add(g, g, -1.0);
  CHECK(std::abs(sum.coeff(3)) < 1e-18);
}

TEST_CASE("element normalizes polynomial series") {
  const Element e(TruncSeries::from_poly(CPoly{1.0, 2.0}));
  CHECK(e.is_polynomial());
  CHECK(e.poly() == CPoly{1.0, 2.0});
  CHECK(e.at_zero() == cplx{1.0, 0});
  CHECK(e.shifted(1).poly() == CPoly{0.0, 1.0, 2.0});

  const Element s(TruncSeries::geometric(0.5));
  CHECK(!s.is_polynomial());
  CHECK_THROWS_AS((void)s.poly(), Error);
  const Element prod = s.times(CPoly{1.0, -0.5});
  CHECK(prod.is_polynomial());
  CHECK(std::abs(prod.poly()[0] - cplx{1.0, 0}) < 1e-14);
  CHECK(prod.poly().normalized().degree() == 0);
}
