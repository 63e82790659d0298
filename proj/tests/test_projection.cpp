#include <cmath>

#include "doctest.h"
#include "opa/engine.hpp"
#include "opa/error.hpp"
#include "opa/projection.hpp"
#include "oracles.hpp"

using namespace opa;

TEST_CASE("factorial basis rows") {
  const auto m = factorial_convert(10);
  CHECK(m.coeffs[0] == std::vector<std::int64_t>{1});
  CHECK(m.coeffs[1] == std::vector<std::int64_t>{1, 1});
  CHECK(m.coeffs[2] == std::vector<std::int64_t>{2, 4, 1});
  for (unsigned n = 0; n <= 10; ++n)
    for (std::int64_t k = -5; k <= 44; ++k) {
      __int128 s = 0;
      for (unsigned j = 0; j <= n; ++j) s += static_cast<__int128>(m.coeffs[n][j]) * oracle::falling(k, j);
      CHECK(s == oracle::rising(k, n));
    }
  CHECK_THROWS_AS(factorial_convert(40), Error);
}

TEST_CASE("zero classification") {
  const auto h2 = WeightSequence::hardy();
  const auto c = classify_zeros(h2, CPoly{-0.5, 1.0} * CPoly{-2.0, 1.0});
  REQUIRE(c.zeros.size() == 2);
  CHECK(c.Z.size() >= 1);
  CHECK(c.Z[0].size() == 1);
  CHECK(c.ksf_dimension() == 2);
  CHECK(*c.R == 0);

  const auto d = classify_zeros(h2, CPoly{1.0, -1.0});
  CHECK(!d.R.has_value());
  CHECK(d.ksf_dimension() == 1);

  // double zero on the circle in D_4: orders 0 and 1 reproducible
  const auto d4 = classify_zeros(WeightSequence::dirichlet(4.0), CPoly{1.0, -1.0} * CPoly{1.0, -1.0});
  CHECK(*d4.R == 1);
  CHECK(d4.ksf_dimension() == 3);

  // undecidable custom tail at the circle
  const auto u = classify_zeros(WeightSequence::custom({1.0, 2.0, 3.0}), CPoly{1.0, -1.0});
  CHECK(!u.decidable);
  try {
    (void)project_unity(WeightSequence::custom({1.0, 2.0, 3.0}), CPoly{1.0, -1.0});
    FAIL("expected undecidable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undecidable);
  }
}

TEST_CASE("Hardy projections against the Blaschke closed form") {
  const auto h2 = WeightSequence::hardy();
  struct Case {
    CPoly f;
    double phi0;
  };
  const Case cases[] = {
      {CPoly{-0.5, 1.0}, 0.25},
      {CPoly{-0.5, 1.0} * CPoly{-2.0, 1.0}, 0.25},
      {CPoly{-0.5, 1.0} * CPoly{-1.0 / 3.0, 1.0}, 1.0 / 36.0},
      {CPoly{-0.5, 1.0} * CPoly{-0.5, 1.0}, 1.0 / 16.0},
      {CPoly{cplx{0, -0.4}, 1.0} * CPoly{cplx{0.1, 0.2}, 1.0}, 0.16 * 0.05},
  };
  for (const auto& c : cases) {
    const auto pr = project_unity(h2, c.f);
    CHECK(std::abs(pr.phi_at_zero - cplx{c.phi0, 0}) < 1e-10);
    CHECK(std::abs(pr.dist_sq - (1 - c.phi0)) < 1e-10);
    CHECK(pr.interpolation_residual < 1e-10);
    const auto bp = blaschke_projection(c.f);
    CHECK(std::abs(bp.phi_at_zero - pr.phi_at_zero) < 1e-10);
    for (std::size_t k = 0; k < 30; ++k) CHECK(std::abs(bp.phi.coeff(k) - pr.phi_coefficient(k)) < 1e-9);
    CHECK(pr.inner_defect(8) < 1e-9);
  }
}

TEST_CASE("phi is a limit of p_n f") {
  const auto h2 = WeightSequence::hardy();
  const CPoly f{-0.5, 1.0};
  const auto pr = project_unity(h2, f);
  const auto r = optimal_approximant(h2, f, CPoly{1.0}, 40);
  CHECK(distance_to_phi(pr, r.p_star * f) < 1e-8);
  CHECK(std::abs(r.distance_sq - pr.dist_sq) < 1e-10);
  // phi vanishes at the zero of f
  CHECK(std::abs(pr.phi_eval(0.5, 1e-12).value) < 1e-10);
  CHECK(std::abs(pr.phi_derivative_at(KernelSpec{0.5, 0}, 1e-12).value) < 1e-10);
}

TEST_CASE("cyclic and non-cyclic boundary zeros") {
  const auto h2 = WeightSequence::hardy();
  CHECK(project_unity(h2, CPoly{1.0, -1.0}).cyclic());
  CHECK(project_unity(WeightSequence::dirichlet(1.0), CPoly{1.0, -1.0}).cyclic());
  CHECK(project_unity(h2, CPoly{-2.0, 1.0}).cyclic());

  const auto d2 = project_unity(WeightSequence::dirichlet(2.0), CPoly{1.0, -1.0});
  CHECK(!d2.cyclic());
  CHECK(std::abs(d2.dist_sq - static_cast<double>(1.0L / oracle::zeta2())) < 1e-9);
  // phi_k = C / (k+1)^2 with C = -1/zeta(2), phi_0 = 1 + C
  CHECK(std::abs(d2.phi_coefficient(3) - cplx{-static_cast<double>(1.0L / oracle::zeta2()) / 16.0, 0}) < 1e-10);
}

TEST_CASE("recurrence for Phi_n = w_n phi_n") {
  const auto h2 = WeightSequence::hardy();
  const CPoly f = CPoly{-0.5, 1.0} * CPoly{-1.0 / 3.0, 1.0};
  const auto pr = project_unity(h2, f);
  const auto rec = recurrence_oracle(h2, f, pr, 40);
  CHECK(rec.residuals.size() == 40);
  CHECK(rec.max_residual < 1e-12);

  const auto d3 = WeightSequence::dirichlet(3.0);
  const CPoly g = CPoly{1.0, -1.0} * CPoly{-0.5, 1.0};
  CHECK(recurrence_oracle(d3, g, project_unity(d3, g), 40).max_residual < 1e-10);
}

TEST_CASE("Roman equivalence") {
  const auto h2 = WeightSequence::hardy();
  const CPoly a{-0.5, 1.0};
  CHECK(roman_equivalent(h2, a, a * CPoly{-2.0, 1.0}).equivalent);
  CHECK(roman_equivalent(h2, a * CPoly{-2.0, 1.0}, a).equivalent);
  CHECK(!roman_equivalent(h2, a, CPoly{-1.0 / 3.0, 1.0}).equivalent);
  CHECK(!roman_equivalent(h2, a, a * a).equivalent);
}

TEST_CASE("kernel projections in D_alpha agree with long sweeps") {
  const auto d1 = WeightSequence::dirichlet(1.0);
  const CPoly f = CPoly{-0.5, 1.0} * CPoly{1.0, -1.0};
  const auto pr = project_unity(d1, f);
  CHECK(pr.terms.size() == 1);
  const auto r = optimal_approximant(d1, f, CPoly{1.0}, 30);
  // boundary factor is cyclic in D_1; convergence to phi is slow but monotone
  CHECK(r.distance_sq >= pr.dist_sq - 1e-12);
  CHECK(r.distance_sq - pr.dist_sq < 0.05);
}
