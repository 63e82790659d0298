#include "opa/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "opa/error.hpp"

namespace opa {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw Error(ErrorCode::invalid_argument, "factorial basis overflows int64");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::invalid_argument, "factorial basis overflows int64");
  return r;
}

}  // namespace

FactorialBasisMatrix factorial_convert(unsigned N) {
  FactorialBasisMatrix m;
  m.N = N;
  m.coeffs.push_back({1});
  // F_{n+1} = (k+n+1) F_n and k P_j = P_{j+1} + j P_j
  for (unsigned n = 0; n < N; ++n) {
    const std::vector<std::int64_t>& row = m.coeffs.back();
    std::vector<std::int64_t> next(n + 2, 0);
    for (unsigned j = 0; j <= n; ++j) {
      next[j + 1] = checked_add(next[j + 1], row[j]);
      next[j] = checked_add(next[j], checked_mul(row[j], static_cast<std::int64_t>(j + n + 1)));
    }
    m.coeffs.push_back(std::move(next));
  }
  return m;
}

std::size_t ZeroClassification::ksf_dimension() const {
  std::size_t d = 1;
  for (const auto& z : Z) d += z.size();
  return d;
}

ZeroClassification classify_zeros(const WeightSequence& space, const CPoly& f) {
  require(space.is_diagonal(), "zero classification needs diagonal weights");
  require(!f.is_zero() && f[0] != cplx{}, "zero classification needs f(0) != 0");
  ZeroClassification zc;
  if (f.degree() < 1) return zc;

  for (const Root& r : poly_roots(f)) {
    ClassifiedZero z;
    z.beta = on_unit_circle(r.value) ? r.value / std::abs(r.value) : r.value;
    z.multiplicity = r.multiplicity;
    const std::size_t index = zc.zeros.size();
    for (unsigned j = 0; j < z.multiplicity; ++j) {
      ReproCertificate cert = is_reproducible(space, z.beta, j);
      const Verdict v = cert.verdict;
      if (v == Verdict::undecidable && zc.decidable) {
        zc.decidable = false;
        std::ostringstream why;
        why << "zero (" << z.beta.real() << ", " << z.beta.imag() << ") order " << j << ": " << cert.reason;
        zc.undecidable_reason = why.str();
      }
      z.orders.push_back(std::move(cert));
      if (v == Verdict::yes) {
        if (zc.Z.size() <= j) zc.Z.resize(j + 1);
        zc.Z[j].push_back(index);
        zc.R = std::max(zc.R.value_or(0), j);
      } else {
        break;  // higher orders are no easier
      }
    }
    zc.zeros.push_back(std::move(z));
  }
  return zc;
}

cplx ProjectionResult::phi_coefficient(std::size_t k) const {
  CompensatedSum acc;
  if (k == 0) acc.add(1.0);
  for (const ProjectionTerm& t : terms) acc.add(t.C * kernel_coefficient(space, t.kernel, k));
  return acc.value();
}

Certified ProjectionResult::phi_derivative_at(const KernelSpec& at, double eps) const {
  CompensatedSum acc;
  double err = 0.0;
  if (at.order == 0) acc.add(1.0);
  for (const ProjectionTerm& t : terms) {
    const Certified c = kernel_inner(space, t.kernel, at, eps);
    acc.add(t.C * c.value);
    err += std::abs(t.C) * c.error;
  }
  return {acc.value(), err};
}

Certified ProjectionResult::phi_eval(cplx z, double eps) const {
  require(std::abs(z) < 1.0 - kBoundaryTol, "phi_eval needs |z| < 1");
  return phi_derivative_at(KernelSpec{z, 0, KernelFlavor::kernel_for_derivatives}, eps);
}

double ProjectionResult::inner_defect(std::size_t max_shift, double eps) const {
  if (terms.empty()) return 0.0;
  const double phi0 = phi_at_zero.real();
  require(phi0 > 0.0, "inner normalization needs phi(0) > 0");
  // phi^(l)(beta_t) for every l up to each term's order
  std::vector<std::vector<cplx>> derivs(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t)
    for (unsigned l = 0; l <= terms[t].order; ++l)
      derivs[t].push_back(phi_derivative_at(KernelSpec{terms[t].kernel.beta, l, KernelFlavor::kernel_for_derivatives}, eps).value);

  double defect = 0.0;
  for (std::size_t j = 0; j <= max_shift; ++j) {
    // <z^j phi, phi> = (z^j phi)(0) + sum_t conj(C_t) (z^j phi)^(l_t)(beta_t)
    CompensatedSum acc;
    if (j == 0) acc.add(phi_at_zero);
    for (std::size_t t = 0; t < terms.size(); ++t) {
      const unsigned l = terms[t].order;
      const cplx beta = terms[t].kernel.beta;
      cplx d{};
      double binom = 1.0;
      for (unsigned i = 0; i <= l && i <= j; ++i) {
        d += binom * falling_factorial(static_cast<double>(j), i) * ipow(beta, j - i) * derivs[t][l - i];
        binom = binom * (l - i) / (i + 1.0);
      }
      acc.add(std::conj(terms[t].C) * d);
    }
    const cplx val = std::conj(acc.value()) / phi0;
    defect = std::max(defect, std::abs(val - (j == 0 ? 1.0 : 0.0)));
  }
  return defect;
}

ProjectionResult project_unity(const WeightSequence& space, const CPoly& f, double eps) {
  require(space.is_diagonal(), "projection of 1 needs diagonal weights");
  require(!f.is_zero() && f[0] != cplx{}, "projection of 1 needs f(0) != 0");
  require(eps > 0.0, "eps must be positive");

  ProjectionResult res;
  res.space = space;
  res.f_monic = f.monic();
  res.classification = classify_zeros(space, res.f_monic);
  const ZeroClassification& zc = res.classification;
  if (!zc.decidable) throw Error(ErrorCode::undecidable, zc.undecidable_reason);

  for (unsigned j = 0; j < zc.Z.size(); ++j)
    for (std::size_t i : zc.Z[j])
      res.terms.push_back({i, j, KernelSpec{zc.zeros[i].beta, j, KernelFlavor::kernel_for_derivatives}, 0.0});
  const std::size_t n = res.terms.size();
  res.kernel_gram = HermMatrix::identity(0);
  if (n == 0) return res;  // cyclic: phi = 1

  // A(r, c) = <k_c, k_r>, so row r of A C + delta is phi^(l_r)(beta_r).
  double err = 0.0;
  res.kernel_gram = HermMatrix::from_function(n, [&](std::size_t r, std::size_t c) {
    const Certified v = kernel_inner(space, res.terms[c].kernel, res.terms[r].kernel, eps / 10.0);
    err = std::max(err, v.error);
    return v.value;
  });
  res.gram_entry_error = err;
  const HermMatrix& A = res.kernel_gram;

  CholeskyFactor factor;
  std::vector<cplx> column;
  try {
    for (std::size_t c = 0; c < n; ++c) {
      column.resize(c + 1);
      for (std::size_t r = 0; r <= c; ++r) column[r] = A(r, c);
      factor.append(column);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::ill_conditioned, std::string("kernel Gram matrix is numerically singular: ") + e.what());
  }
  res.condition_estimate = factor.condition_estimate();
  if (res.condition_estimate > kMaxKernelCondition) {
    std::ostringstream msg;
    msg << "kernel Gram condition estimate " << res.condition_estimate << " exceeds " << kMaxKernelCondition
        << " (nearly coincident reproducible zeros?)";
    throw Error(ErrorCode::ill_conditioned, msg.str());
  }

  std::vector<cplx> rhs(n);
  for (std::size_t r = 0; r < n; ++r) rhs[r] = res.terms[r].order == 0 ? -1.0 : 0.0;
  const std::vector<cplx> C = refined_solve(A, factor, rhs);
  const std::vector<cplx> AC = A.apply(C);
  CompensatedSum phi0;
  phi0.add(1.0);
  for (std::size_t r = 0; r < n; ++r) {
    res.terms[r].C = C[r];
    res.interpolation_residual = std::max(res.interpolation_residual, std::abs(AC[r] - rhs[r]));
    if (res.terms[r].order == 0) phi0.add(C[r]);
  }
  res.phi_at_zero = phi0.value();
  res.dist_sq = 1.0 - res.phi_at_zero.real();
  return res;
}

double distance_to_phi(const ProjectionResult& phi, const CPoly& h) {
  const WeightSequence& w = phi.space;
  // <h, phi>
  CompensatedSum h_phi;
  h_phi.add(h[0]);
  for (const ProjectionTerm& t : phi.terms) h_phi.add(std::conj(t.C) * h.derivative(t.order).eval(t.kernel.beta));
  // ||phi||^2 = 1 + 2 Re sum_{order 0} C + C^H A^T C
  CompensatedSum phi_phi;
  phi_phi.add(1.0);
  const std::size_t n = phi.terms.size();
  for (std::size_t r = 0; r < n; ++r) {
    if (phi.terms[r].order == 0) phi_phi.add(2.0 * phi.terms[r].C.real());
    for (std::size_t c = 0; c < n; ++c) phi_phi.add(std::conj(phi.terms[r].C) * phi.kernel_gram(r, c) * phi.terms[c].C);
  }
  const double d2 = norm_sq(w, h) - 2.0 * h_phi.value().real() + phi_phi.value().real();
  return std::sqrt(std::max(0.0, d2));
}

BlaschkeProjection blaschke_projection(const CPoly& f) {
  require(!f.is_zero() && f[0] != cplx{}, "projection of 1 needs f(0) != 0");
  BlaschkeProjection bp;
  TruncSeries B = TruncSeries::from_poly(CPoly::constant(1.0));
  if (f.degree() >= 1) {
    for (const Root& r : poly_roots(f)) {
      if (std::abs(r.value) >= 1.0 - kBoundaryTol) continue;
      bp.zeros_in_disk.push_back(r);
      for (unsigned m = 0; m < r.multiplicity; ++m) B = series_mul(B, TruncSeries::blaschke_factor(r.value));
    }
  }
  const cplx b0 = B.coeff(0);
  bp.phi = B.scaled(std::conj(b0));
  bp.phi_at_zero = std::norm(b0);
  bp.dist_sq = 1.0 - bp.phi_at_zero.real();
  return bp;
}

RomanReport roman_equivalent(const WeightSequence& space, const CPoly& f, const CPoly& h, double eps) {
  const ProjectionResult pf = project_unity(space, f, std::min(kProjectionEps, eps / 10.0));
  const ProjectionResult ph = project_unity(space, h, std::min(kProjectionEps, eps / 10.0));
  RomanReport rep;
  constexpr double kRootMatch = 1e-7;
  std::ostringstream why;

  bool same = pf.terms.size() == ph.terms.size();
  std::vector<bool> used(ph.terms.size(), false);
  for (const ProjectionTerm& a : pf.terms) {
    if (!same) break;
    bool matched = false;
    for (std::size_t k = 0; k < ph.terms.size() && !matched; ++k) {
      const ProjectionTerm& b = ph.terms[k];
      if (used[k] || a.order != b.order || std::abs(a.kernel.beta - b.kernel.beta) > kRootMatch) continue;
      used[k] = true;
      matched = true;
      rep.max_constant_gap = std::max(rep.max_constant_gap, std::abs(a.C - b.C));
    }
    same = matched;
  }
  rep.same_zero_sets = same;
  if (!same) {
    why << "classified zero sets differ (" << pf.terms.size() << " and " << ph.terms.size()
        << " kernel terms, not matched pairwise)";
  } else {
    rep.equivalent = rep.max_constant_gap <= eps;
    why << "classified zeros agree; largest constant gap " << rep.max_constant_gap;
  }
  rep.detail = why.str();
  return rep;
}

RecurrenceReport recurrence_oracle(const WeightSequence& space, const CPoly& f, const ProjectionResult& phi,
                                   std::size_t K) {
  require(space.is_diagonal(), "recurrence needs diagonal weights");
  require(f.degree() >= 1, "recurrence needs deg f >= 1");
  const CPoly a = f.monic();
  const std::size_t d = static_cast<std::size_t>(a.degree());
  std::vector<cplx> Phi(K + d + 1);
  for (std::size_t n = 1; n < Phi.size(); ++n) Phi[n] = space.weight(n) * phi.phi_coefficient(n);

  RecurrenceReport rep;
  rep.K = K;
  for (std::size_t k = 1; k <= K; ++k) {
    CompensatedSum acc;
    for (std::size_t j = 0; j <= d; ++j) acc.add(std::conj(a[j]) * Phi[k + j]);
    rep.residuals.push_back(acc.value());
    rep.max_residual = std::max(rep.max_residual, std::abs(acc.value()));
  }
  return rep;
}

}  // namespace opa
