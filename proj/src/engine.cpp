#include "opa/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "opa/error.hpp"

namespace opa {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

std::vector<cplx> conj_all(std::span<const cplx> v) {
  std::vector<cplx> out(v.begin(), v.end());
  for (cplx& x : out) x = std::conj(x);
  return out;
}

HermMatrix leading_block(const HermMatrix& g, std::size_t dim) {
  std::vector<cplx> e(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) e[i * dim + j] = g(i, j);
  return HermMatrix(dim, std::move(e));
}

double sup_distance(const CPoly& a, const CPoly& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < std::max(a.size(), b.size()); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

// Result for the leading block sys of dimension n+1 given conj(G) a = rhs solved as G x = conj(rhs).
OpaResult assemble(const GramSystem& sys, std::vector<cplx> x) {
  const std::size_t dim = sys.n + 1;
  for (cplx& v : x) v = std::conj(v);
  OpaResult r;
  r.n = sys.n;
  CompensatedSum pg;
  for (std::size_t k = 0; k < dim; ++k) pg.add(x[k] * std::conj(sys.rhs[k]));
  r.distance_sq = std::max(0.0, sys.g_norm_sq - pg.value().real());
  double resid = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < dim; ++i) acc.add(std::conj(sys.G(k, i)) * x[i]);
    resid = std::max(resid, std::abs(acc.value() - sys.rhs[k]));
  }
  r.orthogonality_residual = resid;
  r.pf_at_zero = x[0] * sys.f.at_zero();
  r.p_star = CPoly(std::move(x));
  return r;
}

std::size_t exhaustive_shift_range(const WeightSequence& space, const CPoly& h) {
  std::size_t range = h.is_zero() ? 0 : static_cast<std::size_t>(h.degree());
  if (!space.is_diagonal()) range += static_cast<std::size_t>(std::max(0, space.multiplier_poly().degree()));
  return range;
}

}  // namespace

// ---------------------------------------------------------------- systems

GramSystem GramSystem::leading(std::size_t k) const {
  require(k <= n, "leading block exceeds the system");
  GramSystem s{space, f, g, k, leading_block(G, k + 1), std::vector<cplx>(rhs.begin(), rhs.begin() + k + 1),
               f_dot_g, g_norm_sq, entry_error};
  return s;
}

GramSystem build_system(const WeightSequence& space, const Element& f, const Element& g, std::size_t n, double eps) {
  require(!(f.is_polynomial() && f.poly().is_zero()), "f must not be identically zero");
  std::vector<Element> shifts;
  shifts.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) shifts.push_back(f.shifted(i));

  double err = 0.0;
  std::vector<cplx> rhs(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const Certified c = inner(space, g, shifts[k], eps);
    rhs[k] = c.value;
    err = std::max(err, c.error);
  }
  const cplx fg = std::conj(rhs[0]);
  if (std::abs(fg) <= err + kComparisonFloor) {
    std::ostringstream msg;
    msg << "<f, g> = (" << fg.real() << ", " << fg.imag() << ") vanishes within its certified error " << err;
    throw Error(ErrorCode::orthogonal_data, msg.str());
  }

  const HermMatrix G = HermMatrix::from_function(n + 1, [&](std::size_t i, std::size_t j) {
    const Certified c = inner(space, shifts[i], shifts[j], eps);
    err = std::max(err, c.error);
    return c.value;
  });
  const Certified gg = inner(space, g, g, eps);
  err = std::max(err, gg.error);
  return GramSystem{space, f, g, n, G, std::move(rhs), fg, gg.value.real(), err};
}

OpaResult optimal_approximant(const WeightSequence& space, const Element& f, const Element& g, std::size_t n,
                              double eps) {
  const GramSystem sys = build_system(space, f, g, n, eps);
  return assemble(sys, cholesky_solve(sys.G, conj_all(sys.rhs)));
}

std::vector<OpaResult> sweep(const WeightSequence& space, const Element& f, const Element& g, std::size_t n_max,
                             const SweepOptions& options) {
  const GramSystem full = build_system(space, f, g, n_max, options.eps);
  std::vector<OpaResult> out(n_max + 1);

  if (options.threads <= 1) {
    CholeskyFactor factor;
    std::vector<cplx> column;
    for (std::size_t n = 0; n <= n_max; ++n) {
      column.resize(n + 1);
      for (std::size_t i = 0; i <= n; ++i) column[i] = full.G(i, n);
      factor.append(column);
      const GramSystem sys = full.leading(n);
      out[n] = assemble(sys, refined_solve(sys.G, factor, conj_all(sys.rhs)));
    }
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t n = next.fetch_add(1);
      if (n > n_max) return;
      try {
        const GramSystem sys = full.leading(n);
        out[n] = assemble(sys, cholesky_solve(sys.G, conj_all(sys.rhs)));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = std::min<unsigned>(options.threads, static_cast<unsigned>(n_max + 1));
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double taylor_residual(const WeightSequence& space, const CPoly& f, std::size_t n) {
  require(!f.is_zero() && f[0] != cplx{}, "Taylor truncation of 1/f needs f(0) != 0");
  const CPoly t = formal_quotient(CPoly::constant(1.0), f, n);
  return std::sqrt(norm_sq(space, t * f - CPoly::constant(1.0)));
}

// ---------------------------------------------------------------- inner functions

InnerCertificate is_inner(const WeightSequence& space, const Element& f, std::size_t max_shift, double eps) {
  require(!(f.is_polynomial() && f.poly().is_zero()), "f must not be identically zero");
  InnerCertificate cert;
  std::size_t range = max_shift;
  if (f.is_polynomial()) {
    range = exhaustive_shift_range(space, f.poly());
    cert.exhaustive = true;
  }
  bool ok = true;
  for (std::size_t j = 0; j <= range; ++j) {
    const Certified c = inner(space, f, f.shifted(j), eps / 10.0);
    const double dev = std::abs(c.value - (j == 0 ? 1.0 : 0.0));
    cert.max_deviation = std::max(cert.max_deviation, dev);
    cert.certified_error = std::max(cert.certified_error, c.error);
    ok = ok && dev <= eps + c.error;
  }
  cert.shifts_checked = range;
  cert.inner = ok;
  return cert;
}

// ---------------------------------------------------------------- stabilization

StabilizationReport detect_stabilization(const WeightSequence& space, const Element& f, const Element& g,
                                         std::size_t n_max, double eps, const SweepOptions& options) {
  require(n_max >= 1, "stabilization needs n_max >= 1");
  require(eps > 0.0, "eps must be positive");
  StabilizationReport rep;
  rep.approximants = sweep(space, f, g, n_max, options);
  const auto& ps = rep.approximants;

  std::optional<std::size_t> found;
  double found_dev = 0.0;
  for (std::size_t m = 0; m < n_max && !found; ++m) {
    double dev = 0.0;
    for (std::size_t n = m + 1; n <= n_max; ++n) dev = std::max(dev, sup_distance(ps[n].p_star, ps[m].p_star));
    if (dev <= eps) {
      found = m;
      found_dev = dev;
    }
  }
  std::ostringstream detail;
  if (!found) {
    detail << "approximants keep changing up to n = " << n_max;
    rep.detail = detail.str();
    return rep;
  }

  const std::size_t M = *found;
  const CPoly& pM = ps[M].p_star;
  rep.window_deviation = found_dev;

  if (!(f.is_polynomial() && g.is_polynomial())) {
    rep.stabilized = true;
    rep.M = M;
    rep.p_M = pM;
    rep.certificate = StabilizationCertificate::tolerance_window;
    detail << "coefficients constant within " << found_dev << " for " << M << " <= n <= " << n_max
           << "; series data admits no exact certificate";
    rep.detail = detail.str();
    return rep;
  }

  // <p_M f - g, z^k f> must vanish for every k; past the range it does by degree.
  const CPoly& fp = f.poly();
  const CPoly residual = pM * fp - g.poly();
  const std::size_t range = exhaustive_shift_range(space, residual);
  const double scale = std::sqrt(norm_sq(space, fp) * norm_sq(space, g.poly()));
  const double tol = 1e-10 * std::max(1.0, scale);
  double worst = 0.0;
  for (std::size_t k = 0; k <= range; ++k) worst = std::max(worst, std::abs(inner_poly(space, residual, fp.shifted(k))));
  rep.orthogonality_residual = worst;
  if (worst <= tol) {
    rep.stabilized = true;
    rep.M = M;
    rep.p_M = pM;
    rep.certificate = StabilizationCertificate::exact_orthogonality;
    detail << "p_" << M << " f - g is orthogonal to z^k f for all k (checked 0.." << range << ", max " << worst << ")";
  } else {
    detail << "coefficients settle within " << found_dev << " from n = " << M << " but <p_M f - g, z^k f> reaches "
           << worst << " > " << tol << "; no exact stabilization";
  }
  rep.detail = detail.str();
  return rep;
}

// ---------------------------------------------------------------- K_Sf

KsfCertificate ksf_membership(const WeightSequence& space, const Element& f, const Element& h, double eps) {
  require(!(f.is_polynomial() && f.poly().is_zero()), "f must not be identically zero");
  require(eps > 0.0, "eps must be positive");
  if (!space.is_diagonal()) {
    const CPoly& m = space.multiplier_poly();
    return ksf_membership(WeightSequence::hardy(), f.times(m), h.times(m), eps);
  }

  KsfCertificate cert;
  std::size_t last = 0;
  if (h.is_polynomial()) {
    last = h.poly().is_zero() ? 0 : static_cast<std::size_t>(h.poly().degree());
  } else {
    // |<h, z^k f>| <= ||P_{>=k} h|| * ||z^k f|| and ||z^k f||^2 <= R(k) ||f||^2
    if (space.kind() != WeightKind::dirichlet)
      throw Error(ErrorCode::cannot_certify, "shift bounds for series h need Dirichlet-type weights");
    const double alpha = std::max(0.0, space.alpha());
    const Certified ff = inner(space, f, f, eps);
    const double f_norm = std::sqrt(ff.value.real() + ff.error);
    const TruncSeries hs = h.series();
    auto bound = [&](std::size_t k) {
      const Envelope env = hs.envelope_from(k);
      const double tail =
          env.scale * env.scale * power_geometric_tail(alpha - 2.0 * env.decay, env.ratio * env.ratio, k);
      return std::sqrt(tail) * std::pow(static_cast<double>(k + 1), alpha / 2.0) * f_norm;
    };
    std::size_t k = 1;
    constexpr std::size_t kMaxShift = 1 << 14;
    while (!(bound(k) <= eps / 2.0)) {
      if (++k > kMaxShift) throw Error(ErrorCode::cannot_certify, "shift tail bound stays above eps");
    }
    last = k - 1;
    cert.certified_error = bound(k);
  }

  bool ok = true;
  for (std::size_t k = 1; k <= last; ++k) {
    const Certified c = inner(space, h, f.shifted(k), eps / 4.0);
    cert.max_abs = std::max(cert.max_abs, std::abs(c.value));
    cert.certified_error = std::max(cert.certified_error, c.error);
    ok = ok && std::abs(c.value) <= eps + c.error;
  }
  cert.shifts_checked = last;
  cert.member = ok;
  return cert;
}

KsfCertificate ksf_membership(const WeightSequence& space, const CPoly& f, const KernelSpec& kernel, double eps) {
  require(!f.is_zero(), "f must not be identically zero");
  require(space.is_diagonal(), "kernels are only available for diagonal weights");
  require(kernel.flavor == KernelFlavor::kernel_for_derivatives, "expected a derivative-evaluation kernel");
  const ReproCertificate repro = is_reproducible(space, kernel.beta, kernel.order);
  if (repro.verdict == Verdict::no) throw Error(ErrorCode::not_reproducible, repro.reason);
  if (repro.verdict == Verdict::undecidable) throw Error(ErrorCode::undecidable, repro.reason);

  // <k^j_b, z^k f> = conj((z^k f)^(j)(b)); b^-k times that is a polynomial of
  // degree <= j in k, so j+1 consecutive shifts settle every k >= 1.
  const unsigned j = kernel.order;
  const cplx beta = kernel.beta;
  const std::size_t last = beta == cplx{} ? j : j + 1;
  KsfCertificate cert;
  bool ok = true;
  for (std::size_t k = 1; k <= last; ++k) {
    const CPoly d = f.shifted(k).derivative(j);
    const cplx v = d.eval(beta);
    const double scale = std::max(1.0, d.abs_eval(std::abs(beta)));
    cert.max_abs = std::max(cert.max_abs, std::abs(v));
    ok = ok && std::abs(v) <= eps * scale;
  }
  cert.shifts_checked = last;
  cert.member = ok;
  return cert;
}

// ---------------------------------------------------------------- dossier

bool TheoremDossier::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const DossierCheck& c) { return c.passed; });
}

TheoremDossier verify_main_theorem(const WeightSequence& space, const Element& f, const StabilizationReport& report,
                                   double eps) {
  require(report.stabilized && report.M && report.p_M, "dossier needs a stabilized report");
  require(space.unit_kernel_at_zero(), "dossier identities assume w_0 = 1 with diagonal weights");
  require(f.at_zero() != cplx{}, "dossier needs f(0) != 0");

  TheoremDossier d;
  d.M = *report.M;
  d.p_M = *report.p_M;
  const Element h = f.times(d.p_M);
  const cplx h0 = h.at_zero();
  const Certified hh = inner(space, h, h, eps / 10.0);
  const double h_norm = std::sqrt(hh.value.real());
  d.c = std::sqrt(std::max(0.0, h0.real()));

  {
    const InnerCertificate ic = is_inner(space, h.scaled(1.0 / h_norm), 16, eps);
    std::ostringstream why;
    why << (ic.exhaustive ? "all " : "") << ic.shifts_checked + 1 << " shifts checked";
    d.checks.push_back({"normalized p_M f is inner", ic.inner, ic.max_deviation, why.str()});
  }
  {
    const KsfCertificate kc = ksf_membership(space, f, h, eps);
    std::ostringstream why;
    why << "shifts 1.." << kc.shifts_checked << " checked, remaining shifts bounded";
    d.checks.push_back({"p_M f orthogonal to z^k f for k >= 1", kc.member, kc.max_abs, why.str()});
  }
  {
    const double dev = std::abs(hh.value.real() - h0.real()) + std::abs(h0.imag());
    std::ostringstream why;
    why << "||p_M f||^2 = " << hh.value.real() << ", (p_M f)(0) = " << h0.real();
    d.checks.push_back({"||p_M f|| = c with c^2 = (p_M f)(0)", dev <= eps + hh.error, dev, why.str()});
  }
  {
    double min_mod = kInfinity;
    if (d.p_M.degree() >= 1)
      for (const Root& r : poly_roots(d.p_M)) min_mod = std::min(min_mod, std::abs(r.value));
    const bool ok = min_mod >= 1.0 - kBoundaryTol;
    std::ostringstream why;
    if (min_mod == kInfinity)
      why << "p_M is constant";
    else
      why << "smallest root modulus " << min_mod;
    d.checks.push_back({"zeros of p_M lie outside the open disk", ok, ok ? 0.0 : 1.0 - min_mod, why.str()});
  }
  return d;
}

// ---------------------------------------------------------------- diagnostics

CyclicityDiagnostic cyclicity_diagnostic(const WeightSequence& space, const Element& f, std::size_t n_max,
                                         std::optional<double> expected_plateau, const SweepOptions& options) {
  require(space.unit_kernel_at_zero(), "the distance identity assumes w_0 = 1 with diagonal weights");
  require(f.at_zero() != cplx{}, "cyclicity diagnostic needs f(0) != 0");
  CyclicityDiagnostic diag;
  diag.expected_plateau = expected_plateau;
  const std::vector<OpaResult> rs = sweep(space, f, Element(CPoly::constant(1.0)), n_max, options);
  diag.decreasing = true;
  for (const OpaResult& r : rs) {
    DiagnosticRow row{r.n, r.distance_sq, 1.0 - r.pf_at_zero.real(), r.pf_at_zero.imag()};
    diag.identity_max_gap = std::max(diag.identity_max_gap, std::abs(row.distance_sq - row.one_minus_pf0));
    if (!diag.rows.empty() && row.distance_sq > diag.rows.back().distance_sq + 1e-12) diag.decreasing = false;
    diag.rows.push_back(row);
  }
  diag.identity_holds = diag.identity_max_gap <= 1e-9;

  const double last = diag.rows.back().distance_sq;
  std::ostringstream why;
  if (last <= 1e-12) {
    diag.verdict = CyclicityVerdict::cyclicity_consistent;
    why << "distance reaches 0 at n = " << n_max;
  } else if (expected_plateau) {
    const double target = *expected_plateau;
    if (target <= 1e-12) {
      diag.verdict = diag.decreasing ? CyclicityVerdict::cyclicity_consistent : CyclicityVerdict::inconclusive;
      why << "projection predicts distance 0; last distance " << last;
    } else if (diag.decreasing && last >= target - 2e-6) {
      diag.verdict = CyclicityVerdict::non_cyclic;
      why << "distances decrease towards the plateau " << target << "; gap at n = " << n_max << " is " << last - target;
    } else {
      why << "distances are inconsistent with the plateau " << target << " (last " << last << ")";
    }
  } else {
    why << "no projection supplied; last distance " << last;
  }
  diag.detail = why.str();
  return diag;
}

std::string_view to_string(StabilizationCertificate c) {
  switch (c) {
    case StabilizationCertificate::exact_orthogonality: return "exact_orthogonality";
    case StabilizationCertificate::tolerance_window: return "tolerance_window";
    case StabilizationCertificate::none: return "none";
  }
  return "none";
}

std::string_view to_string(CyclicityVerdict v) {
  switch (v) {
    case CyclicityVerdict::cyclicity_consistent: return "cyclicity_consistent";
    case CyclicityVerdict::non_cyclic: return "non_cyclic";
    case CyclicityVerdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

}  // namespace opa
