#include "opa/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "opa/error.hpp"
#include "opa/linalg.hpp"

namespace opa {

namespace {

constexpr double kGammaTieTol = 1e-9;

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::invalid_argument, what);
}

void require_diagonal(const WeightSequence& w, const char* what) {
  if (!w.is_diagonal()) throw Error(ErrorCode::invalid_argument, what);
}

// Smallest N >= start (up to a factor of two) with bound(N) <= target.
template <class Bound>
std::size_t find_cutoff(Bound bound, double target, std::size_t start, const char* what) {
  std::size_t n = std::max<std::size_t>(start, 1);
  while (!(bound(n) <= target)) {
    if (n >= kMaxSeriesLength) {
      std::ostringstream msg;
      msg << what << ": tail bound does not reach " << target << " within " << kMaxSeriesLength << " terms";
      throw Error(ErrorCode::cannot_certify, msg.str());
    }
    n = std::min(2 * n, kMaxSeriesLength);
  }
  // bisect back towards the smallest admissible cutoff
  std::size_t lo = std::max<std::size_t>(start, n / 2), hi = n;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (bound(mid) <= target)
      hi = mid;
    else
      lo = mid + 1;
  }
  return hi;
}

cplx effective_beta(cplx beta) { return on_unit_circle(beta) ? beta / std::abs(beta) : beta; }

}  // namespace

// ---------------------------------------------------------------- weights

WeightSequence WeightSequence::dirichlet(double alpha) {
  require(std::isfinite(alpha), "dirichlet alpha must be finite");
  WeightSequence w;
  w.kind_ = WeightKind::dirichlet;
  w.alpha_ = alpha;
  w.growth_ = {0, 1.0, alpha, 1.0, alpha, true};
  return w;
}

WeightSequence WeightSequence::custom(std::vector<double> prefix, Extension extension) {
  require(!prefix.empty(), "custom weights need at least w_0");
  require(extension != Extension::formula, "formula extension needs a callback");
  require(prefix[0] == 1.0, "custom weights must have w_0 = 1");
  for (double v : prefix) require(std::isfinite(v) && v > 0.0, "weights must be positive and finite");

  WeightSequence w;
  w.kind_ = WeightKind::custom;
  w.extension_ = extension;
  const std::size_t K = prefix.size();
  double gamma = 0.0;
  if (extension == Extension::ratio && K >= 2)
    gamma = std::log(prefix[K - 1] / prefix[K - 2]) / std::log(static_cast<double>(K) / static_cast<double>(K - 1));
  // w_k = c (k+1)^gamma for k >= K-1, continuous at k = K-1
  const double c = prefix[K - 1] / std::pow(static_cast<double>(K), gamma);
  w.growth_ = {K, c, gamma, c, gamma, true};
  w.prefix_ = std::move(prefix);
  return w;
}

WeightSequence WeightSequence::custom(std::function<double(std::size_t)> formula, GrowthBound bound) {
  require(static_cast<bool>(formula), "formula must be callable");
  require(formula(0) == 1.0, "custom weights must have w_0 = 1");
  require(bound.scale_lo > 0.0 && bound.scale_hi >= bound.scale_lo && std::isfinite(bound.scale_hi),
          "growth bound scales must satisfy 0 < scale_lo <= scale_hi");
  require(std::isfinite(bound.gamma_lo) && std::isfinite(bound.gamma_hi) && bound.gamma_lo <= bound.gamma_hi,
          "growth bound exponents must satisfy gamma_lo <= gamma_hi");
  WeightSequence w;
  w.kind_ = WeightKind::custom;
  w.extension_ = Extension::formula;
  w.formula_ = std::move(formula);
  bound.exact = bound.exact && bound.scale_lo == bound.scale_hi && bound.gamma_lo == bound.gamma_hi;
  w.growth_ = bound;
  return w;
}

WeightSequence WeightSequence::multiplier(CPoly m) {
  require(!m.is_zero(), "multiplier m must be nonzero");
  if (m.degree() >= 1) {
    for (const Root& r : poly_roots(m))
      if (std::abs(r.value) < 1.0 - kBoundaryTol)
        throw Error(ErrorCode::invalid_argument, "multiplier m must not vanish in the open unit disk");
  }
  WeightSequence w;
  w.kind_ = WeightKind::multiplier;
  w.m_ = std::move(m);
  return w;
}

double WeightSequence::weight(std::size_t k) const {
  switch (kind_) {
    case WeightKind::dirichlet:
      return alpha_ == 0.0 ? 1.0 : std::pow(static_cast<double>(k + 1), alpha_);
    case WeightKind::custom: {
      if (extension_ == Extension::formula) {
        const double v = formula_(k);
        if (!(std::isfinite(v) && v > 0.0)) {
          std::ostringstream msg;
          msg << "weight formula returned " << v << " at k = " << k;
          throw Error(ErrorCode::invalid_argument, msg.str());
        }
        return v;
      }
      if (k < prefix_.size()) return prefix_[k];
      return growth_.scale_hi * std::pow(static_cast<double>(k + 1), growth_.gamma_hi);
    }
    case WeightKind::multiplier:
      break;
  }
  throw Error(ErrorCode::invalid_argument, "multiplier spaces have no diagonal weights");
}

double WeightSequence::growth_gamma() const {
  require_diagonal(*this, "multiplier spaces have no diagonal weights");
  double gamma = -kInfinity;
  for (std::size_t k = 1; k < growth_.start; ++k)
    gamma = std::max(gamma, std::log(weight(k)) / std::log(static_cast<double>(k + 1)));
  const double s = static_cast<double>(std::max<std::size_t>(growth_.start, 1));
  gamma = std::max(gamma, growth_.gamma_hi + std::max(0.0, std::log(growth_.scale_hi)) / std::log(s + 1.0));
  return gamma;
}

bool on_unit_circle(cplx beta) { return std::abs(std::abs(beta) - 1.0) <= kBoundaryTol; }

// ---------------------------------------------------------------- inner products

cplx inner_poly(const WeightSequence& w, const CPoly& a, const CPoly& b) {
  if (!w.is_diagonal()) {
    const CPoly& m = w.multiplier_poly();
    return inner_poly(WeightSequence::hardy(), m * a, m * b);
  }
  CompensatedSum acc;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) acc.add(w.weight(k) * a[k] * std::conj(b[k]));
  return acc.value();
}

double norm_sq(const WeightSequence& w, const CPoly& a) { return inner_poly(w, a, a).real(); }

Certified inner_series(const WeightSequence& w, const TruncSeries& a_in, const TruncSeries& b_in, double eps) {
  require(eps > 0.0, "eps must be positive");
  if (!w.is_diagonal()) {
    const TruncSeries m = TruncSeries::from_poly(w.multiplier_poly());
    return inner_series(WeightSequence::hardy(), series_mul(m, a_in), series_mul(m, b_in), eps);
  }
  if (a_in.is_polynomial() && b_in.is_polynomial()) return {inner_poly(w, a_in.to_poly(), b_in.to_poly()), 0.0};

  const GrowthBound& gb = w.growth();
  const Envelope ea = a_in.tail(), eb = b_in.tail();

  // The sum is exact past N only if one side vanishes there.
  std::size_t n_end;
  double tail = 0.0;
  if (a_in.is_polynomial() || b_in.is_polynomial()) {
    n_end = a_in.is_polynomial() ? a_in.size() : b_in.size();
  } else {
    const double exponent = gb.gamma_hi - ea.decay - eb.decay;
    const double ratio = ea.ratio * eb.ratio;
    const double scale = gb.scale_hi * ea.scale * eb.scale;
    auto bound = [&](std::size_t n) { return scale * power_geometric_tail(exponent, ratio, n); };
    const std::size_t start = std::max({a_in.size(), b_in.size(), gb.start});
    n_end = find_cutoff(bound, eps / 2.0, start, "inner product");
    tail = bound(n_end);
  }

  const TruncSeries a = a_in.extensible() ? a_in.extended(n_end) : a_in;
  const TruncSeries b = b_in.extensible() ? b_in.extended(n_end) : b_in;

  CompensatedSum acc;
  double err = tail;
  for (std::size_t k = 0; k < n_end; ++k) {
    const bool ka = a.is_polynomial() || k < a.size();
    const bool kb = b.is_polynomial() || k < b.size();
    const double wk = w.weight(k);
    if (ka && kb) {
      acc.add(wk * a.coeff(k) * std::conj(b.coeff(k)));
    } else {
      const double ma = ka ? std::abs(a.coeff(k)) : ea.bound(k);
      const double mb = kb ? std::abs(b.coeff(k)) : eb.bound(k);
      err += wk * ma * mb;
    }
  }
  if (err > eps) {
    std::ostringstream msg;
    msg << "inner product error bound " << err << " exceeds eps " << eps;
    throw Error(ErrorCode::cannot_certify, msg.str());
  }
  return {acc.value(), err};
}

Certified inner(const WeightSequence& w, const Element& a, const Element& b, double eps) {
  if (a.is_polynomial() && b.is_polynomial()) return {inner_poly(w, a.poly(), b.poly()), 0.0};
  return inner_series(w, a.series(), b.series(), eps);
}

// ---------------------------------------------------------------- reproducibility

ReproCertificate is_reproducible(const WeightSequence& w, cplx beta, unsigned order) {
  const double r = std::abs(beta);
  const bool inside = r < 1.0 - kBoundaryTol;
  const bool outside = r > 1.0 + kBoundaryTol;
  if (inside) return {Verdict::yes, "point inside the open unit disk"};
  if (outside) return {Verdict::no, "point outside the closed unit disk"};

  const double need = 2.0 * order + 1.0;
  std::ostringstream why;
  switch (w.kind()) {
    case WeightKind::dirichlet:
      why << "boundary point: sum k^" << 2 * order << " / (k+1)^" << w.alpha() << (w.alpha() > need ? " converges" : " diverges");
      return {w.alpha() > need ? Verdict::yes : Verdict::no, why.str()};
    case WeightKind::custom: {
      const GrowthBound& gb = w.growth();
      if (gb.exact) {
        if (std::abs(gb.gamma_lo - need) <= kGammaTieTol) {
          why << "boundary point: tail exponent " << gb.gamma_lo << " is within " << kGammaTieTol << " of the threshold "
              << need;
          return {Verdict::undecidable, why.str()};
        }
        why << "boundary point: tail weights grow like (k+1)^" << gb.gamma_lo << ", threshold " << need;
        return {gb.gamma_lo > need ? Verdict::yes : Verdict::no, why.str()};
      }
      if (gb.gamma_lo > need) {
        why << "boundary point: lower growth exponent " << gb.gamma_lo << " exceeds " << need;
        return {Verdict::yes, why.str()};
      }
      if (gb.gamma_hi <= need) {
        why << "boundary point: upper growth exponent " << gb.gamma_hi << " is at most " << need;
        return {Verdict::no, why.str()};
      }
      why << "boundary point: growth exponents [" << gb.gamma_lo << ", " << gb.gamma_hi << "] straddle " << need;
      return {Verdict::undecidable, why.str()};
    }
    case WeightKind::multiplier: {
      const CPoly& m = w.multiplier_poly();
      bool zero_on_circle = false;
      if (m.degree() >= 1)
        for (const Root& root : poly_roots(m)) zero_on_circle = zero_on_circle || on_unit_circle(root.value);
      if (!zero_on_circle) return {Verdict::no, "boundary point; m has no zeros on the circle, so the space equals H^2"};
      return {Verdict::undecidable, "boundary point; m vanishes on the unit circle"};
    }
  }
  return {Verdict::undecidable, "unknown weight kind"};
}

// ---------------------------------------------------------------- kernels

cplx kernel_coefficient(const WeightSequence& w, const KernelSpec& spec, std::size_t k) {
  require_diagonal(w, "kernels are only available for diagonal weights");
  const cplx cb = std::conj(effective_beta(spec.beta));
  const double kk = static_cast<double>(k);
  if (spec.flavor == KernelFlavor::kernel_for_derivatives) {
    if (k < spec.order) return 0.0;
    return falling_factorial(kk, spec.order) * ipow(cb, k - spec.order) / w.weight(k);
  }
  return rising_factorial(kk, spec.order) * ipow(cb, k + spec.order) / w.weight(k);
}

TruncSeries kernel_series(const WeightSequence& w, const KernelSpec& spec, double eps) {
  require_diagonal(w, "kernels are only available for diagonal weights");
  require(eps > 0.0, "eps must be positive");
  const ReproCertificate cert = is_reproducible(w, spec.beta, spec.order);
  if (cert.verdict == Verdict::no) throw Error(ErrorCode::not_reproducible, cert.reason);
  if (cert.verdict == Verdict::undecidable) throw Error(ErrorCode::undecidable, cert.reason);

  const unsigned n = spec.order;
  const cplx beta = effective_beta(spec.beta);
  const double r = std::abs(beta);

  if (r == 0.0) {
    // only one coefficient survives
    std::vector<cplx> c;
    if (spec.flavor == KernelFlavor::kernel_for_derivatives) {
      c.assign(n + 1, 0.0);
      c[n] = falling_factorial(n, n) / w.weight(n);
    } else if (n == 0) {
      c = {1.0};
    }
    return TruncSeries::from_poly(CPoly(std::move(c)));
  }

  const GrowthBound& gb = w.growth();
  const std::size_t l0 = std::max<std::size_t>({gb.start, n, 1});
  double scale = 1.0 / gb.scale_lo;
  if (spec.flavor == KernelFlavor::kernel_for_derivatives) {
    scale *= std::pow(r, -static_cast<double>(n));
  } else {
    // F_n(k) / (k+1)^n decreases in k
    const double base = static_cast<double>(l0);
    for (unsigned j = 1; j <= n; ++j) scale *= (base + j) / (base + 1.0);
    scale *= std::pow(r, static_cast<double>(n));
  }
  const Envelope env{scale, r, gb.gamma_lo - static_cast<double>(n)};
  std::size_t len;
  try {
    len = tail_length(env, eps, l0);
  } catch (const Error& e) {
    throw Error(ErrorCode::cannot_certify, std::string("kernel series: ") + e.what());
  }

  PrefixRule rule = [w, spec](std::size_t count) {
    std::vector<cplx> c(count);
    for (std::size_t k = 0; k < count; ++k) c[k] = kernel_coefficient(w, spec, k);
    return c;
  };
  std::vector<cplx> coeffs = rule(len);
  return TruncSeries(std::move(coeffs), env, std::move(rule));
}

namespace {

// Q(y) = P_a(y-1) P_b(y-1), the product of falling factorials in y = x+1.
CPoly factorial_product_in_shifted_variable(unsigned a, unsigned b) {
  CPoly q = CPoly::constant(1.0);
  for (unsigned i = 0; i < a; ++i) q = q * CPoly({-1.0 - i, 1.0});
  for (unsigned i = 0; i < b; ++i) q = q * CPoly({-1.0 - i, 1.0});
  return q;
}

// int_A^inf Q(x+1) / (c (x+1)^gamma) dx, requires gamma > deg Q + 1.
double power_integral(const CPoly& q, double c, double gamma, double a) {
  CompensatedSum acc;
  const double y = a + 1.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = static_cast<double>(i) + 1.0 - gamma;
    acc.add(q[i].real() * std::pow(y, e) / (-e));
  }
  return acc.value().real() / c;
}

double power_term(const CPoly& q, double c, double gamma, double x) {
  return q.eval(x + 1.0).real() / (c * std::pow(x + 1.0, gamma));
}

}  // namespace

Certified kernel_inner(const WeightSequence& w, const KernelSpec& a, const KernelSpec& b, double eps) {
  require_diagonal(w, "kernels are only available for diagonal weights");
  require(eps > 0.0, "eps must be positive");
  require(a.flavor == KernelFlavor::kernel_for_derivatives && b.flavor == KernelFlavor::kernel_for_derivatives,
          "kernel_inner expects derivative-evaluation kernels");
  for (const KernelSpec* s : {&a, &b}) {
    const ReproCertificate cert = is_reproducible(w, s->beta, s->order);
    if (cert.verdict == Verdict::no) throw Error(ErrorCode::not_reproducible, cert.reason);
    if (cert.verdict == Verdict::undecidable) throw Error(ErrorCode::undecidable, cert.reason);
  }

  const unsigned ja = a.order, jb = b.order;
  const std::size_t J = std::max(ja, jb);
  const cplx ba = effective_beta(a.beta), bb = effective_beta(b.beta);
  const cplx cba = std::conj(ba);
  auto term = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return falling_factorial(kk, ja) * falling_factorial(kk, jb) * ipow(cba, k - ja) * ipow(bb, k - jb) / w.weight(k);
  };

  // direct sum over [J, n_end) with a remainder (estimate, error)
  auto finish = [&](std::size_t n_end, cplx remainder, double remainder_err) {
    CompensatedSum acc;
    double mag = 0.0;
    for (std::size_t k = J; k < n_end; ++k) {
      const cplx t = term(k);
      acc.add(t);
      mag += std::abs(t);
    }
    acc.add(remainder);
    const double err = remainder_err + 1e-15 * mag;
    if (err > eps) {
      std::ostringstream msg;
      msg << "kernel inner product error bound " << err << " exceeds eps " << eps;
      throw Error(ErrorCode::cannot_certify, msg.str());
    }
    return Certified{acc.value(), err};
  };

  const double ra = std::abs(ba), rb = std::abs(bb);
  if (ra == 0.0 || rb == 0.0) {
    // with 0^0 = 1 only the k = max order term can survive
    return finish(J + 1, 0.0, 0.0);
  }

  const GrowthBound& gb = w.growth();
  const std::size_t base = std::max<std::size_t>(gb.start, J);
  const double rho = ra * rb;
  const double jsum = static_cast<double>(ja + jb);

  if (!(on_unit_circle(a.beta) && on_unit_circle(b.beta))) {
    const double scale = std::pow(ra, -static_cast<double>(ja)) * std::pow(rb, -static_cast<double>(jb)) / gb.scale_lo;
    auto bound = [&](std::size_t n) { return scale * power_geometric_tail(jsum - gb.gamma_lo, rho, n); };
    const std::size_t n_end = find_cutoff(bound, eps / 2.0, base, "kernel inner product");
    return finish(n_end, 0.0, bound(n_end));
  }

  // Both points on the circle: coefficients decay only algebraically.
  // term(k) = phase * omega^k * s(k) with s(k) = Q(k) / w_k >= 0.
  const CPoly q = factorial_product_in_shifted_variable(ja, jb);
  const cplx omega = cba * bb;
  const cplx phase = ipow(ba, ja) * ipow(std::conj(bb), jb);
  const bool same_point = std::abs(omega - 1.0) <= 1e-13;

  const double g_lo = gb.gamma_lo, g_hi = gb.gamma_hi;
  // s is decreasing past x0 for pure power-law weights
  const double x0 = (jsum + g_lo * (static_cast<double>(J) - 1.0)) / (g_lo - jsum);
  const std::size_t start = std::max<std::size_t>({base, J + 1, static_cast<std::size_t>(std::max(0.0, std::ceil(x0))) + 1, 16});

  // remainder sum_{k > n} as (estimate, half-width)
  std::function<std::pair<cplx, double>(std::size_t)> remainder;
  if (gb.exact && same_point) {
    const double c = gb.scale_lo;
    if (ja == 0 && jb == 0) {
      remainder = [&, c](std::size_t n) {
        const double nn = static_cast<double>(n);
        const double lo = power_integral(q, c, g_lo, nn + 1.0) + 0.5 * power_term(q, c, g_lo, nn + 1.0);
        const double hi = power_integral(q, c, g_lo, nn + 0.5);
        return std::pair<cplx, double>{phase * (0.5 * (lo + hi)), 0.5 * std::abs(hi - lo)};
      };
    } else {
      remainder = [&, c](std::size_t n) {
        const double nn = static_cast<double>(n);
        const double lo = power_integral(q, c, g_lo, nn + 1.0);
        const double hi = power_integral(q, c, g_lo, nn);
        return std::pair<cplx, double>{phase * (0.5 * (lo + hi)), 0.5 * std::abs(hi - lo)};
      };
    }
  } else if (gb.exact) {
    const double c = gb.scale_lo;
    const double gap = std::abs(1.0 - omega);
    remainder = [&, c, gap](std::size_t n) {
      return std::pair<cplx, double>{0.0, 2.0 * power_term(q, c, g_lo, static_cast<double>(n + 1)) / gap};
    };
  } else if (same_point) {
    remainder = [&](std::size_t n) {
      const double nn = static_cast<double>(n);
      const double lo = power_integral(q, gb.scale_hi, g_hi, nn + 1.0);
      const double hi = power_integral(q, gb.scale_lo, g_lo, nn);
      return std::pair<cplx, double>{phase * (0.5 * (lo + hi)), 0.5 * std::abs(hi - lo)};
    };
  } else {
    remainder = [&](std::size_t n) {
      return std::pair<cplx, double>{0.0, power_integral(q, gb.scale_lo, g_lo, static_cast<double>(n))};
    };
  }

  const std::size_t n_last = find_cutoff([&](std::size_t n) { return remainder(n).second; }, eps / 2.0, start,
                                         "boundary kernel inner product");
  const auto [estimate, half_width] = remainder(n_last);
  return finish(n_last + 1, estimate, half_width);
}

}  // namespace opa
