#include "opa/series.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "opa/error.hpp"
#include "opa/linalg.hpp"

namespace opa {
namespace {

constexpr double kPoleCancelTol = 1e-14;

// (k+1) R^k <= C r'^k with r' = R + (1-R)/4 and C = s / (e ln s), s = r'/R.
double widened_ratio(double r) { return r + (1.0 - r) / 4.0; }

double polynomial_absorption(double r, double r_wide, double power) {
  const double s = r_wide / r;
  const double ls = std::log(s);
  return s * std::pow(power / (std::numbers::e * ls), power);
}

// Envelope of a product of two series with global envelopes (decay 0).
Envelope product_envelope(const Envelope& a, const Envelope& b) {
  if (a.vanishes() || b.vanishes()) return {};
  const double big = std::max(a.ratio, b.ratio);
  const double small = std::min(a.ratio, b.ratio);
  if (big == 0.0) return {};
  const double q = small / big;
  if (q <= 0.9) return {a.scale * b.scale / (1.0 - q), big, 0.0};
  const double wide = widened_ratio(big);
  if (!(wide < 1.0)) throw Error(ErrorCode::envelope_overflow, "product envelope ratio reached 1");
  return {a.scale * b.scale * polynomial_absorption(big, wide, 1.0), wide, 0.0};
}

// Envelope of p * h for a polynomial p and a global envelope of h.
Envelope poly_times_envelope(const CPoly& p, const Envelope& h) {
  if (p.is_zero() || h.vanishes()) return {};
  if (h.ratio == 0.0) return {};
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += std::abs(p[j]) * std::pow(h.ratio, -static_cast<double>(j));
  return {h.scale * acc, h.ratio, 0.0};
}

CPoly expand_denominator(std::span<const cplx> poles) {
  CPoly den = CPoly::constant(1.0);
  for (const cplx& c : poles) den = den * CPoly({1.0, -c});
  return den;
}

// Removes (1 - c z) factors whose root 1/c is a zero of num.
void cancel_common_factors(CPoly& num, std::vector<cplx>& poles) {
  for (std::size_t i = 0; i < poles.size();) {
    const cplx c = poles[i];
    if (num.is_zero()) {
      poles.clear();
      break;
    }
    const cplx root = 1.0 / c;
    cplx rem;
    const CPoly q = deflate(num, root, &rem);
    if (std::abs(rem) <= kPoleCancelTol * num.abs_eval(std::abs(root))) {
      num = q * (-1.0 / c);
      poles.erase(poles.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
}

std::vector<cplx> convolve_prefix(std::span<const cplx> a, std::span<const cplx> b, std::size_t len) {
  std::vector<cplx> out(len);
  if (a.empty() || b.empty()) return out;
  for (std::size_t k = 0; k < len; ++k) {
    CompensatedSum acc;
    const std::size_t lo = k + 1 > b.size() ? k + 1 - b.size() : 0;
    const std::size_t hi = std::min(k, a.size() - 1);
    for (std::size_t i = lo; i <= hi; ++i) acc.add(a[i] * b[k - i]);
    out[k] = acc.value();
  }
  return out;
}

}  // namespace

double Envelope::bound(std::size_t k) const {
  if (vanishes()) return 0.0;
  const double kk = static_cast<double>(k);
  return scale * std::pow(ratio, kk) * std::pow(kk + 1.0, -decay);
}

TruncSeries::TruncSeries(std::vector<cplx> coeffs, Envelope tail, PrefixRule rule)
    : coeffs_(std::move(coeffs)), tail_(tail), rule_(std::move(rule)) {
  if (tail_.scale < 0.0 || tail_.ratio < 0.0 || tail_.ratio > 1.0 || std::isnan(tail_.scale))
    throw Error(ErrorCode::invalid_argument, "envelope must have scale >= 0 and ratio in [0, 1]");
  if (!tail_.vanishes() && tail_.ratio == 1.0 && tail_.decay <= 0.0)
    throw Error(ErrorCode::envelope_overflow, "ratio 1 envelope needs positive decay");
  if (!tail_.vanishes() && tail_.ratio == 0.0 && !coeffs_.empty()) tail_ = {};
  if (tail_.vanishes()) tail_ = {};
}

TruncSeries TruncSeries::from_poly(const CPoly& p) {
  TruncSeries s(std::vector<cplx>(p.coeffs().begin(), p.coeffs().end()), {});
  s.rational_ = RationalForm{p, {}};
  return s;
}

TruncSeries TruncSeries::rational(const CPoly& num_in, std::vector<cplx> poles, std::size_t len) {
  CPoly num = num_in;
  std::erase_if(poles, [](const cplx& c) { return c == cplx{}; });
  for (const cplx& c : poles)
    if (!(std::abs(c) < 1.0))
      throw Error(ErrorCode::envelope_overflow, "rational series needs every pole outside the closed unit disk");
  cancel_common_factors(num, poles);
  if (poles.empty()) {
    TruncSeries s = from_poly(num);
    if (len > s.size()) s.coeffs_.resize(len);
    return s;
  }

  Envelope g{1.0, std::abs(poles[0]), 0.0};
  for (std::size_t i = 1; i < poles.size(); ++i) g = product_envelope(g, {1.0, std::abs(poles[i]), 0.0});
  const Envelope env = poly_times_envelope(num, g);

  const CPoly den = expand_denominator(poles);
  if (len == 0) len = tail_length(env, kDefaultCoeffTail * env.scale, num.size());
  PrefixRule rule = [num, den](std::size_t n) {
    if (n == 0) return std::vector<cplx>{};
    const CPoly q = formal_quotient(num, den, n - 1);
    std::vector<cplx> out(q.coeffs().begin(), q.coeffs().end());
    out.resize(n);
    return out;
  };
  TruncSeries s(rule(len), env, rule);
  s.rational_ = RationalForm{num, std::move(poles)};
  return s;
}

TruncSeries TruncSeries::rational(const CPoly& num, const CPoly& den, std::size_t len) {
  if (den.is_zero() || den[0] == cplx{})
    throw Error(ErrorCode::invalid_argument, "denominator must not vanish at 0");
  std::vector<cplx> poles;
  if (den.degree() >= 1) {
    for (const Root& r : poly_roots(den))
      for (unsigned m = 0; m < r.multiplicity; ++m) poles.push_back(1.0 / r.value);
  }
  return rational(num * (1.0 / den[0]), std::move(poles), len);
}

TruncSeries TruncSeries::geometric(cplx c, std::size_t len) { return rational(CPoly::constant(1.0), std::vector<cplx>{c}, len); }

TruncSeries TruncSeries::blaschke_factor(cplx beta, std::size_t len) {
  if (beta == cplx{}) return from_poly(CPoly::monomial(1));
  const double r = std::abs(beta);
  if (!(r < 1.0)) throw Error(ErrorCode::invalid_argument, "Blaschke factor needs |beta| < 1");
  const cplx unit = r / beta;
  return rational(CPoly({r, -unit}), std::vector<cplx>{std::conj(beta)}, len);
}

cplx TruncSeries::coeff(std::size_t k) const {
  if (k < coeffs_.size()) return coeffs_[k];
  if (is_polynomial()) return {};
  throw Error(ErrorCode::index_out_of_range, "coefficient " + std::to_string(k) + " is past the stored prefix");
}

TruncSeries TruncSeries::extended(std::size_t len) const {
  if (len <= coeffs_.size()) return *this;
  TruncSeries out = *this;
  if (is_polynomial()) {
    out.coeffs_.resize(len);
    return out;
  }
  if (!rule_)
    throw Error(ErrorCode::index_out_of_range,
                "series holds " + std::to_string(coeffs_.size()) + " coefficients and cannot be extended to " +
                    std::to_string(len));
  if (len > kMaxSeriesLength) throw Error(ErrorCode::cannot_certify, "requested series length is too large");
  out.coeffs_ = rule_(len);
  return out;
}

CPoly TruncSeries::to_poly() const {
  if (!is_polynomial()) throw Error(ErrorCode::invalid_argument, "series has a nonzero tail");
  return CPoly(coeffs_);
}

Envelope TruncSeries::envelope_from(std::size_t start) const {
  Envelope env = tail_;
  bool any = false;
  for (std::size_t k = start; k < coeffs_.size(); ++k) any = any || coeffs_[k] != cplx{};
  if (!any) return env;
  if (env.vanishes()) env = {0.0, 0.5, 0.0};
  const double lr = std::log(env.ratio);
  for (std::size_t k = start; k < coeffs_.size(); ++k) {
    const double a = std::abs(coeffs_[k]);
    if (a == 0.0) continue;
    const double kk = static_cast<double>(k);
    const double m = std::exp(std::log(a) - kk * lr + env.decay * std::log(kk + 1.0));
    env.scale = std::max(env.scale, m);
  }
  if (!std::isfinite(env.scale)) throw Error(ErrorCode::envelope_overflow, "stored coefficients overflow the envelope");
  return env;
}

Envelope TruncSeries::global_envelope() const {
  Envelope env = tail_;
  if (!env.vanishes() && env.ratio >= 1.0)
    throw Error(ErrorCode::envelope_overflow, "series has no geometric envelope");
  if (!env.vanishes() && env.decay < 0.0) {
    const double wide = widened_ratio(env.ratio);
    env.scale *= polynomial_absorption(env.ratio, wide, -env.decay);
    env.ratio = wide;
  }
  env.decay = std::max(env.decay, 0.0);
  // (k+1)^(-decay) <= 1, so dropping a positive decay keeps the bound valid
  Envelope flat{env.scale, env.ratio, 0.0};
  TruncSeries probe(coeffs_, flat);
  return probe.envelope_from(0);
}

Certified TruncSeries::eval(cplx z) const {
  CompensatedSum acc;
  cplx zk = 1.0;
  for (const cplx& c : coeffs_) {
    acc.add(c * zk);
    zk *= z;
  }
  double err = 0.0;
  if (!tail_.vanishes()) {
    const double rho = tail_.ratio * std::abs(z);
    err = rho > 1.0 ? kInfinity : tail_.scale * power_geometric_tail(-tail_.decay, rho, coeffs_.size());
  }
  return {acc.value(), err};
}

TruncSeries TruncSeries::shifted(std::size_t k) const {
  if (k == 0) return *this;
  std::vector<cplx> c(k, cplx{});
  c.insert(c.end(), coeffs_.begin(), coeffs_.end());
  Envelope env = tail_;
  if (!env.vanishes()) {
    env.scale *= std::pow(env.ratio, -static_cast<double>(k));
    if (env.decay > 0.0) {
      const double n = static_cast<double>(coeffs_.size());
      env.scale *= std::pow((n + static_cast<double>(k) + 1.0) / (n + 1.0), env.decay);
    }
  }
  PrefixRule rule;
  if (rule_) {
    rule = [inner = rule_, k](std::size_t n) {
      std::vector<cplx> out(std::min(n, k), cplx{});
      if (n > k) {
        auto tail = inner(n - k);
        out.insert(out.end(), tail.begin(), tail.end());
      }
      return out;
    };
  }
  TruncSeries out(std::move(c), env, std::move(rule));
  if (rational_) out.rational_ = RationalForm{rational_->num.shifted(k), rational_->poles};
  return out;
}

TruncSeries TruncSeries::scaled(cplx c) const {
  if (c == cplx{}) return TruncSeries::from_poly({});
  std::vector<cplx> out = coeffs_;
  for (cplx& a : out) a *= c;
  Envelope env = tail_;
  env.scale *= std::abs(c);
  PrefixRule rule;
  if (rule_) {
    rule = [inner = rule_, c](std::size_t n) {
      auto v = inner(n);
      for (cplx& a : v) a *= c;
      return v;
    };
  }
  TruncSeries s(std::move(out), env, std::move(rule));
  if (rational_) s.rational_ = RationalForm{rational_->num * c, rational_->poles};
  return s;
}

TruncSeries series_mul(const TruncSeries& a, const TruncSeries& b, std::size_t out_len) {
  if (a.rational_form() && b.rational_form()) {
    const auto& ra = *a.rational_form();
    const auto& rb = *b.rational_form();
    std::vector<cplx> poles = ra.poles;
    poles.insert(poles.end(), rb.poles.begin(), rb.poles.end());
    return TruncSeries::rational(ra.num * rb.num, std::move(poles), out_len);
  }

  if (out_len == 0) {
    out_len = std::max(a.size(), b.size());
    if (!a.extensible()) out_len = std::min(out_len, a.size());
    if (!b.extensible()) out_len = std::min(out_len, b.size());
  }
  const TruncSeries ea = a.extended(out_len);
  const TruncSeries eb = b.extended(out_len);

  Envelope env;
  if (a.is_polynomial() && b.is_polynomial()) {
    const CPoly prod = a.to_poly() * b.to_poly();
    return TruncSeries::from_poly(prod);
  } else if (a.is_polynomial()) {
    env = poly_times_envelope(a.to_poly(), b.global_envelope());
  } else if (b.is_polynomial()) {
    env = poly_times_envelope(b.to_poly(), a.global_envelope());
  } else {
    env = product_envelope(a.global_envelope(), b.global_envelope());
  }

  std::vector<cplx> coeffs = convolve_prefix(ea.coeffs().first(out_len), eb.coeffs().first(out_len), out_len);
  PrefixRule rule;
  if (a.extensible() && b.extensible()) {
    rule = [a, b](std::size_t n) {
      const TruncSeries xa = a.extended(n);
      const TruncSeries xb = b.extended(n);
      return convolve_prefix(xa.coeffs().first(n), xb.coeffs().first(n), n);
    };
  }
  return TruncSeries(std::move(coeffs), env, std::move(rule));
}

TruncSeries series_add(const TruncSeries& a, const TruncSeries& b, cplx factor) {
  if (a.rational_form() && b.rational_form()) {
    const auto& ra = *a.rational_form();
    const auto& rb = *b.rational_form();
    if (ra.poles == rb.poles) return TruncSeries::rational(ra.num + rb.num * factor, ra.poles);
    CPoly num = ra.num * expand_denominator(rb.poles) + rb.num * expand_denominator(ra.poles) * factor;
    std::vector<cplx> poles = ra.poles;
    poles.insert(poles.end(), rb.poles.begin(), rb.poles.end());
    return TruncSeries::rational(num, std::move(poles));
  }

  std::size_t len = std::max(a.size(), b.size());
  if (!a.extensible()) len = std::min(len, a.size());
  if (!b.extensible()) len = std::min(len, b.size());
  const TruncSeries ea = a.extended(len);
  const TruncSeries eb = b.extended(len);

  std::vector<cplx> coeffs(len);
  for (std::size_t k = 0; k < len; ++k) coeffs[k] = ea.coeffs()[k] + factor * eb.coeffs()[k];

  const Envelope na = ea.envelope_from(len);
  const Envelope nb = eb.envelope_from(len);
  Envelope env;
  if (na.vanishes()) {
    env = nb;
    env.scale *= std::abs(factor);
  } else if (nb.vanishes() || factor == cplx{}) {
    env = na;
  } else {
    env = {na.scale + std::abs(factor) * nb.scale, std::max(na.ratio, nb.ratio), std::min(na.decay, nb.decay)};
  }
  PrefixRule rule;
  if (a.extensible() && b.extensible()) {
    rule = [a, b, factor](std::size_t n) {
      const TruncSeries xa = a.extended(n);
      const TruncSeries xb = b.extended(n);
      std::vector<cplx> out(n);
      for (std::size_t k = 0; k < n; ++k) out[k] = xa.coeffs()[k] + factor * xb.coeffs()[k];
      return out;
    };
  }
  return TruncSeries(std::move(coeffs), env, std::move(rule));
}

CPoly taylor_truncate(const TruncSeries& h, std::size_t n) {
  if (n + 1 > h.size() && !h.extensible())
    throw Error(ErrorCode::index_out_of_range, "Taylor degree " + std::to_string(n) + " exceeds the stored prefix");
  const TruncSeries e = h.extended(n + 1);
  return CPoly(std::vector<cplx>(e.coeffs().begin(), e.coeffs().begin() + static_cast<std::ptrdiff_t>(n + 1)));
}

std::size_t tail_length(const Envelope& env, double eps, std::size_t min_len) {
  if (env.vanishes()) return min_len;
  const bool summable = env.ratio < 1.0 || env.decay > 1.0;
  auto ok = [&](std::size_t n) {
    if (!summable) return env.bound(n) <= eps;
    return env.scale * power_geometric_tail(-env.decay, env.ratio, n) <= eps;
  };
  if (ok(min_len)) return min_len;
  std::size_t hi = std::max<std::size_t>(min_len, 8);
  while (!ok(hi)) {
    if (hi >= kMaxSeriesLength)
      throw Error(ErrorCode::cannot_certify, "envelope needs more than " + std::to_string(kMaxSeriesLength) + " terms");
    hi = std::min(hi * 2, kMaxSeriesLength);
  }
  std::size_t lo = std::max(min_len, hi / 2);
  if (hi == lo) return hi;
  while (lo + 1 < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return ok(lo) ? lo : hi;
}

}  // namespace opa
