#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "opa/numeric.hpp"
#include "opa/poly.hpp"

namespace opa {

/// Certified bound |h_k| <= scale * ratio^k * (k+1)^(-decay) for every k at
/// or past the stored prefix of a series.
///
/// ratio < 1 is the usual case. ratio == 1 is admitted only together with
/// decay > 0; it represents kernels at boundary points, whose coefficients
/// decay algebraically rather than geometrically.
struct Envelope {
  double scale = 0.0;
  double ratio = 0.0;
  double decay = 0.0;

  bool vanishes() const { return scale == 0.0; }
  double bound(std::size_t k) const;
};

/// Produces the first n coefficients of a series.
using PrefixRule = std::function<std::vector<cplx>(std::size_t n)>;

/// num / prod_i (1 - poles[i] z), every |poles[i]| < 1.
struct RationalForm {
  CPoly num;
  std::vector<cplx> poles;
};

/// Truncated power series with a certified tail envelope.
///
/// Values are immutable. A series may carry a PrefixRule, in which case more
/// coefficients can be generated on demand (extended()), and a RationalForm,
/// which lets products and sums of rational series cancel poles exactly.
class TruncSeries {
 public:
  TruncSeries() = default;
  TruncSeries(std::vector<cplx> coeffs, Envelope tail, PrefixRule rule = {});

  static TruncSeries from_poly(const CPoly& p);
  /// num / prod (1 - c_i z). len == 0 picks a length from the envelope.
  static TruncSeries rational(const CPoly& num, std::vector<cplx> poles, std::size_t len = 0);
  /// num / den with den zero-free on the closed unit disk.
  static TruncSeries rational(const CPoly& num, const CPoly& den, std::size_t len = 0);
  /// 1 / (1 - c z)
  static TruncSeries geometric(cplx c, std::size_t len = 0);
  /// (|b|/b) (b - z) / (1 - conj(b) z); b = 0 gives z.
  static TruncSeries blaschke_factor(cplx beta, std::size_t len = 0);

  std::size_t size() const { return coeffs_.size(); }
  std::span<const cplx> coeffs() const { return coeffs_; }
  const Envelope& tail() const { return tail_; }
  const std::optional<RationalForm>& rational_form() const { return rational_; }

  /// True when every coefficient past the stored prefix is exactly zero.
  bool is_polynomial() const { return tail_.vanishes(); }
  bool extensible() const { return static_cast<bool>(rule_) || is_polynomial(); }

  /// Stored coefficient, or zero past the prefix of a polynomial.
  cplx coeff(std::size_t k) const;
  /// Copy holding at least len coefficients.
  TruncSeries extended(std::size_t len) const;
  CPoly to_poly() const;

  /// Envelope valid for all k >= start (stored coefficients folded in).
  Envelope envelope_from(std::size_t start) const;
  /// Envelope with decay 0 and ratio < 1 valid for all k >= 0.
  Envelope global_envelope() const;

  /// Partial sum at z plus a bound on the remaining terms.
  Certified eval(cplx z) const;
  /// z^k * h
  TruncSeries shifted(std::size_t k) const;
  TruncSeries scaled(cplx c) const;

 private:
  std::vector<cplx> coeffs_;
  Envelope tail_;
  PrefixRule rule_;
  std::optional<RationalForm> rational_;
};

/// a * b with out_len exact convolution coefficients (0: automatic).
TruncSeries series_mul(const TruncSeries& a, const TruncSeries& b, std::size_t out_len = 0);
/// a + factor * b
TruncSeries series_add(const TruncSeries& a, const TruncSeries& b, cplx factor = 1.0);

/// T_n(h) = sum_{k <= n} h_k z^k
CPoly taylor_truncate(const TruncSeries& h, std::size_t n);

/// Smallest N >= min_len such that the envelope's summed tail past N is at
/// most eps. When the coefficient sum diverges (ratio == 1, decay <= 1) the
/// criterion is bound(N) <= eps instead.
std::size_t tail_length(const Envelope& env, double eps, std::size_t min_len = 0);

inline constexpr std::size_t kMaxSeriesLength = std::size_t{1} << 22;
inline constexpr double kDefaultCoeffTail = 1e-17;

}  // namespace opa
