#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "opa/element.hpp"
#include "opa/numeric.hpp"
#include "opa/poly.hpp"
#include "opa/series.hpp"

namespace opa {

enum class WeightKind { dirichlet, custom, multiplier };

/// How a custom weight prefix continues past its last stored entry.
enum class Extension {
  ratio,     // power law (k+1)^g matching the last stored ratio, so w_{k+1}/w_k -> 1
  constant,  // repeat the last stored weight
  formula,   // user callback with declared growth bounds
};

/// scale_lo (k+1)^gamma_lo <= w_k <= scale_hi (k+1)^gamma_hi for k >= start.
/// exact means both sides coincide, i.e. w_k is a pure power law there.
struct GrowthBound {
  std::size_t start = 0;
  double scale_lo = 1.0;
  double gamma_lo = 0.0;
  double scale_hi = 1.0;
  double gamma_hi = 0.0;
  bool exact = false;
};

/// The weight data defining a weighted Hardy space H^2_w, or a (1/m)H^2
/// space when kind() == multiplier.
class WeightSequence {
 public:
  /// w_k = (k+1)^alpha
  static WeightSequence dirichlet(double alpha);
  static WeightSequence hardy() { return dirichlet(0.0); }
  /// prefix[0] must be 1; Extension::formula is not accepted here.
  static WeightSequence custom(std::vector<double> prefix, Extension extension = Extension::ratio);
  static WeightSequence custom(std::function<double(std::size_t)> formula, GrowthBound bound);
  /// Norm ||h|| = ||m h||_{H^2}; m must not vanish in the open unit disk.
  static WeightSequence multiplier(CPoly m);

  WeightKind kind() const { return kind_; }
  bool is_diagonal() const { return kind_ != WeightKind::multiplier; }
  /// w_0 = 1 and monomials orthogonal, so the kernel at 0 is the constant 1.
  bool unit_kernel_at_zero() const { return is_diagonal(); }

  /// w_k; diagonal kinds only.
  double weight(std::size_t k) const;
  const GrowthBound& growth() const { return growth_; }
  /// Certified exponent with w_k <= (k+1)^gamma for every k.
  double growth_gamma() const;

  double alpha() const { return alpha_; }
  const std::vector<double>& prefix() const { return prefix_; }
  Extension extension() const { return extension_; }
  const CPoly& multiplier_poly() const { return m_; }

 private:
  WeightKind kind_ = WeightKind::dirichlet;
  double alpha_ = 0.0;
  std::vector<double> prefix_;
  Extension extension_ = Extension::ratio;
  std::function<double(std::size_t)> formula_;
  GrowthBound growth_;
  CPoly m_;
};

enum class KernelFlavor {
  derivative_of_kernel,    // d^n/dz^n of k_beta, coefficients F_n(k) conj(b)^{k+n} / w_k
  kernel_for_derivatives,  // <h, k> = h^(n)(beta), coefficients P_n(k) conj(b)^{k-n} / w_k
};

struct KernelSpec {
  cplx beta{};
  unsigned order = 0;
  KernelFlavor flavor = KernelFlavor::kernel_for_derivatives;
};

enum class Verdict { yes, no, undecidable };

struct ReproCertificate {
  Verdict verdict = Verdict::undecidable;
  std::string reason;
  bool yes() const { return verdict == Verdict::yes; }
};

/// Points with || |beta| - 1 | <= this are treated as lying on the unit circle.
inline constexpr double kBoundaryTol = 1e-9;

bool on_unit_circle(cplx beta);

/// sum_k w_k a_k conj(b_k), exact for polynomials.
cplx inner_poly(const WeightSequence& w, const CPoly& a, const CPoly& b);
double norm_sq(const WeightSequence& w, const CPoly& a);

/// Inner product of two series with a rigorous truncation error <= eps.
Certified inner_series(const WeightSequence& w, const TruncSeries& a, const TruncSeries& b, double eps);

Certified inner(const WeightSequence& w, const Element& a, const Element& b, double eps);

/// Whether evaluation of the order-th derivative at beta is bounded.
ReproCertificate is_reproducible(const WeightSequence& w, cplx beta, unsigned order);

/// Coefficient k of the kernel described by spec.
cplx kernel_coefficient(const WeightSequence& w, const KernelSpec& spec, std::size_t k);

/// Kernel as a certified series whose stored prefix leaves a tail <= eps.
TruncSeries kernel_series(const WeightSequence& w, const KernelSpec& spec, double eps);

/// <k^{a.order}_{a.beta}, k^{b.order}_{b.beta}> for derivative-evaluation
/// kernels, i.e. the b.order-th derivative of the first kernel at b.beta.
/// Boundary points use an integral-comparison remainder.
Certified kernel_inner(const WeightSequence& w, const KernelSpec& a, const KernelSpec& b, double eps);

}  // namespace opa
