#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opa/linalg.hpp"
#include "opa/series.hpp"
#include "opa/space.hpp"

namespace opa {

inline constexpr double kProjectionEps = 1e-12;
inline constexpr double kMaxKernelCondition = 1e12;

/// F_n = sum_{j <= n} coeffs[n][j] P_j with P_j(k) = k(k-1)...(k-j+1) and
/// F_n(k) = (k+1)...(k+n).
struct FactorialBasisMatrix {
  unsigned N = 0;
  std::vector<std::vector<std::int64_t>> coeffs;
};

/// Exact integer rows 0..N; throws invalid_argument on int64 overflow.
FactorialBasisMatrix factorial_convert(unsigned N);

struct ClassifiedZero {
  cplx beta{};
  unsigned multiplicity = 1;
  /// Reproducibility of orders 0..multiplicity-1.
  std::vector<ReproCertificate> orders;
};

struct ZeroClassification {
  std::vector<ClassifiedZero> zeros;
  /// Z[j] lists indices i with beta_i reproducible of order j and m_i > j.
  std::vector<std::vector<std::size_t>> Z;
  /// Largest j with Z[j] nonempty.
  std::optional<unsigned> R;
  /// False if some needed reproducibility question was undecidable.
  bool decidable = true;
  std::string undecidable_reason;

  /// 1 + sum_j |Z_j|, the dimension of the kernel part of K_Sf.
  std::size_t ksf_dimension() const;
};

/// Roots within kBoundaryTol of the unit circle are snapped onto it.
ZeroClassification classify_zeros(const WeightSequence& space, const CPoly& f);

struct ProjectionTerm {
  std::size_t zero = 0;  // index into ZeroClassification::zeros
  unsigned order = 0;
  KernelSpec kernel;
  cplx C{};
};

/// phi = Proj_[f](1) = 1 + sum C_{i,j} k^j_{beta_i}.
struct ProjectionResult {
  WeightSequence space;
  CPoly f_monic;
  ZeroClassification classification;
  std::vector<ProjectionTerm> terms;
  HermMatrix kernel_gram;  // rows/cols follow terms
  double gram_entry_error = 0;
  double condition_estimate = 1;
  cplx phi_at_zero{1.0, 0.0};
  /// ||1 - phi||^2 = 1 - Re phi(0)
  double dist_sq = 0;
  /// max |phi^(l)(beta_s)| over the classified conditions
  double interpolation_residual = 0;

  bool cyclic() const { return terms.empty(); }
  cplx phi_coefficient(std::size_t k) const;
  /// phi^(l)(beta) for a reproducible (beta, l), via kernel inner products.
  Certified phi_derivative_at(const KernelSpec& at, double eps) const;
  /// phi(z) for |z| < 1.
  Certified phi_eval(cplx z, double eps) const;
  /// max_j |<u, z^j u> - delta_j0| over 0 <= j <= max_shift for
  /// u = phi / sqrt(phi(0)), from the derivative values of phi at the zeros.
  double inner_defect(std::size_t max_shift, double eps = kProjectionEps) const;
};


/// Solves the kernel interpolation system phi^(l)(beta_s) = 0 for every
/// classified (s, l). Throws undecidable when the classification is, and
/// ill_conditioned when the kernel Gram matrix is numerically singular.
ProjectionResult project_unity(const WeightSequence& space, const CPoly& f, double eps = kProjectionEps);

/// ||h - phi|| for polynomial h, from ||h||^2 - 2 Re <h, phi> + ||phi||^2 with
/// <h, phi> = h(0) + sum conj(C) h^(j)(beta).
double distance_to_phi(const ProjectionResult& phi, const CPoly& h);

/// Hardy-space projection conj(B(0)) B with B the Blaschke product over the
/// zeros of f in the open disk.
struct BlaschkeProjection {
  std::vector<Root> zeros_in_disk;
  TruncSeries phi;
  cplx phi_at_zero{1.0, 0.0};
  double dist_sq = 0;
};

BlaschkeProjection blaschke_projection(const CPoly& f);

struct RomanReport {
  bool equivalent = false;
  bool same_zero_sets = false;
  double max_constant_gap = 0;
  std::string detail;
};

/// Proj_[f](1) == Proj_[h](1): same classified (beta, order) pairs and
/// constants within eps.
RomanReport roman_equivalent(const WeightSequence& space, const CPoly& f, const CPoly& h, double eps = 1e-8);

struct RecurrenceReport {
  std::size_t K = 0;
  /// r_k = sum_j conj(a_j) w_{k+j} phi_{k+j} for monic f = sum a_j z^j.
  std::vector<cplx> residuals;
  double max_residual = 0;
};

/// Checks that Phi_n = w_n phi_n satisfies the constant-coefficient
/// recurrence given by the monic f for 1 <= k <= K.
RecurrenceReport recurrence_oracle(const WeightSequence& space, const CPoly& f, const ProjectionResult& phi,
                                   std::size_t K);

}  // namespace opa
