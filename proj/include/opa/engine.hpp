#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "opa/element.hpp"
#include "opa/linalg.hpp"
#include "opa/space.hpp"

namespace opa {

/// Default certified tolerance for series-backed Gram entries.
inline constexpr double kGramEps = 1e-14;

/// G[i][j] = <z^i f, z^j f>, rhs[k] = <g, z^k f>.
///
/// The normal equations read sum_i G[i][j] a_i = rhs[j], i.e. conj(G) a = rhs.
struct GramSystem {
  WeightSequence space;
  Element f;
  Element g;
  std::size_t n = 0;
  HermMatrix G;
  std::vector<cplx> rhs;
  cplx f_dot_g{};        // <f, g>
  double g_norm_sq = 0;  // ||g||^2
  double entry_error = 0;  // certified bound on every entry's truncation error

  /// Leading (k+1) x (k+1) block as its own system.
  GramSystem leading(std::size_t k) const;
};

/// Throws orthogonal_data when <f, g> vanishes within its certified error.
GramSystem build_system(const WeightSequence& space, const Element& f, const Element& g, std::size_t n,
                        double eps = kGramEps);

struct OpaResult {
  std::size_t n = 0;
  CPoly p_star;
  double distance_sq = 0;  // ||p_star f - g||^2
  /// max_k |<p_star f - g, z^k f>| over 0 <= k <= n.
  double orthogonality_residual = 0;
  /// (p_star f)(0)
  cplx pf_at_zero{};
};

OpaResult optimal_approximant(const WeightSequence& space, const Element& f, const Element& g, std::size_t n,
                              double eps = kGramEps);

struct SweepOptions {
  /// 1: incremental bordered Cholesky. >1: independent per-n solves on a pool.
  unsigned threads = 1;
  double eps = kGramEps;
};

/// Approximants for n = 0..n_max, ordered by n.
std::vector<OpaResult> sweep(const WeightSequence& space, const Element& f, const Element& g, std::size_t n_max,
                             const SweepOptions& options = {});

/// ||T_n(1/f) f - 1||, the residual of the Taylor truncation of 1/f.
double taylor_residual(const WeightSequence& space, const CPoly& f, std::size_t n);

struct InnerCertificate {
  bool inner = false;
  /// Every shift was checked (polynomial f), not just 0..max_shift.
  bool exhaustive = false;
  std::size_t shifts_checked = 0;
  double max_deviation = 0;  // max_j |<f, z^j f> - delta_j0|
  double certified_error = 0;
};

/// Checks <f, z^j f> = delta_j0 for 0 <= j <= max_shift within eps. For
/// polynomial f the shift range is deg f and the check covers every j.
InnerCertificate is_inner(const WeightSequence& space, const Element& f, std::size_t max_shift = 16,
                          double eps = 1e-10);

enum class StabilizationCertificate { exact_orthogonality, tolerance_window, none };

struct StabilizationReport {
  bool stabilized = false;
  std::optional<std::size_t> M;
  StabilizationCertificate certificate = StabilizationCertificate::none;
  std::optional<CPoly> p_M;
  /// max over M < n <= n_max of the coefficient sup-norm distance to p_M.
  double window_deviation = 0;
  /// Largest |<p_M f - g, z^k f>| on the exhaustive range (exact certificate).
  double orthogonality_residual = 0;
  std::string detail;
  std::vector<OpaResult> approximants;
};

inline constexpr double kStabilizationEps = 1e-8;

StabilizationReport detect_stabilization(const WeightSequence& space, const Element& f, const Element& g,
                                         std::size_t n_max, double eps = kStabilizationEps,
                                         const SweepOptions& options = {});

struct KsfCertificate {
  bool member = false;
  /// Every shift k >= 1 is accounted for (exactly or by a tail bound).
  std::size_t shifts_checked = 0;
  double max_abs = 0;  // max_k |<h, z^k f>|
  double certified_error = 0;
};

/// h in K_Sf, i.e. <h, z^k f> = 0 for all k >= 1, within eps.
KsfCertificate ksf_membership(const WeightSequence& space, const Element& f, const Element& h, double eps = 1e-10);
/// Same for h = k^n_beta (kernel_for_derivatives), exact for polynomial f,
/// including boundary points.
KsfCertificate ksf_membership(const WeightSequence& space, const CPoly& f, const KernelSpec& kernel,
                              double eps = 1e-10);

struct DossierCheck {
  std::string name;
  bool passed = false;
  double deviation = 0;
  std::string detail;
};

struct TheoremDossier {
  std::size_t M = 0;
  CPoly p_M;
  /// sqrt((p_M f)(0)); p_M f = c u with u inner.
  double c = 0;
  std::vector<DossierCheck> checks;
  bool all_passed() const;
};

/// Checks the equivalent statements attached to a stabilized approximant of
/// 1/f: normalized p_M f inner, p_M f orthogonal to z^k f (k >= 1),
/// ||p_M f||^2 = (p_M f)(0), zeros of p_M off the open disk.
TheoremDossier verify_main_theorem(const WeightSequence& space, const Element& f, const StabilizationReport& report,
                                   double eps = 1e-8);

enum class CyclicityVerdict { cyclicity_consistent, non_cyclic, inconclusive };

struct DiagnosticRow {
  std::size_t n = 0;
  double distance_sq = 0;
  double one_minus_pf0 = 0;  // 1 - Re (p_n f)(0)
  double pf0_imag = 0;
};

struct CyclicityDiagnostic {
  std::vector<DiagnosticRow> rows;
  bool identity_holds = false;  // both distance columns agree within 1e-9
  double identity_max_gap = 0;
  bool decreasing = false;  // nonincreasing up to 1e-12
  std::optional<double> expected_plateau;
  CyclicityVerdict verdict = CyclicityVerdict::inconclusive;
  std::string detail;
};

/// Distance table for g = 1. expected_plateau is the projection distance
/// when known (0 for cyclic f).
CyclicityDiagnostic cyclicity_diagnostic(const WeightSequence& space, const Element& f, std::size_t n_max,
                                         std::optional<double> expected_plateau = std::nullopt,
                                         const SweepOptions& options = {});

std::string_view to_string(StabilizationCertificate c);
std::string_view to_string(CyclicityVerdict v);

}  // namespace opa
