#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "opa/numeric.hpp"
#include "opa/poly.hpp"

namespace opa {

/// Dense Hermitian matrix, row-major.
class HermMatrix {
 public:
  HermMatrix() = default;
  /// Throws invalid_argument unless entries is n*n and Hermitian to 1e-13
  /// relative to the largest entry.
  HermMatrix(std::size_t n, std::vector<cplx> entries);

  static HermMatrix identity(std::size_t n);
  static HermMatrix from_function(std::size_t n, const std::function<cplx(std::size_t, std::size_t)>& entry);

  std::size_t dim() const { return n_; }
  cplx operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  std::span<const cplx> entries() const { return entries_; }
  std::vector<cplx> apply(std::span<const cplx> x) const;

 private:
  std::size_t n_ = 0;
  std::vector<cplx> entries_;
};

/// Lower-triangular factor L with G = L L^H, grown one bordered row at a time.
///
/// Appending row n only touches that row, so factoring G_n incrementally and
/// factoring it from scratch execute the same floating-point operations.
class CholeskyFactor {
 public:
  /// column holds G[0..n][n] for the new index n = dim(); column[n] is the
  /// diagonal entry. Throws not_positive_definite when the pivot is at or
  /// below 1e-14 times the largest diagonal entry seen so far.
  void append(std::span<const cplx> column);

  std::size_t dim() const { return n_; }
  std::vector<cplx> solve(std::span<const cplx> rhs) const;
  /// Solves with the leading k x k block only.
  std::vector<cplx> solve_leading(std::size_t k, std::span<const cplx> rhs) const;
  /// max pivot^2 / min pivot^2, a cheap lower estimate of the condition number.
  double condition_estimate() const;

 private:
  cplx at(std::size_t i, std::size_t j) const { return rows_[i][j]; }
  std::size_t n_ = 0;
  std::vector<std::vector<cplx>> rows_;
  double max_diag_ = 0.0;
  double min_pivot_sq_ = kInfinity;
  double max_pivot_sq_ = 0.0;
};

/// Solves G a = rhs by Cholesky with one step of iterative refinement.
std::vector<cplx> cholesky_solve(const HermMatrix& g, std::span<const cplx> rhs);
/// Same, reusing a factor of the leading block of g.
std::vector<cplx> refined_solve(const HermMatrix& g, const CholeskyFactor& factor, std::span<const cplx> rhs);

struct Root {
  cplx value;
  unsigned multiplicity = 1;
};

struct RootOptions {
  double cluster_radius = 1e-7;
  unsigned max_sweeps = 200;
};

/// Aberth-Ehrlich roots with multiplicities; sum of multiplicities is deg p.
/// Roots are sorted by modulus, then argument.
std::vector<Root> poly_roots(const CPoly& p, const RootOptions& options = {});

}  // namespace opa
