#include "opa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "opa/error.hpp"

namespace opa {

HermMatrix::HermMatrix(std::size_t n, std::vector<cplx> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n * n) throw Error(ErrorCode::invalid_argument, "matrix entries must have n*n elements");
  double scale = 0.0;
  for (const cplx& e : entries_) scale = std::max(scale, std::abs(e));
  const double tol = 1e-13 * scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol)
        throw Error(ErrorCode::invalid_argument, "matrix is not Hermitian");
}

HermMatrix HermMatrix::identity(std::size_t n) {
  std::vector<cplx> e(n * n);
  for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
  return HermMatrix(n, std::move(e));
}

HermMatrix HermMatrix::from_function(std::size_t n, const std::function<cplx(std::size_t, std::size_t)>& entry) {
  std::vector<cplx> e(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const cplx v = entry(i, j);
      e[i * n + j] = v;
      e[j * n + i] = std::conj(v);
    }
    e[i * n + i] = e[i * n + i].real();
  }
  return HermMatrix(n, std::move(e));
}

std::vector<cplx> HermMatrix::apply(std::span<const cplx> x) const {
  std::vector<cplx> y(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < n_; ++j) acc.add((*this)(i, j) * x[j]);
    y[i] = acc.value();
  }
  return y;
}

void CholeskyFactor::append(std::span<const cplx> column) {
  const std::size_t n = n_;
  if (column.size() < n + 1) throw Error(ErrorCode::invalid_argument, "bordering column is too short");
  std::vector<cplx> row(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    cplx acc = std::conj(column[j]);
    for (std::size_t k = 0; k < j; ++k) acc -= row[k] * std::conj(at(j, k));
    row[j] = acc / at(j, j).real();
  }
  const double diag = column[n].real();
  max_diag_ = std::max(max_diag_, diag);
  double pivot = diag;
  for (std::size_t k = 0; k < n; ++k) pivot -= std::norm(row[k]);
  if (!(pivot > 1e-14 * max_diag_)) {
    std::ostringstream msg;
    msg << "pivot " << pivot << " at index " << n << " (largest diagonal " << max_diag_ << ")";
    throw Error(ErrorCode::not_positive_definite, msg.str());
  }
  row[n] = std::sqrt(pivot);
  min_pivot_sq_ = std::min(min_pivot_sq_, pivot);
  max_pivot_sq_ = std::max(max_pivot_sq_, pivot);
  rows_.push_back(std::move(row));
  ++n_;
}

std::vector<cplx> CholeskyFactor::solve(std::span<const cplx> rhs) const { return solve_leading(n_, rhs); }

std::vector<cplx> CholeskyFactor::solve_leading(std::size_t k, std::span<const cplx> rhs) const {
  if (k > n_ || rhs.size() < k) throw Error(ErrorCode::invalid_argument, "solve dimension mismatch");
  std::vector<cplx> y(k);
  for (std::size_t i = 0; i < k; ++i) {
    cplx acc = rhs[i];
    for (std::size_t j = 0; j < i; ++j) acc -= at(i, j) * y[j];
    y[i] = acc / at(i, i).real();
  }
  std::vector<cplx> x(k);
  for (std::size_t i = k; i-- > 0;) {
    cplx acc = y[i];
    for (std::size_t j = i + 1; j < k; ++j) acc -= std::conj(at(j, i)) * x[j];
    x[i] = acc / at(i, i).real();
  }
  return x;
}

double CholeskyFactor::condition_estimate() const {
  if (n_ == 0) return 1.0;
  return max_pivot_sq_ / min_pivot_sq_;
}

std::vector<cplx> refined_solve(const HermMatrix& g, const CholeskyFactor& factor, std::span<const cplx> rhs) {
  const std::size_t n = g.dim();
  std::vector<cplx> x = factor.solve_leading(n, rhs);
  const std::vector<cplx> gx = g.apply(x);
  std::vector<cplx> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - gx[i];
  const std::vector<cplx> dx = factor.solve_leading(n, r);
  for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
  return x;
}

std::vector<cplx> cholesky_solve(const HermMatrix& g, std::span<const cplx> rhs) {
  const std::size_t n = g.dim();
  if (rhs.size() != n) throw Error(ErrorCode::invalid_argument, "right-hand side has the wrong length");
  CholeskyFactor factor;
  std::vector<cplx> column(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) column[i] = g(i, j);
    factor.append(std::span<const cplx>(column).first(j + 1));
  }
  return refined_solve(g, factor, rhs);
}

namespace {

struct Horner {
  cplx value;
  cplx deriv;
  double scale;  // sum |a_k| |z|^k
};

Horner horner(const CPoly& p, cplx z) {
  cplx v{}, d{};
  double s = 0.0;
  const double az = std::abs(z);
  for (std::size_t k = p.size(); k-- > 0;) {
    d = d * z + v;
    v = v * z + p[k];
    s = s * az + std::abs(p[k]);
  }
  return {v, d, s};
}

// Newton on `q` from z; keeps the iterate only while |q| decreases.
cplx polish(const CPoly& q, cplx z, double max_step) {
  Horner h = horner(q, z);
  for (int it = 0; it < 8; ++it) {
    if (h.deriv == cplx{} || h.value == cplx{}) break;
    const cplx step = h.value / h.deriv;
    if (std::abs(step) > max_step) break;
    const cplx next = z - step;
    const Horner hn = horner(q, next);
    if (!(std::abs(hn.value) < std::abs(h.value))) break;
    z = next;
    h = hn;
  }
  return z;
}

// The (m-1)-th derivative has a simple root at an m-fold root.
cplx polish_multiple(const CPoly& p, cplx z, unsigned m, const RootOptions& options) {
  const double step = std::max(options.cluster_radius, 1e-6 * std::abs(z));
  return polish(p.derivative(m - 1), z, step);
}

}  // namespace

std::vector<Root> poly_roots(const CPoly& p_in, const RootOptions& options) {
  if (p_in.degree() < 1) throw Error(ErrorCode::invalid_argument, "poly_roots needs degree >= 1");

  std::vector<Root> roots;
  // exact zeros at the origin
  std::size_t zero_mult = 0;
  while (p_in[zero_mult] == cplx{}) ++zero_mult;
  const CPoly p(std::vector<cplx>(p_in.coeffs().begin() + static_cast<std::ptrdiff_t>(zero_mult), p_in.coeffs().end()));
  const std::size_t n = static_cast<std::size_t>(p.degree());

  std::vector<cplx> z(n);
  if (n == 1) {
    z[0] = -p[0] / p[1];
  } else if (n > 1) {
    const double lead = std::abs(p[n]);
    double radius = 0.0;
    for (std::size_t k = 0; k < n; ++k) radius = std::max(radius, std::abs(p[k]) / lead);
    radius += 1.0;
    constexpr double kPhase = 0.4;
    for (std::size_t i = 0; i < n; ++i)
      z[i] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n) + kPhase);

    std::vector<bool> done(n, false);
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    unsigned sweep = 0;
    for (; sweep < options.max_sweeps; ++sweep) {
      bool all_done = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (done[i]) continue;
        const Horner h = horner(p, z[i]);
        if (std::abs(h.value) <= 4.0 * kEps * static_cast<double>(n + 1) * h.scale) {
          done[i] = true;
          continue;
        }
        all_done = false;
        if (h.deriv == cplx{}) {
          z[i] += cplx(1e-8, 1e-8) * (1.0 + std::abs(z[i]));
          continue;
        }
        const cplx ratio = h.value / h.deriv;
        cplx repulsion{};
        for (std::size_t j = 0; j < n; ++j)
          if (j != i) repulsion += 1.0 / (z[i] - z[j]);
        const cplx w = ratio / (1.0 - ratio * repulsion);
        z[i] -= w;
        if (std::abs(w) <= kEps * std::abs(z[i])) done[i] = true;
      }
      if (all_done) break;
    }
    if (sweep == options.max_sweeps && !std::all_of(done.begin(), done.end(), [](bool b) { return b; })) {
      std::ostringstream msg;
      msg << "Aberth iteration did not converge in " << options.max_sweeps << " sweeps; best iterate:";
      for (const cplx& r : z) msg << " (" << r.real() << "," << r.imag() << ")";
      throw Error(ErrorCode::no_convergence, msg.str());
    }
  }

  // cluster nearby approximations into multiple roots
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(z[i] - z[j]) <= options.cluster_radius) parent[find(i)] = find(j);

  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  for (const auto& g : groups) {
    if (g.empty()) continue;
    cplx mean{};
    for (std::size_t i : g) mean += z[i];
    mean /= static_cast<double>(g.size());
    const unsigned m = static_cast<unsigned>(g.size());
    roots.push_back({polish_multiple(p, mean, m, options), m});
  }
  // raw iterates of a multiple root scatter like eps^(1/m); polished ones do not
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < roots.size() && !merged; ++i)
      for (std::size_t j = i + 1; j < roots.size() && !merged; ++j) {
        if (std::abs(roots[i].value - roots[j].value) > options.cluster_radius) continue;
        const unsigned m = roots[i].multiplicity + roots[j].multiplicity;
        const cplx mean = (static_cast<double>(roots[i].multiplicity) * roots[i].value +
                           static_cast<double>(roots[j].multiplicity) * roots[j].value) /
                          static_cast<double>(m);
        roots[i] = {polish_multiple(p, mean, m, options), m};
        roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
  }
  if (zero_mult > 0) roots.push_back({cplx{}, static_cast<unsigned>(zero_mult)});

  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma < mb;
    return std::arg(a.value) < std::arg(b.value);
  });
  return roots;
}

}  // namespace opa
