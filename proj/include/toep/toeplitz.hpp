#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "toep/kernels.hpp"
#include "toep/matrix.hpp"
#include "toep/report.hpp"
#include "toep/tuples.hpp"

namespace toep {

/// Solution space of S_i* X T_i = X, orthonormal in the trace inner product.
struct SolutionSpace {
  index_t domain_dim = 0;    // dimension of the space T acts on
  index_t codomain_dim = 0;  // dimension of the space S acts on
  std::vector<ComplexMatrix> basis;
  double residual = 0.0;

  index_t dimension() const { return static_cast<index_t>(basis.size()); }
};

enum class ExtensionKind { isometric, co_isometric, unitary, none };

/// Triple (J, K, V) with J T_i = V_i J. K is carried implicitly as J's row
/// count; `canonical` means J*J equals the limit of P^{*k} P^k.
struct PseudoExtension {
  ComplexMatrix J;  // K x H
  OperatorTuple V;
  ExtensionKind kind = ExtensionKind::none;
  bool canonical = false;
  bool commuting = false;
  Report cert;

  PseudoExtension(ComplexMatrix j, OperatorTuple v) : J(std::move(j)), V(std::move(v)) {}

  index_t extension_dim() const { return J.rows(); }
};

/// max_i || S_i* X T_i - X ||.
inline double toeplitz_residual(const ComplexMatrix& x, const OperatorTuple& s,
                                const OperatorTuple& t) {
  if (s.count() != t.count()) throw Error(errc::dim_mismatch, "tuple lengths differ");
  if (x.rows() != s.dim() || x.cols() != t.dim())
    throw Error(errc::dim_mismatch, "X must map the T-space into the S-space");
  double r = 0.0;
  for (int i = 0; i < s.count(); ++i)
    r = std::max(r, (s.op(i).adjoint() * x * t.op(i) - x).operator_norm());
  return r;
}

inline double toeplitz_residual(const ComplexMatrix& x, const OperatorTuple& t) {
  return toeplitz_residual(x, t, t);
}

namespace detail {

/// Deterministic phase for a vectorized basis element: the entry of largest
/// modulus (lowest index on ties) is rotated to the positive real axis.
inline void canonicalize_matrix_phase(ComplexMatrix& x) {
  index_t pr = -1, pc = -1;
  double best = 0.0;
  for (index_t i = 0; i < x.rows(); ++i)
    for (index_t j = 0; j < x.cols(); ++j) {
      double a = std::abs(x(i, j));
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        pr = i;
        pc = j;
      }
    }
  if (pr < 0 || best == 0.0) return;
  cdouble rot = std::conj(x(pr, pc) / best);
  x *= rot;
}

}  // namespace detail

/// Joint nullspace of X -> S_i* X T_i - X via the vectorized lift
/// vec(S_i* X T_i) = (T_i^T (x) S_i*) vec(X).
inline SolutionSpace solution_space(const OperatorTuple& s, const OperatorTuple& t) {
  if (s.count() != t.count()) throw Error(errc::dim_mismatch, "tuple lengths differ");
  const index_t dk = s.dim(), dh = t.dim();
  const index_t nvar = dk * dh;
  ComplexMatrix lifted(static_cast<index_t>(s.count()) * nvar, nvar);
  for (int i = 0; i < s.count(); ++i) {
    ComplexMatrix mi =
        kronecker(t.op(i).transpose(), s.op(i).adjoint()) - ComplexMatrix::identity(nvar);
    lifted.set_block(static_cast<index_t>(i) * nvar, 0, mi);
  }
  Eigen::BDCSVD<EigenMatrix> svd(lifted.eigen(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  index_t rank = 0;
  for (index_t k = 0; k < sv.size(); ++k)
    if (sv(k) > kRankTol * smax && sv(k) > 0.0) ++rank;

  SolutionSpace space;
  space.domain_dim = dh;
  space.codomain_dim = dk;
  for (index_t k = rank; k < nvar; ++k) {
    ComplexMatrix v = ComplexMatrix::from_eigen(svd.matrixV().col(k));
    ComplexMatrix x = unvectorize(v, dk, dh);
    detail::canonicalize_matrix_phase(x);
    space.basis.push_back(std::move(x));
    space.residual = std::max(space.residual, toeplitz_residual(space.basis.back(), s, t));
  }
  return space;
}

inline SolutionSpace solution_space(const OperatorTuple& t) { return solution_space(t, t); }

/// Limit Q of the decreasing iteration A_{k+1} = P* A_k P from A_0 = I,
/// returned as its positive square root. The limit is an orthogonal
/// projection in finite dimension, so iteration continues until the spectrum
/// of A_k splits cleanly into a cluster near 1 and a cluster at 0; the small
/// cluster is then zeroed before the square root.
inline ComplexMatrix compute_qt(const OperatorTuple& t, double tol = 1e-12,
                                long max_iter = 10000) {
  const ComplexMatrix p = product_contraction(t);
  const ComplexMatrix ph = p.adjoint();
  ComplexMatrix a = ComplexMatrix::identity(t.dim());
  const double band_lo = 100.0 * tol;
  const double band_hi = 0.5;
  double delta = 0.0;
  long k = 0;
  for (; k < max_iter; ++k) {
    ComplexMatrix next = (ph * a * p).hermitian_part();
    delta = (next - a).operator_norm();
    a = std::move(next);
    if (delta > tol) continue;
    Eigen::SelfAdjointEigenSolver<EigenMatrix> es(a.eigen(), Eigen::EigenvaluesOnly);
    bool split = true;
    for (index_t j = 0; j < es.eigenvalues().size(); ++j) {
      double ev = es.eigenvalues()(j);
      if (ev > band_lo && ev < band_hi) {
        split = false;
        break;
      }
    }
    if (split) {
      Eigen::SelfAdjointEigenSolver<EigenMatrix> full(a.eigen());
      EigenMatrix q = EigenMatrix::Zero(t.dim(), t.dim());
      for (index_t j = 0; j < full.eigenvalues().size(); ++j) {
        double ev = full.eigenvalues()(j);
        if (ev < band_hi) continue;  // vanishing cluster
        q += std::sqrt(ev) * full.eigenvectors().col(j) * full.eigenvectors().col(j).adjoint();
      }
      return ComplexMatrix::from_eigen(q).hermitian_part();
    }
  }
  throw Error(errc::not_converged,
              "Q iteration: " + std::to_string(k) + " iterations, last delta " +
                  std::to_string(delta));
}

/// Canonical isometric pseudo-extension on K = range(Q): V_i Q h = Q T_i h.
/// `reversed_basis` reruns the construction through the reversed coordinate
/// order of K, giving an independent realization of the same extension.
inline PseudoExtension canonical_isometric_pe(const OperatorTuple& t, double tol = 1e-8,
                                              bool reversed_basis = false) {
  ComplexMatrix q = compute_qt(t);
  if (q.operator_norm() <= 1e-8)
    throw Error(errc::zero_qt, "the adjoint of the product contraction is pure");
  SubspaceBasis range = range_kernel(q).first;
  ComplexMatrix basis = range.basis;
  if (reversed_basis) {
    ComplexMatrix rev(basis.rows(), basis.cols());
    for (index_t j = 0; j < basis.cols(); ++j)
      rev.set_block(0, basis.cols() - 1 - j, basis.column(j));
    basis = rev;
  }
  ComplexMatrix j = basis.adjoint() * q;  // K coordinates of h -> Q h
  std::vector<ComplexMatrix> v;
  for (int i = 0; i < t.count(); ++i)
    v.push_back(douglas_solve(basis.adjoint() * q * t.op(i), j, tol));

  PseudoExtension pe(j, OperatorTuple::unchecked(v));
  pe.kind = ExtensionKind::isometric;
  pe.canonical = true;
  pe.commuting = true;
  pe.cert.theorem = "thm-2.1";

  const index_t r = range.rank;
  double iso = 0.0, comm = 0.0, inter = 0.0;
  ComplexMatrix prod = ComplexMatrix::identity(r);
  for (int i = 0; i < t.count(); ++i) {
    const ComplexMatrix& vi = pe.V.op(i);
    iso = std::max(iso,
                   (vi.adjoint() * vi - ComplexMatrix::identity(r)).operator_norm());
    inter = std::max(inter, (pe.J * t.op(i) - vi * pe.J).operator_norm());
    prod = prod * vi;
    for (int l = i + 1; l < t.count(); ++l)
      comm = std::max(comm, (vi * pe.V.op(l) - pe.V.op(l) * vi).operator_norm());
  }
  pe.cert.add("isometry_max", iso, tol);
  pe.cert.add("product_isometry", (prod.adjoint() * prod - ComplexMatrix::identity(r)).operator_norm(), tol);
  pe.cert.add("commute_max", comm, tol);
  pe.cert.add("intertwine_max", inter, tol);
  pe.cert.add("jstar_j_minus_qt_sq", (pe.J.adjoint() * pe.J - q * q).operator_norm(), tol);
  if (!pe.cert.pass())
    throw Error(errc::not_converged, "canonical extension certificates out of tolerance");
  return pe;
}

/// Factorization R = J* J with J T_i = V_i J through K = range(R^{1/2}).
/// Range directions of R below 1e-12 * ||R|| are dropped so the Douglas step
/// stays conditioned; this moves J* J by no more than that amount.
inline PseudoExtension factorize_positive(const ComplexMatrix& r, const OperatorTuple& t,
                                          double tol = 1e-8) {
  if (!r.is_square() || r.rows() != t.dim())
    throw Error(errc::dim_mismatch, "R must act on the tuple's space");
  if (lambda_min_hermitian(r) < -tol) throw Error(errc::not_psd, "R is not PSD");
  double tres = toeplitz_residual(r.hermitian_part(), t, t);
  if (tres > tol)
    throw Error(errc::not_toeplitz, "residual " + std::to_string(tres));

  ComplexMatrix rh = psd_sqrt(r, tol);
  double sigma_cut = 1e-6 * std::sqrt(std::max(r.operator_norm(), 0.0));
  PseudoExtension pe;
  pe.cert.theorem = "thm-1.2";
  if (rh.operator_norm() <= sigma_cut || rh.operator_norm() == 0.0) {
    // zero operator factorizes through the zero-dimensional space
    pe.J = ComplexMatrix(0, t.dim());
    std::vector<ComplexMatrix> v(static_cast<size_t>(t.count()), ComplexMatrix(0, 0));
    pe.V = OperatorTuple::unchecked(std::move(v));
    pe.kind = ExtensionKind::isometric;
    pe.cert.add("jstar_j_minus_r", r.operator_norm(), 10 * tol);
    return pe;
  }

  Eigen::JacobiSVD<EigenMatrix> svd(rh.eigen(), Eigen::ComputeFullU);
  index_t rank = 0;
  for (index_t k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > std::max(sigma_cut, kRankTol * svd.singularValues()(0))) ++rank;
  ComplexMatrix basis = ComplexMatrix::from_eigen(svd.matrixU().leftCols(rank));
  detail::canonicalize_column_phases(basis);

  ComplexMatrix j = basis.adjoint() * rh;
  std::vector<ComplexMatrix> v;
  for (int i = 0; i < t.count(); ++i)
    v.push_back(douglas_solve(basis.adjoint() * rh * t.op(i), j, tol));

  pe.J = j;
  pe.V = OperatorTuple::unchecked(v);
  pe.kind = ExtensionKind::isometric;
  pe.canonical = false;
  pe.commuting = true;

  double iso = 0.0, inter = 0.0, comm = 0.0;
  for (int i = 0; i < t.count(); ++i) {
    const ComplexMatrix& vi = pe.V.op(i);
    iso = std::max(iso, (vi.adjoint() * vi - ComplexMatrix::identity(rank)).operator_norm());
    inter = std::max(inter, (pe.J * t.op(i) - vi * pe.J).operator_norm());
    for (int l = i + 1; l < t.count(); ++l)
      comm = std::max(comm, (vi * pe.V.op(l) - pe.V.op(l) * vi).operator_norm());
  }
  pe.cert.add("jstar_j_minus_r", (pe.J.adjoint() * pe.J - r).operator_norm(), 10 * tol);
  pe.cert.add("intertwine_max", inter, tol * (1.0 + rh.operator_norm()));
  pe.cert.add("isometry_max", iso, tol);
  pe.cert.add("commute_max", comm, tol);
  return pe;
}

namespace detail {

/// Span of the unimodular-eigenvalue eigenvectors of a contraction. Such
/// eigenvectors are reducing, so the span is well conditioned.
inline SubspaceBasis unimodular_eigenspace(const ComplexMatrix& a, double mod_tol = 1e-8) {
  Eigen::ComplexEigenSolver<EigenMatrix> es(a.eigen(), true);
  std::vector<index_t> keep;
  for (index_t k = 0; k < es.eigenvalues().size(); ++k)
    if (std::abs(std::abs(es.eigenvalues()(k)) - 1.0) <= mod_tol) keep.push_back(k);
  if (keep.empty()) return SubspaceBasis(a.rows(), ComplexMatrix(a.rows(), 0));
  ComplexMatrix cols(a.rows(), static_cast<index_t>(keep.size()));
  for (size_t j = 0; j < keep.size(); ++j)
    cols.set_block(0, static_cast<index_t>(j),
                   ComplexMatrix::from_eigen(es.eigenvectors().col(keep[j])));
  return range_kernel(cols).first;
}

}  // namespace detail

/// Structural consequences of compactness for a Toeplitz X: commutation with
/// the tuple and vanishing off every unimodular eigenvector span.
inline Report structure_checks(const ComplexMatrix& x, const OperatorTuple& t) {
  if (toeplitz_residual(x, t, t) > 1e-8)
    throw Error(errc::not_toeplitz, "structure_checks expects a Toeplitz operator");
  Report rep;
  rep.theorem = "prop-2.4";
  const double tol = 1e-7;
  double commute = 0.0, commute_adj = 0.0;
  for (int i = 0; i < t.count(); ++i) {
    commute = std::max(commute, (x * t.op(i) - t.op(i) * x).operator_norm());
    commute_adj =
        std::max(commute_adj, (x.adjoint() * t.op(i) - t.op(i) * x.adjoint()).operator_norm());
  }
  ComplexMatrix p = product_contraction(t);
  rep.add("commute_with_ops", commute, tol);
  rep.add("adjoint_commute_with_ops", commute_adj, tol);
  rep.add("commute_with_product", (x * p - p * x).operator_norm(), tol);

  double offspan = 0.0;
  for (int i = 0; i < t.count(); ++i) {
    SubspaceBasis u = detail::unimodular_eigenspace(t.op(i));
    ComplexMatrix pperp = ComplexMatrix::identity(t.dim()) - u.projector();
    offspan = std::max(offspan, (x * pperp).operator_norm());
  }
  SubspaceBasis up = detail::unimodular_eigenspace(p);
  ComplexMatrix pperp = ComplexMatrix::identity(t.dim()) - up.projector();
  offspan = std::max(offspan, (x * pperp).operator_norm());
  rep.add("vanishes_off_unimodular_span", offspan, tol);
  return rep;
}

/// Verifies that the limit operator is an orthogonal projection and that the
/// tuple compresses to unitaries on its range.
inline Report qt_projection_check(const OperatorTuple& t) {
  Report rep;
  rep.theorem = "coro-2.7";
  const double tol = 1e-7;
  ComplexMatrix q = compute_qt(t);
  rep.add("projection_defect", (q * q - q).operator_norm(), tol);
  if (q.operator_norm() <= 1e-8) {
    rep.notes.push_back("limit is zero; compression checks are vacuous");
    return rep;
  }
  SubspaceBasis range = range_kernel(q).first;
  auto unitary_defect = [&](const ComplexMatrix& m) {
    ComplexMatrix c = range.basis.adjoint() * m * range.basis;
    ComplexMatrix id = ComplexMatrix::identity(range.rank);
    return std::max((c.adjoint() * c - id).operator_norm(), (c * c.adjoint() - id).operator_norm());
  };
  double worst = 0.0;
  for (int i = 0; i < t.count(); ++i) worst = std::max(worst, unitary_defect(t.op(i)));
  rep.add("compression_unitary_max", worst, tol);
  rep.add("product_compression_unitary", unitary_defect(product_contraction(t)), tol);
  return rep;
}

/// For commuting unitary tuples U, V: a nonzero intertwiner B U_i = V_i B
/// exposes joint reducing subspaces M = (ker B)^perp and N = ran B on which
/// the restrictions are unitarily equivalent via the polar partial isometry.
struct IntertwinerReport {
  bool equivalence_found = false;
  SubspaceBasis m;  // in the U space
  SubspaceBasis n;  // in the V space
  ComplexMatrix intertwiner;       // B
  ComplexMatrix partial_isometry;  // polar factor of B
  Report cert;
};

inline IntertwinerReport unitary_intertwiner_subspaces(const OperatorTuple& u,
                                                       const OperatorTuple& v) {
  auto require_unitary = [](const OperatorTuple& w, const char* which) {
    for (int i = 0; i < w.count(); ++i) {
      ComplexMatrix id = ComplexMatrix::identity(w.dim());
      if ((w.op(i).adjoint() * w.op(i) - id).operator_norm() > 1e-10)
        throw Error(errc::not_unitary, std::string(which) + " tuple entry " + std::to_string(i + 1));
    }
  };
  require_unitary(u, "first");
  require_unitary(v, "second");

  IntertwinerReport out;
  out.cert.theorem = "coro-4.5";
  SolutionSpace sol = solution_space(v, u);
  if (sol.dimension() == 0) {
    out.cert.notes.push_back("no joint reducing equivalence detected");
    out.cert.add_flag("solution_space_zero", true);
    return out;
  }
  const ComplexMatrix& b = sol.basis.front();
  Eigen::JacobiSVD<EigenMatrix> svd(b.eigen(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  index_t rank = 0;
  for (index_t k = 0; k < sv.size(); ++k)
    if (sv(k) > kRankTol * sv(0)) ++rank;
  ComplexMatrix w = ComplexMatrix::from_eigen(svd.matrixU().leftCols(rank));
  ComplexMatrix z = ComplexMatrix::from_eigen(svd.matrixV().leftCols(rank));
  detail::canonicalize_column_phases(w);
  detail::canonicalize_column_phases(z);
  out.m = SubspaceBasis(u.dim(), z);
  out.n = SubspaceBasis(v.dim(), w);
  out.intertwiner = b;
  // rebuild the polar factor from the un-canonicalized pair so W Sigma Z*
  // still reproduces B
  ComplexMatrix omega = ComplexMatrix::from_eigen(
      svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).adjoint());
  out.partial_isometry = omega;
  out.equivalence_found = true;

  const double tol = 1e-7;
  double inter_b = 0.0, inter_omega = 0.0, reduce = 0.0;
  ComplexMatrix pm = out.m.projector();
  ComplexMatrix pn = out.n.projector();
  for (int i = 0; i < u.count(); ++i) {
    inter_b = std::max(inter_b, (b * u.op(i) - v.op(i) * b).operator_norm());
    inter_omega = std::max(inter_omega, (omega * u.op(i) - v.op(i) * omega).operator_norm());
    reduce = std::max(reduce, (pm * u.op(i) - u.op(i) * pm).operator_norm());
    reduce = std::max(reduce, (pn * v.op(i) - v.op(i) * pn).operator_norm());
  }
  out.cert.add("intertwiner_residual", inter_b, tol);
  out.cert.add("polar_intertwine_residual", inter_omega, tol);
  out.cert.add("reducing_defect", reduce, tol);
  return out;
}

}  // namespace toep
