#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "toep/matrix.hpp"

namespace toep {

/// Relative singular-value threshold realizing "closure of range" objects.
inline constexpr double kRankTol = 1e-10;

namespace detail {

/// Rotate each column so its largest-modulus entry is positive real.
/// Ties within a relative factor go to the lowest index. This pins the
/// free phase of SVD-derived bases so repeated runs are bit-identical.
inline void canonicalize_column_phases(ComplexMatrix& m) {
  for (index_t j = 0; j < m.cols(); ++j) {
    index_t pivot = -1;
    double best = 0.0;
    for (index_t i = 0; i < m.rows(); ++i) {
      double a = std::abs(m(i, j));
      if (a > best * (1.0 + 1e-12)) {
        best = a;
        pivot = i;
      }
    }
    if (pivot < 0 || best == 0.0) continue;
    cdouble phase = m(pivot, j) / best;
    cdouble rot = std::conj(phase);
    for (index_t i = 0; i < m.rows(); ++i) m(i, j) *= rot;
  }
}

}  // namespace detail

/// Hermitian square root of a positive semidefinite matrix.
/// Eigenvalues in [-tol, 0) are clamped to 0; anything below -tol is an error.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& a, double tol) {
  if (!a.is_square()) throw Error(errc::dim_mismatch, "psd_sqrt needs a square matrix");
  if (a.empty()) return a;
  double scale = 1.0 + a.operator_norm();
  if (a.hermitian_defect() > tol * scale)
    throw Error(errc::not_hermitian, "psd_sqrt input, defect " + std::to_string(a.hermitian_defect()));
  Eigen::SelfAdjointEigenSolver<EigenMatrix> es(a.hermitian_part().eigen());
  Eigen::VectorXd ev = es.eigenvalues();
  if (ev(0) < -tol * scale)
    throw Error(errc::not_psd, "psd_sqrt eigenvalue " + std::to_string(ev(0)));
  EigenMatrix v = es.eigenvectors();
  EigenMatrix b = EigenMatrix::Zero(a.rows(), a.cols());
  for (index_t k = 0; k < ev.size(); ++k) {
    double lam = std::max(ev(k), 0.0);
    b += std::sqrt(lam) * v.col(k) * v.col(k).adjoint();
  }
  return ComplexMatrix::from_eigen(b).hermitian_part();
}

/// Orthonormal bases of range(A) and kernel(A), split at rank_tol * sigma_max.
inline std::pair<SubspaceBasis, SubspaceBasis> range_kernel(const ComplexMatrix& a,
                                                            double rank_tol = kRankTol) {
  if (a.rows() == 0 || a.cols() == 0)
    throw Error(errc::bad_input, "range_kernel needs nonzero dimensions");
  Eigen::JacobiSVD<EigenMatrix> svd(a.eigen(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  index_t rank = 0;
  for (index_t k = 0; k < sv.size(); ++k)
    if (sv(k) > rank_tol * smax && sv(k) > 0.0) ++rank;
  ComplexMatrix range = ComplexMatrix::from_eigen(svd.matrixU().leftCols(rank));
  ComplexMatrix kernel =
      ComplexMatrix::from_eigen(svd.matrixV().rightCols(a.cols() - rank));
  detail::canonicalize_column_phases(range);
  detail::canonicalize_column_phases(kernel);
  return {SubspaceBasis(a.rows(), std::move(range)), SubspaceBasis(a.cols(), std::move(kernel))};
}

/// Contraction C with A = C B, supported on range(B).
/// Requires the majorization A*A <= B*B + tol I.
inline ComplexMatrix douglas_solve(const ComplexMatrix& a, const ComplexMatrix& b, double tol) {
  if (a.cols() != b.cols())
    throw Error(errc::dim_mismatch, "douglas_solve domain mismatch");
  ComplexMatrix gap = b.adjoint() * b - a.adjoint() * a;
  double bn = b.operator_norm();
  if (lambda_min_hermitian(gap) < -(tol + 1e-12 * (1.0 + bn * bn)))
    throw Error(errc::majorization_fails,
                "A*A <= B*B violated by " + std::to_string(-lambda_min_hermitian(gap)));
  if (a.rows() == 0 || b.rows() == 0) return ComplexMatrix(a.rows(), b.rows());
  Eigen::JacobiSVD<EigenMatrix> svd(b.eigen(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  EigenMatrix c = EigenMatrix::Zero(a.rows(), b.rows());
  EigenMatrix ae = a.eigen();
  for (index_t k = 0; k < sv.size(); ++k) {
    if (sv(k) <= kRankTol * smax || sv(k) == 0.0) break;
    c += (ae * svd.matrixV().col(k)) / sv(k) * svd.matrixU().col(k).adjoint();
  }
  return ComplexMatrix::from_eigen(c);
}

/// Deterministic unitary completion: W basis_dom = basis_cod * action, with
/// orthonormal complements built from the columns of (I - projector) in index
/// order, columns of norm below 1e-10 after re-orthogonalization discarded.
inline ComplexMatrix complete_to_unitary(const SubspaceBasis& dom, const SubspaceBasis& cod,
                                         const ComplexMatrix& action) {
  if (dom.ambient_dim != cod.ambient_dim)
    throw Error(errc::dim_mismatch, "dom and cod live in different ambient spaces");
  if (dom.rank != cod.rank)
    throw Error(errc::rank_mismatch, "dom rank " + std::to_string(dom.rank) + " vs cod rank " +
                                         std::to_string(cod.rank));
  if (action.rows() != cod.rank || action.cols() != dom.rank)
    throw Error(errc::dim_mismatch, "action shape");
  if (dom.rank > 0) {
    ComplexMatrix gram = action.adjoint() * action;
    if ((gram - ComplexMatrix::identity(dom.rank)).operator_norm() > 1e-9)
      throw Error(errc::not_isometric_action, "action is not unitary on coordinates");
  }

  const index_t n = dom.ambient_dim;
  auto complement = [n](const SubspaceBasis& s) {
    std::vector<ComplexMatrix> kept;
    ComplexMatrix residual = ComplexMatrix::identity(n) - s.projector();
    for (index_t j = 0; j < n; ++j) {
      ComplexMatrix v = residual.column(j);
      // two Gram-Schmidt passes against the kept columns
      for (int pass = 0; pass < 2; ++pass)
        for (const ComplexMatrix& u : kept) {
          cdouble coef = (u.adjoint() * v)(0, 0);
          v -= coef * u;
        }
      double norm = v.frobenius_norm();
      if (norm < 1e-10) continue;
      v *= cdouble(1.0 / norm, 0.0);
      kept.push_back(v);
    }
    ComplexMatrix out(n, static_cast<index_t>(kept.size()));
    for (index_t j = 0; j < out.cols(); ++j) out.set_block(0, j, kept[static_cast<size_t>(j)]);
    return out;
  };

  ComplexMatrix dc = complement(dom);
  ComplexMatrix cc = complement(cod);
  if (dc.cols() != cc.cols())
    throw Error(errc::rank_mismatch, "complement dimensions disagree");

  ComplexMatrix w = ComplexMatrix::zero(n, n);
  if (dom.rank > 0) w += cod.basis * action * dom.basis.adjoint();
  if (dc.cols() > 0) w += cc * dc.adjoint();
  if ((w.adjoint() * w - ComplexMatrix::identity(n)).operator_norm() > 1e-9)
    throw Error(errc::not_isometric_action, "completion failed to be unitary");
  return w;
}

/// Unitary W on the common ambient space with W X = Y, given ||Xh|| = ||Yh||
/// for all h. Completed deterministically off range(X).
inline ComplexMatrix unitary_from_action(const ComplexMatrix& x, const ComplexMatrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw Error(errc::dim_mismatch, "unitary_from_action shapes differ");
  const index_t n = x.rows();
  if (n == 0) return ComplexMatrix(0, 0);
  double scale = 1.0 + x.operator_norm();
  if ((x.adjoint() * x - y.adjoint() * y).operator_norm() > 1e-9 * scale * scale)
    throw Error(errc::not_isometric_action, "X and Y have different Gram matrices");
  Eigen::JacobiSVD<EigenMatrix> svd(x.eigen(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  index_t rank = 0;
  for (index_t k = 0; k < sv.size(); ++k)
    if (sv(k) > kRankTol * smax && sv(k) > 0.0) ++rank;

  // Domain basis u_k = X v_k / s_k maps to c_k = Y v_k / s_k; the c_k are
  // orthonormal because X and Y share a Gram matrix.
  ComplexMatrix du = ComplexMatrix::from_eigen(svd.matrixU().leftCols(rank));
  EigenMatrix ye = y.eigen();
  ComplexMatrix cu(n, rank);
  for (index_t k = 0; k < rank; ++k) {
    EigenMatrix ck = ye * svd.matrixV().col(k) / sv(k);
    cu.set_block(0, k, ComplexMatrix::from_eigen(ck));
  }
  // Shared phase canonicalization keeps W well-defined: rotating u_k and c_k
  // by the same phase leaves c_k u_k* unchanged, so pin the phase of u_k.
  for (index_t k = 0; k < rank; ++k) {
    index_t pivot = -1;
    double best = 0.0;
    for (index_t i = 0; i < n; ++i) {
      double aij = std::abs(du(i, k));
      if (aij > best * (1.0 + 1e-12)) {
        best = aij;
        pivot = i;
      }
    }
    if (pivot < 0 || best == 0.0) continue;
    cdouble rot = std::conj(du(pivot, k) / best);
    for (index_t i = 0; i < n; ++i) {
      du(i, k) *= rot;
      cu(i, k) *= rot;
    }
  }
  // Orthonormalize cu exactly against round-off drift before completing.
  SubspaceBasis dom(n, du);
  ComplexMatrix gram = cu.adjoint() * cu;
  if (rank > 0 && (gram - ComplexMatrix::identity(rank)).operator_norm() > 1e-9)
    throw Error(errc::not_isometric_action, "target directions not orthonormal");
  SubspaceBasis cod(n, cu);
  return complete_to_unitary(dom, cod, ComplexMatrix::identity(rank));
}

/// Largest eigenvalue modulus.
inline double spectral_radius(const ComplexMatrix& a) {
  if (!a.is_square()) throw Error(errc::dim_mismatch, "spectral_radius needs a square matrix");
  if (a.empty()) return 0.0;
  Eigen::ComplexEigenSolver<EigenMatrix> es(a.eigen(), false);
  double r = 0.0;
  for (index_t k = 0; k < es.eigenvalues().size(); ++k)
    r = std::max(r, std::abs(es.eigenvalues()(k)));
  return r;
}

}  // namespace toep
