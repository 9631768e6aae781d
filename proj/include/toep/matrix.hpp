#pragma once

#include <complex>
#include <cstddef>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace toep {

using cdouble = std::complex<double>;
using index_t = std::ptrdiff_t;

/// Error categories thrown by the numerical kernels and constructions.
enum class errc {
  dim_mismatch,
  not_hermitian,
  not_psd,
  majorization_fails,
  rank_mismatch,
  not_isometric_action,
  not_commuting,
  not_contraction,
  unknown_family,
  not_converged,
  zero_qt,
  not_toeplitz,
  not_monotone,
  not_pure_lower,
  need_at_least_three,
  not_unitary,
  not_stabilized,
  hypothesis_fails,
  not_isometric_pencil,
  unknown_fixture,
  bad_input,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::dim_mismatch: return "DimMismatch";
    case errc::not_hermitian: return "NotHermitian";
    case errc::not_psd: return "NotPSD";
    case errc::majorization_fails: return "MajorizationFails";
    case errc::rank_mismatch: return "RankMismatch";
    case errc::not_isometric_action: return "NotIsometricAction";
    case errc::not_commuting: return "NotCommuting";
    case errc::not_contraction: return "NotContraction";
    case errc::unknown_family: return "UnknownFamily";
    case errc::not_converged: return "NotConverged";
    case errc::zero_qt: return "ZeroQT";
    case errc::not_toeplitz: return "NotToeplitz";
    case errc::not_monotone: return "NotMonotone";
    case errc::not_pure_lower: return "NotPureLower";
    case errc::need_at_least_three: return "NeedAtLeastThree";
    case errc::not_unitary: return "NotUnitary";
    case errc::not_stabilized: return "NotStabilized";
    case errc::hypothesis_fails: return "HypothesisFails";
    case errc::not_isometric_pencil: return "NotIsometricPencil";
    case errc::unknown_fixture: return "UnknownFixture";
    case errc::bad_input: return "BadInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

using EigenMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense complex matrix, row-major storage. The single carrier for
/// operators, column vectors and coordinate maps throughout the library.
class ComplexMatrix {
 public:
  ComplexMatrix() : rows_(0), cols_(0) {}

  ComplexMatrix(index_t rows, index_t cols)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), cdouble(0.0, 0.0)) {
    if (rows < 0 || cols < 0) throw Error(errc::bad_input, "negative dimensions");
  }

  /// Construct from row-major data; rejects NaN/Inf entries.
  ComplexMatrix(index_t rows, index_t cols, std::vector<cdouble> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows < 0 || cols < 0 || data_.size() != static_cast<size_t>(rows * cols))
      throw Error(errc::bad_input, "entry count does not match dimensions");
    for (const cdouble& z : data_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(errc::bad_input, "non-finite entry");
  }

  static ComplexMatrix zero(index_t rows, index_t cols) { return ComplexMatrix(rows, cols); }

  static ComplexMatrix identity(index_t n) {
    ComplexMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(const std::vector<cdouble>& d) {
    ComplexMatrix m(static_cast<index_t>(d.size()), static_cast<index_t>(d.size()));
    for (index_t i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
  }

  static ComplexMatrix from_eigen(const EigenMatrix& e) {
    ComplexMatrix m(e.rows(), e.cols());
    for (index_t i = 0; i < e.rows(); ++i)
      for (index_t j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
    return m;
  }

  EigenMatrix eigen() const {
    EigenMatrix e(rows_, cols_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j) e(i, j) = (*this)(i, j);
    return e;
  }

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  bool is_square() const { return rows_ == cols_; }

  cdouble& operator()(index_t i, index_t j) { return data_[static_cast<size_t>(i * cols_ + j)]; }
  const cdouble& operator()(index_t i, index_t j) const {
    return data_[static_cast<size_t>(i * cols_ + j)];
  }

  const std::vector<cdouble>& data() const { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix m(cols_, rows_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
  }

  ComplexMatrix conjugate() const {
    ComplexMatrix m(rows_, cols_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j) m(i, j) = std::conj((*this)(i, j));
    return m;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o, "+=");
    for (size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o, "-=");
    for (size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }

  ComplexMatrix& operator*=(cdouble s) {
    for (cdouble& z : data_) z *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(cdouble s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, cdouble s) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_)
      throw Error(errc::dim_mismatch, "product of " + a.shape_string() + " and " + b.shape_string());
    if (a.empty() || b.empty()) return ComplexMatrix(a.rows_, b.cols_);
    return from_eigen(a.eigen() * b.eigen());
  }

  bool operator==(const ComplexMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cdouble& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cdouble& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  cdouble trace() const {
    cdouble t = 0.0;
    for (index_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  /// Operator (spectral) norm, the largest singular value.
  double operator_norm() const {
    if (empty()) return 0.0;
    if (rows_ == 1 && cols_ == 1) return std::abs((*this)(0, 0));
    if (rows_ > 64 || cols_ > 64) {
      Eigen::BDCSVD<EigenMatrix> svd(eigen());
      return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    }
    Eigen::JacobiSVD<EigenMatrix> svd(eigen());
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  }

  ComplexMatrix hermitian_part() const {
    if (!is_square()) throw Error(errc::dim_mismatch, "hermitian_part of non-square matrix");
    ComplexMatrix m(rows_, cols_);
    for (index_t i = 0; i < rows_; ++i)
      for (index_t j = 0; j < cols_; ++j)
        m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return m;
  }

  double hermitian_defect() const {
    if (!is_square()) throw Error(errc::dim_mismatch, "hermitian_defect of non-square matrix");
    return (*this - adjoint()).operator_norm();
  }

  ComplexMatrix block(index_t row0, index_t col0, index_t nrows, index_t ncols) const {
    ComplexMatrix m(nrows, ncols);
    for (index_t i = 0; i < nrows; ++i)
      for (index_t j = 0; j < ncols; ++j) m(i, j) = (*this)(row0 + i, col0 + j);
    return m;
  }

  void set_block(index_t row0, index_t col0, const ComplexMatrix& b) {
    for (index_t i = 0; i < b.rows(); ++i)
      for (index_t j = 0; j < b.cols(); ++j) (*this)(row0 + i, col0 + j) = b(i, j);
  }

  ComplexMatrix column(index_t j) const { return block(0, j, rows_, 1); }

  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  void require_same_shape(const ComplexMatrix& o, const char* op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(errc::dim_mismatch,
                  std::string(op) + " on " + shape_string() + " and " + o.shape_string());
  }

  index_t rows_, cols_;
  std::vector<cdouble> data_;
};

inline ComplexMatrix vstack(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.cols()) throw Error(errc::dim_mismatch, "vstack column mismatch");
  ComplexMatrix m(a.rows() + b.rows(), a.cols());
  m.set_block(0, 0, a);
  m.set_block(a.rows(), 0, b);
  return m;
}

inline ComplexMatrix hstack(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows()) throw Error(errc::dim_mismatch, "hstack row mismatch");
  ComplexMatrix m(a.rows(), a.cols() + b.cols());
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  return m;
}

/// Kronecker product, used to lift operator equations to vectorized form.
inline ComplexMatrix kronecker(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < a.cols(); ++j)
      for (index_t k = 0; k < b.rows(); ++k)
        for (index_t l = 0; l < b.cols(); ++l)
          m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return m;
}

/// Column-stacking vectorization, so that vec(A X B) = (B^T (x) A) vec(X).
inline ComplexMatrix vectorize(const ComplexMatrix& x) {
  ComplexMatrix v(x.rows() * x.cols(), 1);
  for (index_t j = 0; j < x.cols(); ++j)
    for (index_t i = 0; i < x.rows(); ++i) v(j * x.rows() + i, 0) = x(i, j);
  return v;
}

inline ComplexMatrix unvectorize(const ComplexMatrix& v, index_t rows, index_t cols) {
  ComplexMatrix x(rows, cols);
  for (index_t j = 0; j < cols; ++j)
    for (index_t i = 0; i < rows; ++i) x(i, j) = v(j * rows + i, 0);
  return x;
}

/// Orthonormal basis of a subspace of C^ambient_dim, columns of `basis`.
struct SubspaceBasis {
  index_t ambient_dim = 0;
  ComplexMatrix basis;  // ambient_dim x rank, orthonormal columns
  index_t rank = 0;

  static constexpr double tol_orth = 1e-10;

  SubspaceBasis() = default;
  SubspaceBasis(index_t ambient, ComplexMatrix b)
      : ambient_dim(ambient), basis(std::move(b)), rank(basis.cols()) {
    if (basis.rows() != ambient)
      throw Error(errc::dim_mismatch, "basis rows do not match ambient dimension");
    if (rank > 0) {
      ComplexMatrix gram = basis.adjoint() * basis;
      if ((gram - ComplexMatrix::identity(rank)).operator_norm() > tol_orth)
        throw Error(errc::bad_input, "basis columns are not orthonormal");
    }
  }

  /// Projector onto the subspace.
  ComplexMatrix projector() const {
    if (rank == 0) return ComplexMatrix::zero(ambient_dim, ambient_dim);
    return basis * basis.adjoint();
  }
};

inline double lambda_min_hermitian(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<EigenMatrix> es(a.hermitian_part().eigen());
  return es.eigenvalues()(0);
}

inline double lambda_max_hermitian(const ComplexMatrix& a) {
  if (a.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<EigenMatrix> es(a.hermitian_part().eigen());
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

}  // namespace toep
