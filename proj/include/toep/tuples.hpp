#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "toep/kernels.hpp"
#include "toep/matrix.hpp"

namespace toep {

/// Multi-index in Z_+^n with the componentwise partial order.
struct MultiIndex {
  std::vector<int> components;

  explicit MultiIndex(std::vector<int> c) : components(std::move(c)) {
    for (int v : components)
      if (v < 0) throw Error(errc::bad_input, "multi-index component must be nonnegative");
  }
  static MultiIndex zeros(int n) { return MultiIndex(std::vector<int>(static_cast<size_t>(n), 0)); }
  static MultiIndex unit(int n, int i) {
    auto m = zeros(n);
    m.components[static_cast<size_t>(i)] = 1;
    return m;
  }
  int order() const { return std::accumulate(components.begin(), components.end(), 0); }
  size_t size() const { return components.size(); }
  bool leq(const MultiIndex& o) const {
    if (size() != o.size()) return false;
    for (size_t i = 0; i < size(); ++i)
      if (components[i] > o.components[i]) return false;
    return true;
  }
  MultiIndex operator+(const MultiIndex& o) const {
    std::vector<int> c(components);
    for (size_t i = 0; i < size(); ++i) c[i] += o.components[i];
    return MultiIndex(c);
  }
};

/// n commuting contractions on a common finite-dimensional space.
class OperatorTuple {
 public:
  static constexpr double default_tol_commute = 1e-10;
  static constexpr double default_tol_contract = 1e-10;

  /// Validates square shape, pairwise commutators and contraction norms,
  /// reporting every violation at once.
  static OperatorTuple validate(std::vector<ComplexMatrix> ops,
                                double tol_commute = default_tol_commute,
                                double tol_contract = default_tol_contract) {
    return OperatorTuple(std::move(ops), tol_commute, tol_contract, true);
  }

  /// Skips the commutativity check; used for lifted tuples that are allowed
  /// to be non-commuting.
  static OperatorTuple unchecked(std::vector<ComplexMatrix> ops,
                                 double tol_commute = default_tol_commute,
                                 double tol_contract = default_tol_contract) {
    return OperatorTuple(std::move(ops), tol_commute, tol_contract, false);
  }

  index_t dim() const { return dim_; }
  int count() const { return static_cast<int>(ops_.size()); }
  const ComplexMatrix& op(int i) const { return ops_[static_cast<size_t>(i)]; }
  const std::vector<ComplexMatrix>& ops() const { return ops_; }
  double tol_commute() const { return tol_commute_; }
  double tol_contract() const { return tol_contract_; }

  OperatorTuple adjoint() const {
    std::vector<ComplexMatrix> adj;
    adj.reserve(ops_.size());
    for (const auto& t : ops_) adj.push_back(t.adjoint());
    return OperatorTuple(std::move(adj), tol_commute_, tol_contract_, false);
  }

 private:
  OperatorTuple(std::vector<ComplexMatrix> ops, double tolc, double tolk, bool check_commute)
      : ops_(std::move(ops)), tol_commute_(tolc), tol_contract_(tolk) {
    if (ops_.empty()) throw Error(errc::bad_input, "empty tuple");
    dim_ = ops_[0].rows();
    std::ostringstream bad;
    errc worst = errc::dim_mismatch;
    bool failed = false;
    for (size_t i = 0; i < ops_.size(); ++i) {
      if (!ops_[i].is_square() || ops_[i].rows() != dim_)
        throw Error(errc::dim_mismatch, "operator " + std::to_string(i + 1) + " has shape " +
                                            ops_[i].shape_string());
    }
    for (size_t i = 0; i < ops_.size(); ++i) {
      double nrm = ops_[i].operator_norm();
      if (nrm > 1.0 + tol_contract_) {
        failed = true;
        worst = errc::not_contraction;
        bad << " NotContraction(" << i + 1 << ", norm=" << nrm << ")";
      }
    }
    if (check_commute) {
      for (size_t i = 0; i < ops_.size(); ++i)
        for (size_t j = i + 1; j < ops_.size(); ++j) {
          double res = (ops_[i] * ops_[j] - ops_[j] * ops_[i]).operator_norm();
          if (res > tol_commute_) {
            failed = true;
            worst = errc::not_commuting;
            bad << " NotCommuting(" << i + 1 << "," << j + 1 << ", residual=" << res << ")";
          }
        }
    }
    if (failed) throw Error(worst, "tuple validation failed:" + bad.str());
  }

  std::vector<ComplexMatrix> ops_;
  index_t dim_ = 0;
  double tol_commute_, tol_contract_;
};

/// T^alpha = T_1^{a_1} ... T_n^{a_n}, evaluated left to right so results are
/// reproducible bit for bit.
inline ComplexMatrix power(const OperatorTuple& t, const MultiIndex& alpha) {
  if (static_cast<int>(alpha.size()) != t.count())
    throw Error(errc::dim_mismatch, "multi-index length does not match tuple");
  ComplexMatrix acc = ComplexMatrix::identity(t.dim());
  for (int i = 0; i < t.count(); ++i)
    for (int k = 0; k < alpha.components[static_cast<size_t>(i)]; ++k) acc = acc * t.op(i);
  return acc;
}

inline ComplexMatrix product_contraction(const OperatorTuple& t) {
  ComplexMatrix acc = t.op(0);
  for (int i = 1; i < t.count(); ++i) acc = acc * t.op(i);
  return acc;
}

/// The powers of the adjoint of the product contraction vanish iff its
/// spectral radius is below one; a 1e-10 margin guards the unimodular case.
inline bool is_adjoint_pure(const OperatorTuple& t) {
  return spectral_radius(product_contraction(t)) < 1.0 - 1e-10;
}

namespace rng {

/// Deterministic xoshiro-style stream on top of splitmix64 so generated
/// fixtures are identical across platforms and standard libraries.
class Stream {
 public:
  explicit Stream(uint64_t seed) : state_(seed == 0 ? 0x9e3779b97f4a7c15ULL : seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  cdouble unit_phase() {
    double th = uniform(0.0, 2.0 * 3.14159265358979323846);
    return cdouble(std::cos(th), std::sin(th));
  }
  cdouble gaussian() {
    // Box-Muller from the raw uniform bits.
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return cdouble(r * std::cos(2.0 * 3.14159265358979323846 * u2),
                   r * std::sin(2.0 * 3.14159265358979323846 * u2));
  }

 private:
  uint64_t state_;
};

inline ComplexMatrix gaussian_matrix(index_t rows, index_t cols, Stream& s) {
  ComplexMatrix m(rows, cols);
  for (index_t i = 0; i < rows; ++i)
    for (index_t j = 0; j < cols; ++j) m(i, j) = s.gaussian();
  return m;
}

/// Haar-like random unitary via Householder QR of a Gaussian matrix with the
/// R-diagonal phases absorbed.
inline ComplexMatrix random_unitary(index_t n, Stream& s) {
  if (n == 0) return ComplexMatrix(0, 0);
  EigenMatrix g = gaussian_matrix(n, n, s).eigen();
  Eigen::HouseholderQR<EigenMatrix> qr(g);
  EigenMatrix q = qr.householderQ();
  EigenMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (index_t k = 0; k < n; ++k) {
    cdouble d = r(k, k);
    cdouble ph = std::abs(d) > 0 ? d / std::abs(d) : cdouble(1.0, 0.0);
    q.col(k) *= ph;
  }
  return ComplexMatrix::from_eigen(q);
}

}  // namespace rng

enum class TupleFamily { joint_diagonal, joint_triangular, polynomials_of_one_matrix };

inline TupleFamily parse_family(const std::string& name) {
  if (name == "joint-diagonal") return TupleFamily::joint_diagonal;
  if (name == "joint-triangular") return TupleFamily::joint_triangular;
  if (name == "polynomials-of-one-matrix") return TupleFamily::polynomials_of_one_matrix;
  throw Error(errc::unknown_family, name);
}

/// Reproducible commuting contraction tuples for testing. Spectra are kept
/// away from the band just below one: each eigenvalue modulus is either
/// exactly 1 or at most 0.9, so purity decisions and tail iterations never
/// sit on the decision margin.
inline OperatorTuple random_commuting_tuple(index_t dim, int n, TupleFamily family,
                                            uint64_t seed) {
  if (dim <= 0 || n <= 0) throw Error(errc::bad_input, "dim and n must be positive");
  rng::Stream s(seed * 0x2545F4914F6CDD1DULL + 0x632BE59BD9B4E019ULL);

  auto scale_to_contraction = [](ComplexMatrix m, double target) {
    double nrm = m.operator_norm();
    if (nrm > target && nrm > 0.0) m *= cdouble(target / nrm, 0.0);
    return m;
  };

  switch (family) {
    case TupleFamily::joint_diagonal: {
      ComplexMatrix u = rng::random_unitary(dim, s);
      ComplexMatrix uh = u.adjoint();
      std::vector<ComplexMatrix> ops;
      for (int i = 0; i < n; ++i) {
        std::vector<cdouble> lam(static_cast<size_t>(dim));
        for (index_t k = 0; k < dim; ++k) {
          double mod = (s.uniform() < 0.5) ? 1.0 : 0.9 * s.uniform();
          lam[static_cast<size_t>(k)] = mod * s.unit_phase();
        }
        ops.push_back(u * ComplexMatrix::diagonal(lam) * uh);
      }
      return OperatorTuple::validate(std::move(ops), 1e-12, OperatorTuple::default_tol_contract);
    }
    case TupleFamily::joint_triangular: {
      // Unimodular diagonal block plus a strictly-contractive block built
      // from polynomials in one nilpotent, conjugated by a shared unitary.
      index_t du = static_cast<index_t>(s.uniform() * (static_cast<double>(dim) / 2.0 + 1.0));
      if (du > dim) du = dim;
      index_t ds = dim - du;
      ComplexMatrix nil(ds, ds);
      for (index_t i = 0; i < ds; ++i)
        for (index_t j = i + 1; j < ds; ++j) nil(i, j) = s.gaussian();
      ComplexMatrix u = rng::random_unitary(dim, s);
      ComplexMatrix uh = u.adjoint();
      std::vector<ComplexMatrix> ops;
      for (int i = 0; i < n; ++i) {
        ComplexMatrix block(dim, dim);
        for (index_t k = 0; k < du; ++k) block(k, k) = s.unit_phase();
        if (ds > 0) {
          cdouble gamma = 0.6 * s.uniform() * s.unit_phase();
          ComplexMatrix strict = gamma * ComplexMatrix::identity(ds);
          ComplexMatrix p = nil;
          for (int deg = 1; deg <= 2; ++deg) {
            strict += s.gaussian() * p;
            p = p * nil;
          }
          strict = scale_to_contraction(std::move(strict), 0.9);
          block.set_block(du, du, strict);
        }
        ops.push_back(u * block * uh);
      }
      return OperatorTuple::validate(std::move(ops), 1e-12, OperatorTuple::default_tol_contract);
    }
    case TupleFamily::polynomials_of_one_matrix: {
      ComplexMatrix a = scale_to_contraction(rng::gaussian_matrix(dim, dim, s), 0.9);
      std::vector<ComplexMatrix> ops;
      for (int i = 0; i < n; ++i) {
        ComplexMatrix p = ComplexMatrix::zero(dim, dim);
        ComplexMatrix apow = ComplexMatrix::identity(dim);
        for (int deg = 0; deg <= 3; ++deg) {
          p += s.gaussian() * apow;
          apow = apow * a;
        }
        ops.push_back(scale_to_contraction(std::move(p), 0.9));
      }
      return OperatorTuple::validate(std::move(ops), 1e-12, OperatorTuple::default_tol_contract);
    }
  }
  throw Error(errc::unknown_family, "unreachable");
}

inline OperatorTuple random_commuting_tuple(index_t dim, int n, const std::string& family,
                                            uint64_t seed) {
  return random_commuting_tuple(dim, n, parse_family(family), seed);
}

}  // namespace toep
