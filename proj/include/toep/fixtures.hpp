#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "toep/matrix.hpp"
#include "toep/tuples.hpp"

namespace toep {
namespace fixtures {

/// Projection pair on C^l: T_1 keeps the first k coordinates, T_2 keeps
/// coordinates m..l, with 1 < m <= k < l (1-based). The diagonal X with
/// entries a_m..a_k on the overlap window is a positive Toeplitz operator
/// for this pair.
struct ProjectionPair {
  OperatorTuple tuple;
  ComplexMatrix x;          // the distinguished positive Toeplitz operator
  std::vector<double> a;    // window weights a_m..a_k
};

inline ProjectionPair projection_pair(index_t l = 5, index_t m = 2, index_t k = 3,
                                      std::vector<double> a = {}) {
  if (!(1 < m && m <= k && k < l))
    throw Error(errc::bad_input, "need 1 < m <= k < l");
  if (a.empty())
    for (index_t i = m; i <= k; ++i) a.push_back(static_cast<double>(i));
  if (static_cast<index_t>(a.size()) != k - m + 1)
    throw Error(errc::bad_input, "weight vector must have k-m+1 entries");
  for (double v : a)
    if (v < 0.0) throw Error(errc::bad_input, "weights must be nonnegative");

  ComplexMatrix t1(l, l), t2(l, l), x(l, l);
  for (index_t i = 1; i <= l; ++i) {
    if (i <= k) t1(i - 1, i - 1) = 1.0;
    if (i >= m) t2(i - 1, i - 1) = 1.0;
    if (i >= m && i <= k) x(i - 1, i - 1) = a[static_cast<size_t>(i - m)];
  }
  return {OperatorTuple::validate({t1, t2}), x, std::move(a)};
}

/// Commuting pair T_1 = diag(a, a, 0), T_2 = diag(0, 1, 1) on C^3 with the
/// positive pure lower operator N = diag(r, s, t), 0 < a < 1.
struct ContractionPair {
  OperatorTuple tuple;
  ComplexMatrix n;
  double a, r, s, t;
};

inline ContractionPair contraction_pair(double a = 0.5, double r = 1.0, double s = 1.0,
                                        double t = 1.0) {
  if (!(0.0 < a && a < 1.0)) throw Error(errc::bad_input, "need 0 < a < 1");
  if (r < 0.0 || s < 0.0 || t < 0.0) throw Error(errc::bad_input, "weights must be nonnegative");
  ComplexMatrix t1 = ComplexMatrix::diagonal({a, a, 0.0});
  ComplexMatrix t2 = ComplexMatrix::diagonal({0.0, 1.0, 1.0});
  ComplexMatrix n = ComplexMatrix::diagonal({r, s, t});
  return {OperatorTuple::validate({t1, t2}), n, a, r, s, t};
}

/// The explicit embedding for the contraction pair with weights (r, s, t):
/// constant coefficient (sqrt(r(1-a^2)) h1, sqrt(s(1-a^2)) h2, sqrt(t) h3,
/// a sqrt(r) h1) followed by z^k (0, a^k sqrt(s(1-a^2)) h2, 0, 0).
inline ComplexMatrix contraction_pair_embedding(const ContractionPair& f, index_t depth) {
  const double a = f.a;
  const double c1 = std::sqrt(f.r * (1.0 - a * a));
  const double c2 = std::sqrt(f.s * (1.0 - a * a));
  const double c3 = std::sqrt(f.t);
  const double c4 = a * std::sqrt(f.r);
  ComplexMatrix pi(4 * depth, 3);
  pi(0, 0) = c1;
  pi(1, 1) = c2;
  pi(2, 2) = c3;
  pi(3, 0) = c4;
  double ak = 1.0;
  for (index_t k = 1; k < depth; ++k) {
    ak *= a;
    pi(4 * k + 1, 1) = ak * c2;
  }
  return pi;
}

/// The unitary and projection behind the embedding above:
/// U (0, sqrt(s(1-a^2)) h2, sqrt(t) h3, sqrt(r) h1)
///   = (sqrt(r(1-a^2)) h1, sqrt(s(1-a^2)) h2, sqrt(t) h3, a sqrt(r) h1)
/// and P the projection onto the fourth coordinate.
struct PairPencilData {
  ComplexMatrix u;
  ComplexMatrix p;
};

inline PairPencilData contraction_pair_unitary(const ContractionPair& f) {
  const double a = f.a;
  const double c1 = std::sqrt(f.r * (1.0 - a * a));
  const double c2 = std::sqrt(f.s * (1.0 - a * a));
  const double c3 = std::sqrt(f.t);
  ComplexMatrix x(4, 3), y(4, 3);
  x(1, 1) = c2;
  x(2, 2) = c3;
  x(3, 0) = std::sqrt(f.r);
  y(0, 0) = c1;
  y(1, 1) = c2;
  y(2, 2) = c3;
  y(3, 0) = a * std::sqrt(f.r);
  PairPencilData out;
  out.u = unitary_from_action(x, y);
  out.p = ComplexMatrix(4, 4);
  out.p(3, 3) = 1.0;
  return out;
}

}  // namespace fixtures
}  // namespace toep
