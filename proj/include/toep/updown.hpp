#pragma once

#include <algorithm>
#include <string>
#include <utility>

#include "toep/matrix.hpp"
#include "toep/report.hpp"
#include "toep/toeplitz.hpp"
#include "toep/tuples.hpp"

namespace toep {

enum class ToeplitzClass { toeplitz, upper, lower, pure_lower_positive, none };

inline const char* to_string(ToeplitzClass c) {
  switch (c) {
    case ToeplitzClass::toeplitz: return "toeplitz";
    case ToeplitzClass::upper: return "upper";
    case ToeplitzClass::lower: return "lower";
    case ToeplitzClass::pure_lower_positive: return "pure_lower_positive";
    case ToeplitzClass::none: return "none";
  }
  return "none";
}

namespace detail {

struct TailResult {
  bool vanished = false;
  long steps = 0;
  double bound = 0.0;
};

/// Follows || P^{*k} X P^k || until it drops below `threshold`. Stops early
/// and reports failure when no relative progress is made for 100 consecutive
/// steps, so a stalled tail is classified honestly instead of looping.
inline TailResult tail_certify(const ComplexMatrix& x, const ComplexMatrix& p, double threshold,
                               long max_iter) {
  TailResult out;
  ComplexMatrix pk = ComplexMatrix::identity(p.rows());
  double best = x.operator_norm();
  long stall = 0;
  for (long k = 0; k <= max_iter; ++k) {
    ComplexMatrix xk = pk.adjoint() * x * pk;
    double nrm = xk.operator_norm();
    out.steps = k;
    out.bound = nrm;
    if (nrm <= threshold) {
      out.vanished = true;
      return out;
    }
    if (nrm < best * (1.0 - 1e-3)) {
      best = nrm;
      stall = 0;
    } else if (++stall >= 100) {
      return out;
    }
    pk = pk * p;
  }
  return out;
}

}  // namespace detail

/// Classifies a self-adjoint X against the inequality systems
/// T_i* X T_i >= X (upper) and <= X (lower), with the positive pure lower
/// class certified through the vanishing of || P^{*k} X P^k ||.
inline ToeplitzClass classify(const ComplexMatrix& x, const OperatorTuple& t,
                              long max_iter = 10000) {
  if (!x.is_square() || x.rows() != t.dim())
    throw Error(errc::dim_mismatch, "X must act on the tuple's space");
  if (x.hermitian_defect() > 1e-10 * (1.0 + x.operator_norm()))
    throw Error(errc::not_hermitian, "classify expects a self-adjoint operator");
  ComplexMatrix xh = x.hermitian_part();

  const double slack = 1e-9;
  bool upper = true, lower = true;
  for (int i = 0; i < t.count(); ++i) {
    ComplexMatrix d = (t.op(i).adjoint() * xh * t.op(i) - xh).hermitian_part();
    if (lambda_min_hermitian(d) < -slack) upper = false;
    if (lambda_max_hermitian(d) > slack) lower = false;
  }
  if (upper && lower) return ToeplitzClass::toeplitz;
  if (lower && lambda_min_hermitian(xh) >= -slack) {
    auto tail = detail::tail_certify(xh, product_contraction(t), 1e-7, max_iter);
    return tail.vanished ? ToeplitzClass::pure_lower_positive : ToeplitzClass::lower;
  }
  if (upper) return ToeplitzClass::upper;
  if (lower) return ToeplitzClass::lower;
  return ToeplitzClass::none;
}

/// X = U - N (upper) or X = U + N (lower) with U the Toeplitz part and N a
/// positive pure lower remainder.
struct Decomposition {
  ComplexMatrix u;
  ComplexMatrix n;
  ToeplitzClass orientation = ToeplitzClass::lower;  // upper: X = U - N, else X = U + N
  long iterations = 0;
  long tail_steps = 0;
  Report cert;
};

/// The monotone net T^{*a} X T^a is evaluated along the diagonal a = (k,..,k),
/// which is cofinal, so it reaches the same limit U. N = -(X - U) or (X - U)
/// per orientation.
inline Decomposition decompose(const ComplexMatrix& x, const OperatorTuple& t, double tol = 1e-9,
                               long max_iter = 10000) {
  ToeplitzClass cls = classify(x, t, max_iter);
  if (cls == ToeplitzClass::pure_lower_positive) cls = ToeplitzClass::lower;
  if (cls == ToeplitzClass::none)
    throw Error(errc::not_monotone, "X satisfies neither inequality system");

  ComplexMatrix xh = x.hermitian_part();
  const ComplexMatrix p = product_contraction(t);
  const ComplexMatrix ph = p.adjoint();
  ComplexMatrix u = xh;
  double delta = 0.0;
  long k = 0;
  for (; k < max_iter; ++k) {
    ComplexMatrix next = (ph * u * p).hermitian_part();
    delta = (next - u).operator_norm();
    u = std::move(next);
    if (delta <= tol) break;
  }
  if (delta > tol)
    throw Error(errc::not_converged, "net limit: last delta " + std::to_string(delta));

  Decomposition dec;
  dec.orientation = (cls == ToeplitzClass::upper) ? ToeplitzClass::upper : ToeplitzClass::lower;
  dec.u = u;
  dec.n = (dec.orientation == ToeplitzClass::upper) ? u - xh : xh - u;
  dec.n = dec.n.hermitian_part();
  dec.iterations = k;

  auto tail = detail::tail_certify(dec.n, p, 1e-7, max_iter);
  if (!tail.vanished)
    throw Error(errc::not_converged,
                "remainder tail stalled at " + std::to_string(tail.bound));
  dec.tail_steps = tail.steps;

  dec.cert.theorem = "thm-3.2";
  dec.cert.iterations = k;
  dec.cert.add("toeplitz_u", toeplitz_residual(dec.u, t, t), 1e-7);
  dec.cert.add("n_psd_defect", std::max(0.0, -lambda_min_hermitian(dec.n)), 1e-9);
  double lower_defect = 0.0;
  for (int i = 0; i < t.count(); ++i) {
    ComplexMatrix d = (t.op(i).adjoint() * dec.n * t.op(i) - dec.n).hermitian_part();
    lower_defect = std::max(lower_defect, lambda_max_hermitian(d));
  }
  dec.cert.add("n_lower_defect", lower_defect, 1e-9);
  dec.cert.add("tail_at_k", tail.bound, 1e-7);
  ComplexMatrix recon = (dec.orientation == ToeplitzClass::upper) ? dec.u - dec.n : dec.u + dec.n;
  dec.cert.add("reconstruction", (xh - recon).operator_norm(), 1e-9);
  return dec;
}

/// The positive upper cone is trivial exactly when the adjoint of the product
/// contraction is pure; otherwise J* J from the canonical extension is a
/// nonzero member and is returned as the witness.
struct UpperConeReport {
  bool trivial = false;
  ComplexMatrix witness;  // empty when trivial
  Report cert;
};

inline UpperConeReport upper_cone_trivial(const OperatorTuple& t) {
  UpperConeReport out;
  out.cert.theorem = "prop-3.1";
  out.trivial = is_adjoint_pure(t);
  out.cert.add_flag("adjoint_pure", true);
  if (out.trivial) {
    out.cert.notes.push_back("cone is trivial; no witness exists");
    return out;
  }
  PseudoExtension pe = canonical_isometric_pe(t);
  out.witness = pe.J.adjoint() * pe.J;
  double upper_defect = 0.0;
  for (int i = 0; i < t.count(); ++i) {
    ComplexMatrix d = (t.op(i).adjoint() * out.witness * t.op(i) - out.witness).hermitian_part();
    upper_defect = std::max(upper_defect, -lambda_min_hermitian(d));
  }
  out.cert.add("witness_upper_defect", std::max(0.0, upper_defect), 1e-9);
  out.cert.add("witness_psd_defect", std::max(0.0, -lambda_min_hermitian(out.witness)), 1e-9);
  out.cert.add("witness_norm_nonzero", out.witness.operator_norm() > 1e-8 ? 0.0 : 1.0, 0.5);
  return out;
}

}  // namespace toep
