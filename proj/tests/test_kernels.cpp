#include <gtest/gtest.h>

#include <cmath>

#include "toep/fixtures.hpp"
#include "toep/kernels.hpp"
#include "toep/matrix.hpp"
#include "toep/tuples.hpp"

using namespace toep;

namespace {

ComplexMatrix random_matrix(index_t r, index_t c, uint64_t seed) {
  rng::Stream s(seed);
  return rng::gaussian_matrix(r, c, s);
}

}  // namespace

TEST(PsdSqrt, IdentityAndDiagonal) {
  ComplexMatrix id3 = ComplexMatrix::identity(3);
  EXPECT_NEAR((psd_sqrt(id3, 1e-12) - id3).operator_norm(), 0.0, 1e-12);

  ComplexMatrix d = ComplexMatrix::diagonal({0.0, 4.0, 9.0});
  ComplexMatrix expect = ComplexMatrix::diagonal({0.0, 2.0, 3.0});
  EXPECT_NEAR((psd_sqrt(d, 1e-12) - expect).operator_norm(), 0.0, 1e-12);
}

TEST(PsdSqrt, GramProductResidual) {
  ComplexMatrix g = random_matrix(4, 4, 11);
  ComplexMatrix a = g.adjoint() * g;
  ComplexMatrix b = psd_sqrt(a, 1e-10);
  EXPECT_LE((b * b - a).operator_norm(), 1e-9);
  EXPECT_LE(b.hermitian_defect(), 1e-12);
  EXPECT_GE(lambda_min_hermitian(b), -1e-12);
}

TEST(PsdSqrt, SquareRootPropertyOverSeeds) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    ComplexMatrix g = random_matrix(5, 5, seed);
    ComplexMatrix a = g.adjoint() * g;
    ComplexMatrix b = psd_sqrt(a, 1e-10);
    EXPECT_LE((b * b - a).operator_norm(), 10.0 * 1e-10 * (1.0 + a.operator_norm()));
  }
}

TEST(PsdSqrt, Errors) {
  ComplexMatrix nonherm(2, 2);
  nonherm(0, 1) = 1.0;
  EXPECT_THROW(psd_sqrt(nonherm, 1e-10), Error);
  ComplexMatrix neg = ComplexMatrix::diagonal({1.0, -0.5});
  EXPECT_THROW(psd_sqrt(neg, 1e-10), Error);
  // eigenvalues in [-tol, 0) are clamped, not rejected
  ComplexMatrix tiny = ComplexMatrix::diagonal({1.0, -1e-12});
  ComplexMatrix b = psd_sqrt(tiny, 1e-10);
  EXPECT_GE(lambda_min_hermitian(b), 0.0);
}

TEST(RangeKernel, DiagonalAndZero) {
  auto [range, kernel] = range_kernel(ComplexMatrix::diagonal({0.0, 5.0, 0.0}));
  EXPECT_EQ(range.rank, 1);
  EXPECT_EQ(kernel.rank, 2);
  EXPECT_NEAR(std::abs(range.basis(1, 0)), 1.0, 1e-12);

  auto [zr, zk] = range_kernel(ComplexMatrix::zero(2, 2));
  EXPECT_EQ(zr.rank, 0);
  EXPECT_EQ(zk.rank, 2);
}

TEST(RangeKernel, RankOneOuterProduct) {
  ComplexMatrix u(3, 1), v(4, 1);
  u(0, 0) = {1.0, 1.0};
  u(1, 0) = {0.0, -2.0};
  u(2, 0) = {0.5, 0.0};
  v(0, 0) = {2.0, 0.0};
  v(1, 0) = {0.0, 1.0};
  v(2, 0) = {-1.0, 0.5};
  v(3, 0) = {0.25, 0.0};
  ComplexMatrix a = u * v.adjoint();
  auto [range, kernel] = range_kernel(a);
  ASSERT_EQ(range.rank, 1);
  // range is the line through u
  cdouble overlap = (range.basis.adjoint() * u)(0, 0);
  EXPECT_NEAR(std::abs(overlap), u.frobenius_norm(), 1e-10);
  // A annihilates its kernel and is reproduced by the range projector
  EXPECT_LE((a * kernel.basis).operator_norm(), 1e-10 * a.operator_norm() * 10);
  EXPECT_LE((range.projector() * a - a).operator_norm(), 1e-10);
}

TEST(RangeKernel, BasisOrthonormal) {
  for (uint64_t seed = 3; seed <= 12; ++seed) {
    ComplexMatrix a = random_matrix(5, 7, seed);
    auto [range, kernel] = range_kernel(a);
    EXPECT_EQ(range.rank + kernel.rank, 7);  // rank plus nullity covers the domain
    ComplexMatrix gr = range.basis.adjoint() * range.basis;
    EXPECT_LE((gr - ComplexMatrix::identity(range.rank)).operator_norm(), 1e-10);
  }
}

TEST(DouglasSolve, ClosedForms) {
  ComplexMatrix id = ComplexMatrix::identity(2);
  ComplexMatrix c = douglas_solve(id, id, 1e-10);
  EXPECT_LE((c - id).operator_norm(), 1e-12);

  ComplexMatrix zero = ComplexMatrix::zero(2, 2);
  ComplexMatrix b = random_matrix(2, 2, 5);
  b *= cdouble(0.5, 0.0);
  EXPECT_LE(douglas_solve(zero, b, 1e-10).operator_norm(), 1e-12);

  ComplexMatrix a = ComplexMatrix::diagonal({1.0, 0.0});
  ComplexMatrix bb = ComplexMatrix::diagonal({2.0, 3.0});
  ComplexMatrix expect = ComplexMatrix::diagonal({0.5, 0.0});
  EXPECT_LE((douglas_solve(a, bb, 1e-10) - expect).operator_norm(), 1e-12);
}

TEST(DouglasSolve, FactorSupportedOnRange) {
  // B has a kernel; C must vanish on the complement of ran B
  ComplexMatrix b = ComplexMatrix::diagonal({2.0, 0.0, 1.0});
  ComplexMatrix a = ComplexMatrix::diagonal({1.0, 0.0, 0.5});
  ComplexMatrix c = douglas_solve(a, b, 1e-10);
  EXPECT_LE((a - c * b).operator_norm(), 1e-10 * (1.0 + b.operator_norm()));
  auto range = range_kernel(b).first;
  EXPECT_LE((c * range.projector() - c).operator_norm(), 1e-10);
  EXPECT_LE(c.operator_norm(), 1.0 + 1e-9);
}

TEST(DouglasSolve, MajorizationFailure) {
  ComplexMatrix a = ComplexMatrix::diagonal({2.0, 1.0});
  ComplexMatrix b = ComplexMatrix::diagonal({1.0, 1.0});
  EXPECT_THROW(douglas_solve(a, b, 1e-10), Error);
}

TEST(CompleteToUnitary, IdentityAndSwap) {
  SubspaceBasis full(2, ComplexMatrix::identity(2));
  ComplexMatrix w = complete_to_unitary(full, full, ComplexMatrix::identity(2));
  EXPECT_LE((w - ComplexMatrix::identity(2)).operator_norm(), 1e-12);

  ComplexMatrix e1(2, 1), e2(2, 1);
  e1(0, 0) = 1.0;
  e2(1, 0) = 1.0;
  ComplexMatrix one = ComplexMatrix::identity(1);
  ComplexMatrix swap =
      complete_to_unitary(SubspaceBasis(2, e1), SubspaceBasis(2, e2), one);
  EXPECT_NEAR(std::abs(swap(1, 0)), 1.0, 1e-12);
  EXPECT_LE((swap.adjoint() * swap - ComplexMatrix::identity(2)).operator_norm(), 1e-9);
  // W e1 = e2, and the complement rule fixes the sign of the other column
  ComplexMatrix we1 = swap * e1;
  EXPECT_LE((we1 - e2).operator_norm(), 1e-12);
  EXPECT_NEAR(swap(0, 1).real(), 1.0, 1e-12);
}

TEST(CompleteToUnitary, Deterministic) {
  ComplexMatrix x = random_matrix(5, 3, 21);
  auto dom = range_kernel(x).first;
  ComplexMatrix y = random_matrix(5, 3, 22);
  auto cod = range_kernel(y).first;
  ASSERT_EQ(dom.rank, cod.rank);
  ComplexMatrix action = ComplexMatrix::identity(dom.rank);
  ComplexMatrix w1 = complete_to_unitary(dom, cod, action);
  ComplexMatrix w2 = complete_to_unitary(dom, cod, action);
  EXPECT_TRUE(w1 == w2);  // bit identical
}

TEST(CompleteToUnitary, RankMismatchAndBadAction) {
  ComplexMatrix e1(2, 1);
  e1(0, 0) = 1.0;
  SubspaceBasis dom(2, e1);
  SubspaceBasis full(2, ComplexMatrix::identity(2));
  EXPECT_THROW(complete_to_unitary(dom, full, ComplexMatrix::identity(1)), Error);
  ComplexMatrix stretch = ComplexMatrix::identity(1);
  stretch(0, 0) = 2.0;
  EXPECT_THROW(complete_to_unitary(dom, dom, stretch), Error);
}

TEST(UnitaryFromAction, PairIsometryData) {
  // U(R_1 T_2 h, R_2 h) = (R_1 h, R_2 T_1 h) for the 3x3 contraction pair
  auto f = fixtures::contraction_pair(0.5, 1.0, 1.0, 1.0);
  const ComplexMatrix& t1 = f.tuple.op(0);
  const ComplexMatrix& t2 = f.tuple.op(1);
  ComplexMatrix p = t1 * t2;
  ComplexMatrix r1sq = f.n - t1.adjoint() * f.n * t1;
  ComplexMatrix r2sq = f.n - t2.adjoint() * f.n * t2;
  ComplexMatrix r1 = psd_sqrt(r1sq, 1e-12);
  ComplexMatrix r2 = psd_sqrt(r2sq, 1e-12);
  auto b1 = range_kernel(r1).first;
  auto b2 = range_kernel(r2).first;
  ComplexMatrix dom = vstack(b1.basis.adjoint() * r1 * t2, b2.basis.adjoint() * r2);
  ComplexMatrix cod = vstack(b1.basis.adjoint() * r1, b2.basis.adjoint() * r2 * t1);
  ComplexMatrix u = unitary_from_action(dom, cod);
  EXPECT_LE((u.adjoint() * u - ComplexMatrix::identity(u.rows())).operator_norm(), 1e-9);
  rng::Stream s(77);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix h = rng::gaussian_matrix(3, 1, s);
    EXPECT_LE((u * (dom * h) - cod * h).operator_norm(), 1e-9 * (1.0 + h.frobenius_norm()));
  }
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(ComplexMatrix::diagonal({0.0, 1.0, 0.0})), 1.0, 1e-12);
  ComplexMatrix nil(2, 2);
  nil(0, 1) = 1.0;
  EXPECT_NEAR(spectral_radius(nil), 0.0, 1e-10);
  rng::Stream s(9);
  ComplexMatrix u = rng::random_unitary(4, s);
  EXPECT_NEAR(spectral_radius(u * cdouble(0.5, 0.0)), 0.5, 1e-9);
}
