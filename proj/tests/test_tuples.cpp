#include <gtest/gtest.h>

#include "toep/fixtures.hpp"
#include "toep/toeplitz.hpp"
#include "toep/tuples.hpp"

using namespace toep;

TEST(Validate, ProjectionPairAndIdentity) {
  auto f = fixtures::projection_pair(3, 2, 2, {5.0});
  EXPECT_EQ(f.tuple.dim(), 3);
  ComplexMatrix id = ComplexMatrix::identity(2);
  EXPECT_NO_THROW(OperatorTuple::validate({id, id}));
}

TEST(Validate, RejectsNonCommutingWithDetails) {
  ComplexMatrix up(2, 2), down(2, 2);
  up(0, 1) = 1.0;
  down(1, 0) = 1.0;
  try {
    OperatorTuple::validate({up, down});
    FAIL() << "expected NotCommuting";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::not_commuting);
    EXPECT_NE(std::string(e.what()).find("NotCommuting(1,2"), std::string::npos);
    // the commutator is diag(1, -1), norm 1
    EXPECT_NE(std::string(e.what()).find("residual=1"), std::string::npos);
  }
}

TEST(Validate, RejectsExpansionsAndShapeMismatch) {
  ComplexMatrix big = ComplexMatrix::identity(2) * cdouble(1.5, 0.0);
  EXPECT_THROW(OperatorTuple::validate({big}), Error);
  ComplexMatrix a = ComplexMatrix::identity(2), b = ComplexMatrix::identity(3);
  EXPECT_THROW(OperatorTuple::validate({a, b}), Error);
}

TEST(Power, ClosedForms) {
  auto f1 = fixtures::projection_pair(3, 2, 2, {5.0});
  EXPECT_LE((power(f1.tuple, MultiIndex::zeros(2)) - ComplexMatrix::identity(3)).operator_norm(),
            0.0);
  ComplexMatrix p11 = power(f1.tuple, MultiIndex({1, 1}));
  EXPECT_LE((p11 - ComplexMatrix::diagonal({0.0, 1.0, 0.0})).operator_norm(), 1e-15);

  auto f2 = fixtures::contraction_pair(0.5);
  ComplexMatrix p21 = power(f2.tuple, MultiIndex({2, 1}));
  EXPECT_LE((p21 - ComplexMatrix::diagonal({0.0, 0.25, 0.0})).operator_norm(), 1e-15);
}

TEST(Power, AdditivityProperty) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    MultiIndex alpha({2, 1}), beta({1, 3});
    ComplexMatrix lhs = power(t, alpha) * power(t, beta);
    ComplexMatrix rhs = power(t, alpha + beta);
    double slack = 2.0 * (alpha.order() + beta.order()) * t.tol_commute() *
                   static_cast<double>(t.dim());
    EXPECT_LE((lhs - rhs).operator_norm(), slack + 1e-12);
  }
}

TEST(ProductContraction, Examples) {
  auto f1 = fixtures::projection_pair(3, 2, 2, {5.0});
  EXPECT_LE((product_contraction(f1.tuple) - ComplexMatrix::diagonal({0.0, 1.0, 0.0}))
                .operator_norm(),
            1e-15);
  ComplexMatrix id = ComplexMatrix::identity(3);
  EXPECT_LE((product_contraction(OperatorTuple::validate({id, id})) - id).operator_norm(), 0.0);
  ComplexMatrix zero = ComplexMatrix::zero(3, 3);
  EXPECT_LE(product_contraction(OperatorTuple::validate({id, zero})).operator_norm(), 0.0);
  // the product commutes with each entry
  for (uint64_t seed = 2; seed <= 6; ++seed) {
    auto t = random_commuting_tuple(5, 3, TupleFamily::joint_triangular, seed);
    ComplexMatrix p = product_contraction(t);
    for (int i = 0; i < t.count(); ++i)
      EXPECT_LE((p * t.op(i) - t.op(i) * p).operator_norm(),
                static_cast<double>(t.dim()) * t.tol_commute() + 1e-12);
  }
}

TEST(AdjointPurity, Examples) {
  auto f1 = fixtures::projection_pair(3, 2, 2, {5.0});
  EXPECT_FALSE(is_adjoint_pure(f1.tuple));
  ComplexMatrix strict = ComplexMatrix::identity(3) * cdouble(0.9, 0.0);
  EXPECT_TRUE(is_adjoint_pure(OperatorTuple::validate({strict, strict})));
  rng::Stream s(5);
  ComplexMatrix u = rng::random_unitary(4, s);
  EXPECT_FALSE(is_adjoint_pure(OperatorTuple::validate({u})));
}

TEST(RandomTuple, DeterministicAcrossCalls) {
  auto a = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, 7);
  auto b = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, 7);
  for (int i = 0; i < 2; ++i) EXPECT_TRUE(a.op(i) == b.op(i));
}

TEST(RandomTuple, AllFamiliesValidate) {
  for (auto family : {TupleFamily::joint_diagonal, TupleFamily::joint_triangular,
                      TupleFamily::polynomials_of_one_matrix}) {
    for (uint64_t seed = 1; seed <= 34; ++seed) {
      auto t = random_commuting_tuple(3 + static_cast<index_t>(seed % 4), 2 + (seed % 2), family,
                                      seed);
      for (int i = 0; i < t.count(); ++i) {
        EXPECT_LE(t.op(i).operator_norm(), 1.0 + 1e-10);
        for (int j = i + 1; j < t.count(); ++j)
          EXPECT_LE((t.op(i) * t.op(j) - t.op(j) * t.op(i)).operator_norm(), 1e-12);
      }
    }
  }
}

TEST(RandomTuple, PolynomialFamilyCommutators) {
  auto t = random_commuting_tuple(3, 3, TupleFamily::polynomials_of_one_matrix, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      EXPECT_LE((t.op(i) * t.op(j) - t.op(j) * t.op(i)).operator_norm(), 1e-12);
}

TEST(RandomTuple, UnknownFamilyRejected) {
  EXPECT_THROW(random_commuting_tuple(3, 2, "does-not-exist", 1), Error);
}

TEST(RandomTuple, SpectralMarginHolds) {
  // moduli are either unimodular or at most 0.9, so the product's spectral
  // radius never sits just under one
  for (auto family : {TupleFamily::joint_diagonal, TupleFamily::joint_triangular,
                      TupleFamily::polynomials_of_one_matrix}) {
    for (uint64_t seed = 40; seed <= 70; ++seed) {
      auto t = random_commuting_tuple(5, 2, family, seed);
      double rho = spectral_radius(product_contraction(t));
      EXPECT_TRUE(rho <= 0.9 + 1e-9 || rho >= 1.0 - 1e-9)
          << "family " << static_cast<int>(family) << " seed " << seed << " rho " << rho;
    }
  }
}

TEST(CrossModule, PurityMatchesQtAndSolutionSpace) {
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    bool pure = is_adjoint_pure(t);
    double qn = compute_qt(t).operator_norm();
    EXPECT_EQ(pure, qn <= 1e-8) << "seed " << seed;
  }
}
