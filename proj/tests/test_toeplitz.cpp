#include <gtest/gtest.h>

#include <cmath>

#include "toep/fixtures.hpp"
#include "toep/toeplitz.hpp"
#include "toep/tuples.hpp"

using namespace toep;

namespace {

fixtures::ProjectionPair f1() { return fixtures::projection_pair(3, 2, 2, {5.0}); }

OperatorTuple unitary_tuple(index_t dim, int n, uint64_t seed) {
  rng::Stream s(seed);
  std::vector<ComplexMatrix> ops;
  for (int i = 0; i < n; ++i) ops.push_back(rng::random_unitary(dim, s));
  // random unitaries do not commute; use powers of a single one instead
  ComplexMatrix u = ops[0];
  std::vector<ComplexMatrix> comm{u};
  for (int i = 1; i < n; ++i) comm.push_back(comm.back() * u);
  return OperatorTuple::validate(std::move(comm));
}

}  // namespace

TEST(ToeplitzResidual, GoldenValues) {
  auto f = f1();
  EXPECT_LE(toeplitz_residual(f.x, f.tuple, f.tuple), 1e-14);

  auto u = unitary_tuple(4, 2, 3);
  EXPECT_LE(toeplitz_residual(ComplexMatrix::identity(4), u, u), 1e-12);

  // identity against the strict pair: the worst direction is the one killed
  // by T_1, giving residual exactly 1 (entry (3,3) of T_1* T_1 - I)
  auto f2 = fixtures::contraction_pair(0.5);
  EXPECT_NEAR(toeplitz_residual(ComplexMatrix::identity(3), f2.tuple, f2.tuple), 1.0, 1e-12);

  EXPECT_THROW(toeplitz_residual(ComplexMatrix::identity(2), f.tuple, f.tuple), Error);
}

TEST(SolutionSpace, ProjectionPairIsOneDimensional) {
  auto f = f1();
  SolutionSpace space = solution_space(f.tuple);
  ASSERT_EQ(space.dimension(), 1);
  EXPECT_LE(space.residual, 1e-10);
  // spanned by diag(0,1,0), phase-normalized
  ComplexMatrix expect = ComplexMatrix::diagonal({0.0, 1.0, 0.0});
  EXPECT_LE((space.basis[0] - expect).operator_norm(), 1e-10);
}

TEST(SolutionSpace, PureTupleGivesZero) {
  // commuting nilpotent pair: product is nilpotent, adjoint pure
  ComplexMatrix j(3, 3);
  j(0, 1) = 1.0;
  j(1, 2) = 1.0;
  auto s = OperatorTuple::validate({j, j * j});
  auto any = fixtures::contraction_pair(0.5).tuple;
  EXPECT_EQ(solution_space(s, any).dimension(), 0);
  EXPECT_EQ(solution_space(s, s).dimension(), 0);
}

TEST(SolutionSpace, IdentitiesGiveFullSpace) {
  ComplexMatrix id = ComplexMatrix::identity(3);
  auto t = OperatorTuple::validate({id, id});
  SolutionSpace space = solution_space(t);
  EXPECT_EQ(space.dimension(), 9);
  // basis orthonormal in the trace inner product
  for (size_t i = 0; i < space.basis.size(); ++i)
    for (size_t k = i; k < space.basis.size(); ++k) {
      cdouble ip = (space.basis[i].adjoint() * space.basis[k]).trace();
      EXPECT_NEAR(std::abs(ip), i == k ? 1.0 : 0.0, 1e-10);
    }
}

TEST(ComputeQt, GoldenValues) {
  auto f = f1();
  ComplexMatrix q = compute_qt(f.tuple);
  EXPECT_LE((q - ComplexMatrix::diagonal({0.0, 1.0, 0.0})).operator_norm(), 1e-10);

  ComplexMatrix id = ComplexMatrix::identity(4);
  EXPECT_LE((compute_qt(OperatorTuple::validate({id, id})) - id).operator_norm(), 1e-12);

  for (uint64_t seed = 1; seed <= 8; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::polynomials_of_one_matrix, seed);
    ASSERT_TRUE(is_adjoint_pure(t));
    EXPECT_EQ(compute_qt(t).operator_norm(), 0.0);
  }
}

TEST(ComputeQt, FixedPointResidual) {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = random_commuting_tuple(5, 2, TupleFamily::joint_diagonal, seed);
    ComplexMatrix q = compute_qt(t);
    ComplexMatrix p = product_contraction(t);
    EXPECT_LE((p.adjoint() * q * q * p - q * q).operator_norm(), 1e-10);
  }
}

TEST(CanonicalExtension, ProjectionPair) {
  auto f = f1();
  PseudoExtension pe = canonical_isometric_pe(f.tuple);
  EXPECT_EQ(pe.extension_dim(), 1);
  EXPECT_EQ(pe.kind, ExtensionKind::isometric);
  EXPECT_TRUE(pe.canonical);
  // J selects the middle coordinate; V_1 = V_2 = (1)
  ComplexMatrix expect_j(1, 3);
  expect_j(0, 1) = 1.0;
  EXPECT_LE((pe.J - expect_j).operator_norm(), 1e-10);
  for (int i = 0; i < 2; ++i)
    EXPECT_LE((pe.V.op(i) - ComplexMatrix::identity(1)).operator_norm(), 1e-10);
}

TEST(CanonicalExtension, UnitaryTupleIsExtendedByItself) {
  auto u = unitary_tuple(3, 2, 11);
  PseudoExtension pe = canonical_isometric_pe(u);
  EXPECT_EQ(pe.extension_dim(), 3);
  // J is unitary here, so J* V_i J recovers T_i
  for (int i = 0; i < u.count(); ++i)
    EXPECT_LE((pe.J.adjoint() * pe.V.op(i) * pe.J - u.op(i)).operator_norm(), 1e-9);
}

TEST(CanonicalExtension, DichotomyOverSeeds) {
  int built = 0, zero = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    try {
      PseudoExtension pe = canonical_isometric_pe(t);
      ++built;
      EXPECT_TRUE(pe.cert.pass());
      EXPECT_FALSE(is_adjoint_pure(t));
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), errc::zero_qt);
      ++zero;
      EXPECT_TRUE(is_adjoint_pure(t));
    }
  }
  EXPECT_GT(built, 0);
  EXPECT_GT(zero, 0);
}

TEST(FactorizePositive, GoldenProjectionPair) {
  auto f = f1();
  PseudoExtension pe = factorize_positive(f.x, f.tuple);
  EXPECT_EQ(pe.extension_dim(), 1);
  // J = (0, sqrt 5, 0), V_i = (1)
  ComplexMatrix expect_j(1, 3);
  expect_j(0, 1) = std::sqrt(5.0);
  EXPECT_LE((pe.J - expect_j).operator_norm(), 1e-10);
  for (int i = 0; i < 2; ++i)
    EXPECT_LE((pe.V.op(i) - ComplexMatrix::identity(1)).operator_norm(), 1e-10);
  EXPECT_LE((pe.J.adjoint() * pe.J - f.x).operator_norm(), 1e-12);
}

TEST(FactorizePositive, ZeroFactorsThroughZeroSpace) {
  auto f = f1();
  PseudoExtension pe = factorize_positive(ComplexMatrix::zero(3, 3), f.tuple);
  EXPECT_EQ(pe.extension_dim(), 0);
  EXPECT_EQ(pe.J.cols(), 3);
}

TEST(FactorizePositive, RejectsNonToeplitzAndNonPsd) {
  auto f = f1();
  EXPECT_THROW(factorize_positive(ComplexMatrix::identity(3), f.tuple), Error);
  ComplexMatrix neg = ComplexMatrix::diagonal({0.0, -1.0, 0.0});
  EXPECT_THROW(factorize_positive(neg, f.tuple), Error);
}

TEST(FactorizePositive, RoundTripProperty) {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    ComplexMatrix q = compute_qt(t);
    if (q.operator_norm() <= 1e-8) continue;
    ComplexMatrix r = q * q;
    PseudoExtension pe = factorize_positive(r, t);
    EXPECT_LE((pe.J.adjoint() * pe.J - r).operator_norm(), 1e-8);
    EXPECT_LE(toeplitz_residual(pe.J.adjoint() * pe.J, t, t), 1e-8);
    for (int i = 0; i < t.count(); ++i) {
      EXPECT_LE((pe.J * t.op(i) - pe.V.op(i) * pe.J).operator_norm(), 1e-8);
      ComplexMatrix vi = pe.V.op(i);
      EXPECT_LE((vi.adjoint() * vi - ComplexMatrix::identity(pe.extension_dim())).operator_norm(),
                1e-8);
    }
  }
}

TEST(ContractiveToeplitzDominatedByCanonicalGram) {
  // every PSD Toeplitz contraction sits below J* J of the canonical extension
  for (uint64_t seed = 1; seed <= 15; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    if (is_adjoint_pure(t)) continue;
    PseudoExtension pe = canonical_isometric_pe(t);
    SolutionSpace vv = solution_space(pe.V, pe.V);
    if (vv.dimension() == 0) continue;
    ComplexMatrix b = vv.basis[0];
    ComplexMatrix x = pe.J.adjoint() * (b.adjoint() * b) * pe.J;
    double nrm = x.operator_norm();
    if (nrm > 0) x *= cdouble(1.0 / nrm, 0.0);
    ASSERT_LE(toeplitz_residual(x, t, t), 1e-8);
    ComplexMatrix gram = pe.J.adjoint() * pe.J;
    EXPECT_GE(lambda_min_hermitian(gram - x), -1e-8);
  }
}

TEST(StructureChecks, GoldenAndProperty) {
  auto f = f1();
  Report rep = structure_checks(f.x, f.tuple);
  EXPECT_TRUE(rep.pass());
  for (const auto& item : rep.items) EXPECT_LE(item.value, 1e-12);

  Report zero = structure_checks(ComplexMatrix::zero(3, 3), f.tuple);
  EXPECT_TRUE(zero.pass());

  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto t = random_commuting_tuple(4, 2, TupleFamily::joint_diagonal, seed);
    SolutionSpace space = solution_space(t);
    for (const auto& x : space.basis) EXPECT_TRUE(structure_checks(x, t).pass());
  }
  EXPECT_THROW(structure_checks(ComplexMatrix::identity(3), fixtures::contraction_pair(0.5).tuple),
               Error);
}

TEST(QtProjectionCheck, Examples) {
  auto f = f1();
  Report rep = qt_projection_check(f.tuple);
  EXPECT_TRUE(rep.pass());

  auto strict = random_commuting_tuple(4, 2, TupleFamily::polynomials_of_one_matrix, 2);
  EXPECT_TRUE(qt_projection_check(strict).pass());

  auto u = unitary_tuple(4, 2, 8);
  Report urep = qt_projection_check(u);
  EXPECT_TRUE(urep.pass());
  EXPECT_LE((compute_qt(u) - ComplexMatrix::identity(4)).operator_norm(), 1e-10);
}

TEST(UnitaryIntertwiner, SingleUnitaryFullSpace) {
  rng::Stream s(13);
  ComplexMatrix u = rng::random_unitary(3, s);
  auto tu = OperatorTuple::validate({u});
  IntertwinerReport rep = unitary_intertwiner_subspaces(tu, tu);
  EXPECT_TRUE(rep.equivalence_found);
  EXPECT_TRUE(rep.cert.pass());
}

TEST(UnitaryIntertwiner, EigenvalueMatching) {
  auto u = OperatorTuple::validate({ComplexMatrix::diagonal({{1.0, 0.0}, {0.0, 1.0}})});
  auto v = OperatorTuple::validate({ComplexMatrix::diagonal({{0.0, 1.0}, {-1.0, 0.0}})});
  IntertwinerReport rep = unitary_intertwiner_subspaces(u, v);
  ASSERT_TRUE(rep.equivalence_found);
  EXPECT_EQ(rep.m.rank, 1);
  EXPECT_EQ(rep.n.rank, 1);
  // M = span(e2) in the u-space, N = span(e1) in the v-space: both carry i
  EXPECT_NEAR(std::abs(rep.m.basis(1, 0)), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(rep.n.basis(0, 0)), 1.0, 1e-10);
  EXPECT_TRUE(rep.cert.pass());
}

TEST(UnitaryIntertwiner, DisjointSpectraGiveNothing) {
  auto u = OperatorTuple::validate({ComplexMatrix::diagonal({{1.0, 0.0}, {-1.0, 0.0}})});
  cdouble i_unit(0.0, 1.0);
  auto v = OperatorTuple::validate(
      {ComplexMatrix::diagonal({i_unit, -i_unit})});
  IntertwinerReport rep = unitary_intertwiner_subspaces(u, v);
  EXPECT_FALSE(rep.equivalence_found);
  auto nonunitary = fixtures::contraction_pair(0.5).tuple;
  EXPECT_THROW(unitary_intertwiner_subspaces(nonunitary, nonunitary), Error);
}

TEST(Determinism, RepeatedRunsBitIdentical) {
  auto f = f1();
  SolutionSpace s1 = solution_space(f.tuple);
  SolutionSpace s2 = solution_space(f.tuple);
  ASSERT_EQ(s1.dimension(), s2.dimension());
  for (index_t k = 0; k < s1.dimension(); ++k)
    EXPECT_TRUE(s1.basis[static_cast<size_t>(k)] == s2.basis[static_cast<size_t>(k)]);
  EXPECT_TRUE(compute_qt(f.tuple) == compute_qt(f.tuple));
  PseudoExtension p1 = canonical_isometric_pe(f.tuple);
  PseudoExtension p2 = canonical_isometric_pe(f.tuple);
  EXPECT_TRUE(p1.J == p2.J);
}
