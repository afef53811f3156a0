#include <doctest.h>

#include "testutil.hpp"

using namespace sflow;
using namespace sflow::testutil;

TEST_CASE("rel_index on identical projections vanishes") {
  Rng rng(1);
  AlgebraShape shape = mixed_shape(2, 1, 16);
  AElement p = random_projection(rng, shape, 1, {1, 1});
  ProjectionPair pair(p, p);
  CHECK(rel_index_fredholm(pair) == KZeroClass::zero(shape));
  CHECK(rel_index_crossing(pair) == KZeroClass::zero(shape));
}

TEST_CASE("normalization: ind(P + Q, Q) = [P] for orthogonal P, Q") {
  Rng rng(2);
  AlgebraShape shape = AlgebraShape::scalar(4);
  // P rank 2 and Q orthogonal to it
  Matrix u = random_unitary(rng, 4);
  Matrix pm = u.leftCols(2) * u.leftCols(2).adjoint();
  Matrix qm = u.col(2) * u.col(2).adjoint();
  AElement p = AElement::zero(shape, 1), q = AElement::zero(shape, 1);
  p.at(0, 0) = pm + qm;
  q.at(0, 0) = qm;
  KZeroClass idx = rel_index_fredholm(ProjectionPair(p, q));
  CHECK(idx.components[0] == 2);
}

TEST_CASE("full-to-zero projection pair") {
  AlgebraShape shape = AlgebraShape::scalar(3);
  AElement p = AElement::identity(shape, 1);
  AElement q = AElement::zero(shape, 1);
  ProjectionPair pair(p, q);
  CHECK(rel_index_fredholm(pair).components[0] == 3);
  CHECK(rel_index_crossing(pair).components[0] == 3);
}

TEST_CASE("both constructions agree on random pairs") {
  Rng rng(3);
  AlgebraShape shape = mixed_shape(2, 1, 16);
  for (int trial = 0; trial < 25; ++trial) {
    AElement p = random_projection(rng, shape, 1, random_ranks(rng, shape, 1));
    AElement q = random_projection(rng, shape, 1, random_ranks(rng, shape, 1));
    ProjectionPair pair(p, q);
    CHECK(rel_index_fredholm(pair) == rel_index_crossing(pair));
  }
}

TEST_CASE("antisymmetry") {
  Rng rng(4);
  AlgebraShape shape = AlgebraShape::scalar(4);
  AElement p = random_projection(rng, shape, 1, {2});
  AElement q = random_projection(rng, shape, 1, {3});
  CHECK(rel_index_fredholm(ProjectionPair(p, q)) ==
        k_neg(rel_index_fredholm(ProjectionPair(q, p))));
}

TEST_CASE("homotopy invariance along strongly continuous projection paths") {
  Rng rng(5);
  AlgebraShape shape = AlgebraShape::scalar(4);
  AElement p = random_projection(rng, shape, 1, {2});
  AElement q = random_projection(rng, shape, 1, {1});
  Matrix h1 = random_hermitian(rng, 4), h2 = random_hermitian(rng, 4);
  KZeroClass at_zero = rel_index_fredholm(ProjectionPair(p, q));
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    Matrix r1 = unitary_calculus(h1, [&](double x) { return std::exp(Complex(0, t * x)); });
    Matrix r2 = unitary_calculus(h2, [&](double x) { return std::exp(Complex(0, t * x)); });
    AElement pt = p, qt = q;
    pt.at(0, 0) = r1 * p.at(0, 0) * r1.adjoint();
    qt.at(0, 0) = r2 * q.at(0, 0) * r2.adjoint();
    CHECK(rel_index_fredholm(ProjectionPair(pt, qt)) == at_zero);
  }
}

TEST_CASE("malformed projections are rejected") {
  AlgebraShape shape = AlgebraShape::scalar(2);
  AElement half = AElement::identity(shape, 1);
  half.at(0, 0) *= 0.5;  // eigenvalue 1/2 cannot be snapped
  AElement q = AElement::zero(shape, 1);
  CHECK_THROWS_AS(ProjectionPair(half, q), Error);
}

TEST_CASE("loop-block projections need theta-constant rank") {
  AlgebraShape shape = AlgebraShape::loop(1, 16);
  AElement p = AElement::zero(shape, 2);
  for (int th = 0; th < 16; ++th) {
    p.at(0, th)(0, 0) = 1.0;
    if (th == 7) p.at(0, th)(1, 1) = 1.0;  // rank jumps at one angle
  }
  AElement q = AElement::zero(shape, 2);
  CHECK_THROWS_AS(ProjectionPair(p, q), Error);
}

TEST_CASE("axiom suite passes on scalar and mixed shapes") {
  AxiomReport scalar = rel_index_axiom_suite(AlgebraShape::scalar(3), 1, 10, 42);
  CHECK(scalar.passed());
  AxiomReport mixed = rel_index_axiom_suite(mixed_shape(2, 1, 12), 1, 6, 43);
  CHECK(mixed.passed());
}
