#include <doctest.h>

#include "testutil.hpp"

using namespace sflow;
using namespace sflow::testutil;

namespace {

AElement scalar_unitary(const AlgebraShape& shape, const Matrix& u) {
  AElement a = AElement::zero(shape, static_cast<int>(u.rows()) / shape.blocks[0].dim);
  a.at(0, 0) = u;
  return a;
}

LagrangianPath scalar_pair_path(const AlgebraShape& shape, int rank,
                                const std::function<Matrix(double)>& f0,
                                const std::function<Matrix(double)>& f1, int samples) {
  LagrangianPath lp;
  lp.shape = shape;
  lp.rank = rank;
  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / (samples - 1);
    lp.t_grid.push_back(t);
    AElement a = AElement::zero(shape, rank), b = AElement::zero(shape, rank);
    a.at(0, 0) = f0(t);
    b.at(0, 0) = f1(t);
    lp.u0.push_back(std::move(a));
    lp.u1.push_back(std::move(b));
  }
  lp.t_grid.front() = 0.0;
  lp.t_grid.back() = 1.0;
  return lp;
}

Matrix phase(double alpha) {
  Matrix m(1, 1);
  m(0, 0) = std::exp(Complex(0, alpha));
  return m;
}

}  // namespace

TEST_CASE("transversality via the difference unitary") {
  AlgebraShape shape = AlgebraShape::scalar(2);
  Lagrangian one(scalar_unitary(shape, Matrix::Identity(2, 2)));
  Lagrangian minus(scalar_unitary(shape, -Matrix::Identity(2, 2)));
  CHECK(transverse(one, minus, 1.0));
  CHECK_FALSE(transverse(one, one, 1e-9));

  Rng rng(31);
  Matrix u = random_unitary(rng, 2);
  double eps = 0.05;
  Matrix v = u * std::exp(Complex(0, eps));
  double dist = std::abs(std::exp(Complex(0, eps)) - 1.0);
  Lagrangian lu(scalar_unitary(shape, u));
  Lagrangian lv(scalar_unitary(shape, v));
  CHECK_FALSE(transverse(lu, lv, dist * 1.5));
  CHECK(transverse(lu, lv, dist * 0.5));
}

TEST_CASE("pair_unitary and its loop class") {
  AlgebraShape shape = AlgebraShape::loop(1, 24);
  AElement u0 = AElement::identity(shape, 1);
  AElement u1 = AElement::identity(shape, 1);
  for (int th = 0; th < 24; ++th) {
    u1.at(0, th)(0, 0) = std::exp(Complex(0, -2.0 * kPi * th / 24));
  }
  PairUnitary pu = pair_unitary(Lagrangian(u0), Lagrangian(u1));
  CHECK(pu.loop_class.components[0] == 1);  // u0 u1* = e^{i theta}
  PairUnitary same = pair_unitary(Lagrangian(u0), Lagrangian(u0));
  CHECK(same.loop_class.components[0] == 0);
  CHECK((same.u - AElement::identity(shape, 1)).norm() < 1e-12);
}

TEST_CASE("pair class is invariant under symplectic-frame conjugation") {
  // conjugating both Lagrangian unitaries by v1 u v0* preserves the class
  Rng rng(37);
  AlgebraShape shape = AlgebraShape::loop(1, 24);
  AElement u0 = AElement::identity(shape, 1);
  AElement u1 = AElement::identity(shape, 1);
  for (int th = 0; th < 24; ++th) {
    u1.at(0, th)(0, 0) = std::exp(Complex(0, -2.0 * kPi * th / 24));
  }
  Complex v0 = std::exp(Complex(0, 0.7)), v1 = std::exp(Complex(0, -1.3));
  AElement w0 = u0, w1 = u1;
  for (int th = 0; th < 24; ++th) {
    w0.at(0, th) = v1 * u0.at(0, th) * std::conj(v0);
    w1.at(0, th) = v1 * u1.at(0, th) * std::conj(v0);
  }
  CHECK(pair_unitary(Lagrangian(w0), Lagrangian(w1)).loop_class.components[0] ==
        pair_unitary(Lagrangian(u0), Lagrangian(u1)).loop_class.components[0]);
}

TEST_CASE("interval_spectrum branch structure") {
  Matrix one = Matrix::Identity(1, 1);
  std::vector<double> at_one = interval_spectrum(one, -5.0, 5.0);
  CHECK(at_one == std::vector<double>{-kPi, 0.0, kPi});

  Matrix minus = -Matrix::Identity(1, 1);
  std::vector<double> at_minus = interval_spectrum(minus, -5.0, 5.0);
  REQUIRE(at_minus.size() == 4);
  CHECK(at_minus[0] == doctest::Approx(-3.0 * kPi / 2.0));
  CHECK(at_minus[1] == doctest::Approx(-kPi / 2.0));
  CHECK(at_minus[2] == doctest::Approx(kPi / 2.0));
  CHECK(at_minus[3] == doctest::Approx(3.0 * kPi / 2.0));

  Matrix both = Matrix::Zero(2, 2);
  both(0, 0) = 1.0;
  both(1, 1) = -1.0;
  std::vector<double> merged = interval_spectrum(both, -5.0, 5.0);
  std::vector<double> expected = at_one;
  expected.insert(expected.end(), at_minus.begin(), at_minus.end());
  std::sort(expected.begin(), expected.end());
  REQUIRE(merged.size() == expected.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i] == doctest::Approx(expected[i]));
  }

  // consecutive branches of one eigenphase differ by exactly pi
  Rng rng(41);
  Matrix u = random_unitary(rng, 1);
  std::vector<double> branches = interval_spectrum(u, -10.0, 10.0);
  for (std::size_t i = 0; i + 1 < branches.size(); ++i) {
    CHECK(branches[i + 1] - branches[i] == doctest::Approx(kPi));
  }
}

TEST_CASE("maslov_pair on scalar fixtures") {
  AlgebraShape shape = AlgebraShape::scalar(1);

  SUBCASE("constant transverse pair") {
    LagrangianPath lp = scalar_pair_path(
        shape, 1, [](double) { return Matrix::Identity(1, 1); },
        [](double) { return -Matrix::Identity(1, 1); }, 16);
    CHECK(maslov_pair(lp).components[0] == 0);
  }

  SUBCASE("one eigenphase pass through 1") {
    LagrangianPath lp = scalar_pair_path(
        shape, 1, [](double) { return Matrix::Identity(1, 1); },
        [](double t) { return phase(kPi + 2.0 * kPi * t); }, 64);
    CHECK(maslov_pair(lp).components[0] == kFrozenSigns.sigma_m * 1);
  }

  SUBCASE("transversality precondition") {
    LagrangianPath lp = scalar_pair_path(
        shape, 1, [](double) { return Matrix::Identity(1, 1); },
        [](double t) { return phase(2.0 * kPi * t); }, 64);  // u1(0) = u0
    CHECK_THROWS_AS(maslov_pair(lp), Error);
  }
}

TEST_CASE("maslov_pair antisymmetry and homotopy invariance") {
  Rng rng(43);
  AlgebraShape shape = AlgebraShape::scalar(2);
  for (int trial = 0; trial < 6; ++trial) {
    UnitaryPathGen g0 = UnitaryPathGen::make(rng, 2), g1 = UnitaryPathGen::make(rng, 2);
    LagrangianPath lp = scalar_pair_path(
        shape, 1, [&](double t) { return g0.at(t); }, [&](double t) { return g1.at(t); }, 97);
    LagrangianPath swapped = lp;
    std::swap(swapped.u0, swapped.u1);
    MaslovParams mp;
    mp.gap_min = 0.05;
    if (!transverse(Lagrangian(lp.u0.front()), Lagrangian(lp.u1.front()), mp.gap_min) ||
        !transverse(Lagrangian(lp.u0.back()), Lagrangian(lp.u1.back()), mp.gap_min)) {
      continue;
    }
    KZeroClass mu = maslov_pair(lp, mp);
    CHECK(maslov_pair(swapped, mp) == k_neg(mu));

    // endpoint-fixing homotopy of u1
    Matrix h = random_hermitian(rng, 2, 0.5);
    LagrangianPath moved = lp;
    for (int i = 0; i < static_cast<int>(lp.t_grid.size()); ++i) {
      double t = lp.t_grid[i];
      Matrix rot = unitary_calculus(
          h, [&](double x) { return std::exp(Complex(0, t * (1.0 - t) * x)); });
      moved.u1[i].at(0, 0) = rot * lp.u1[i].at(0, 0);
    }
    CHECK(maslov_pair(moved, mp) == mu);
  }
}

TEST_CASE("maslov_pair equals the winding class on closed loops") {
  AlgebraShape shape = AlgebraShape::scalar(1);
  for (int wind : {-2, -1, 0, 1, 2}) {
    LagrangianPath lp = scalar_pair_path(
        shape, 1, [](double) { return -Matrix::Identity(1, 1); },
        [&](double t) { return phase(2.0 * kPi * wind * t); }, 96 + 1);
    // mu = winding of det(u1 u0*) = wind
    CHECK(maslov_pair(lp).components[0] == wind);
  }
}

TEST_CASE("maslov_pair functoriality under evaluation and rotation") {
  Rng rng(47);
  AlgebraShape shape = AlgebraShape::loop(1, 24);
  LagrangianPath lp;
  lp.shape = shape;
  lp.rank = 1;
  const int samples = 97;
  UnitaryPathGen g = UnitaryPathGen::make(rng, 1);
  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / (samples - 1);
    lp.t_grid.push_back(t);
    AElement u0 = AElement::zero(shape, 1), u1 = AElement::zero(shape, 1);
    for (int th = 0; th < 24; ++th) {
      double theta = 2.0 * kPi * th / 24;
      u0.at(0, th) = -Matrix::Identity(1, 1) * std::exp(Complex(0, 0.3 * std::sin(theta)));
      u1.at(0, th) = g.at(t) * std::exp(Complex(0, 0.2 * std::cos(theta)));
    }
    lp.u0.push_back(std::move(u0));
    lp.u1.push_back(std::move(u1));
  }
  lp.t_grid.front() = 0.0;
  lp.t_grid.back() = 1.0;
  MaslovParams mp;
  mp.gap_min = 0.05;
  if (!transverse(Lagrangian(lp.u0.front()), Lagrangian(lp.u1.front()), mp.gap_min) ||
      !transverse(Lagrangian(lp.u0.back()), Lagrangian(lp.u1.back()), mp.gap_min)) {
    return;  // unlucky seed; other tests cover the value
  }
  KZeroClass mu = maslov_pair(lp, mp);

  auto apply_to_pair = [&](const Homomorphism& hom) {
    LagrangianPath out;
    out.shape = hom.target;
    out.rank = lp.rank;
    out.t_grid = lp.t_grid;
    for (std::size_t i = 0; i < lp.u0.size(); ++i) {
      out.u0.push_back(apply(hom, lp.u0[i]));
      out.u1.push_back(apply(hom, lp.u1[i]));
    }
    return out;
  };

  Homomorphism ev = Homomorphism::evaluate(shape, 0, 7);
  CHECK(maslov_pair(apply_to_pair(ev), mp) == pushforward(mu, ev));
  Homomorphism rot = Homomorphism::rotate(shape, 0, 11);
  CHECK(maslov_pair(apply_to_pair(rot), mp) == pushforward(mu, rot));
}

TEST_CASE("maslov_triple on the scalar fixture and block sums") {
  AlgebraShape shape = AlgebraShape::scalar(1);
  Lagrangian l0(scalar_unitary(shape, Matrix::Identity(1, 1)));
  Lagrangian l1(scalar_unitary(shape, -Matrix::Identity(1, 1)));
  Matrix iu(1, 1);
  iu(0, 0) = Complex(0, 1);
  Lagrangian l2(scalar_unitary(shape, iu));
  KZeroClass tau = maslov_triple(l0, l1, l2);
  CHECK(std::abs(tau.components[0]) == 1);

  // blockwise additivity over a two-block shape
  AlgebraShape two;
  two.blocks = {BlockSpec{BlockKind::scalar, 1, 1}, BlockSpec{BlockKind::scalar, 1, 1}};
  auto both = [&](Complex a, Complex b) {
    AElement e = AElement::zero(two, 1);
    e.at(0, 0)(0, 0) = a;
    e.at(1, 0)(0, 0) = b;
    return Lagrangian(e);
  };
  KZeroClass sum = maslov_triple(both(1.0, 1.0), both(-1.0, -1.0),
                                 both(Complex(0, 1), Complex(0, -1)));
  Lagrangian r0(scalar_unitary(shape, Matrix::Identity(1, 1)));
  Matrix mi(1, 1);
  mi(0, 0) = Complex(0, -1);
  KZeroClass tau2 = maslov_triple(r0, l1, Lagrangian(scalar_unitary(shape, mi)));
  CHECK(sum.components[0] == tau.components[0]);
  CHECK(sum.components[1] == tau2.components[0]);
}

TEST_CASE("maslov_triple is nonsingular on random transverse triples") {
  Rng rng(53);
  AlgebraShape shape = AlgebraShape::scalar(3);
  int tested = 0;
  while (tested < 15) {
    Matrix u0 = random_unitary(rng, 3), u1 = random_unitary(rng, 3), u2 = random_unitary(rng, 3);
    Lagrangian l0(scalar_unitary(shape, u0)), l1(scalar_unitary(shape, u1)),
        l2(scalar_unitary(shape, u2));
    if (!transverse(l0, l1, 0.1) || !transverse(l1, l2, 0.1) || !transverse(l2, l0, 0.1)) continue;
    KZeroClass tau = maslov_triple(l0, l1, l2, 0.1);  // DegenerateForm would throw
    CHECK(std::abs(tau.components[0]) <= 3);
    ++tested;
  }
}

TEST_CASE("triple identity on constant triples and single-Lagrangian loops") {
  AlgebraShape shape = AlgebraShape::scalar(1);
  Matrix iu(1, 1);
  iu(0, 0) = Complex(0, 1);

  SUBCASE("constant triple gives 0 = 0") {
    LagrangianTriplePath tp;
    tp.shape = shape;
    tp.rank = 1;
    const int n = 17;
    for (int i = 0; i < n; ++i) {
      tp.t_grid.push_back(static_cast<double>(i) / (n - 1));
      tp.u0.push_back(scalar_unitary(shape, Matrix::Identity(1, 1)));
      tp.u1.push_back(scalar_unitary(shape, -Matrix::Identity(1, 1)));
      tp.u2.push_back(scalar_unitary(shape, iu));
    }
    tp.t_grid.front() = 0.0;
    tp.t_grid.back() = 1.0;
    TripleIdentityReport rep = triple_pair_identity(tp);
    CHECK(rep.holds);
    CHECK(rep.tau_start == rep.tau_end);
    CHECK(rep.mu01.components[0] == 0);
  }

  SUBCASE("rotating one Lagrangian a full loop cancels in the sum") {
    LagrangianTriplePath tp;
    tp.shape = shape;
    tp.rank = 1;
    const int n = 129;
    for (int i = 0; i < n; ++i) {
      double t = static_cast<double>(i) / (n - 1);
      tp.t_grid.push_back(t);
      tp.u0.push_back(scalar_unitary(shape, phase(2.0 * kPi * t)));
      tp.u1.push_back(scalar_unitary(shape, -Matrix::Identity(1, 1)));
      tp.u2.push_back(scalar_unitary(shape, iu));
    }
    tp.t_grid.front() = 0.0;
    tp.t_grid.back() = 1.0;
    TripleIdentityReport rep = triple_pair_identity(tp);
    CHECK(rep.holds);
    CHECK(rep.tau_start == rep.tau_end);
    CHECK(k_add(k_add(rep.mu01, rep.mu12), rep.mu20).components[0] == 0);
  }
}
