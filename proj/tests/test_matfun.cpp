#include <doctest.h>

#include "testutil.hpp"

using namespace sflow;
using namespace sflow::testutil;

namespace {

Matrix diag2(Complex a, Complex b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("eig_hermitian on the identity and diagonal input") {
  EigDecomp eig = eig_hermitian(Matrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) CHECK(eig.values(i) == doctest::Approx(1.0));

  EigDecomp d = eig_hermitian(diag2(-1.0, 2.0));
  CHECK(d.values(0) == doctest::Approx(-1.0));
  CHECK(d.values(1) == doctest::Approx(2.0));
}

TEST_CASE("eig_hermitian reconstruction residual on random hermitian input") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix m = random_hermitian(rng, 6);
    EigDecomp eig = eig_hermitian(m);
    CHECK((m - eig.reconstruct()).norm() < 1e-10);
    CHECK((eig.vectors.adjoint() * eig.vectors - Matrix::Identity(6, 6)).norm() < 1e-12);
    for (int i = 0; i + 1 < 6; ++i) CHECK(eig.values(i) <= eig.values(i + 1));
  }
}

TEST_CASE("eig_hermitian is deterministic, also on degenerate spectra") {
  Rng rng(7);
  Matrix v = random_unitary(rng, 4);
  RealVector lambda(4);
  lambda << -1.0, 0.5, 0.5, 0.5;  // triple degeneracy
  Matrix m = v * lambda.asDiagonal() * v.adjoint();
  m = (m + m.adjoint()) / 2.0;
  EigDecomp a = eig_hermitian(m);
  EigDecomp b = eig_hermitian(m);
  CHECK((a.vectors - b.vectors).norm() == 0.0);
  CHECK((a.values - b.values).norm() == 0.0);
  CHECK((m - a.reconstruct()).norm() < 1e-10);
}

TEST_CASE("eig_hermitian rejects non-hermitian input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eig_hermitian(m), Error);
}

TEST_CASE("idempotence of decompose-reconstruct") {
  Rng rng(33);
  Matrix m = random_hermitian(rng, 5);
  Matrix once = eig_hermitian(m).reconstruct();
  Matrix twice = eig_hermitian(once).reconstruct();
  CHECK((once - twice).norm() < 1e-9 * (1.0 + m.norm()));
}

TEST_CASE("functional_calculus basics") {
  Rng rng(5);
  Matrix m = random_hermitian(rng, 4);
  CHECK((functional_calculus(m, [](double x) { return x; }) - m).norm() < 1e-12);

  // bounded transform on diag(0, 3)
  Matrix d = diag2(0.0, 3.0);
  Matrix bt = functional_calculus(d, [](double x) { return x / std::sqrt(1.0 + x * x); });
  CHECK(bt(0, 0).real() == doctest::Approx(0.0));
  CHECK(bt(1, 1).real() == doctest::Approx(3.0 / std::sqrt(10.0)));

  // indicator of [0, inf) on diag(-2, 5)
  Matrix ind = functional_calculus(diag2(-2.0, 5.0), [](double x) { return x >= 0 ? 1.0 : 0.0; });
  CHECK((ind - diag2(0.0, 1.0)).norm() < 1e-12);
}

TEST_CASE("functional_calculus composes for monotone maps") {
  Rng rng(17);
  auto f = [](double x) { return std::tanh(x); };
  auto g = [](double x) { return x * x * x + 0.5 * x; };
  for (int trial = 0; trial < 10; ++trial) {
    Matrix m = random_hermitian(rng, 5);
    Matrix lhs = functional_calculus(m, [&](double x) { return f(g(x)); });
    Matrix rhs = functional_calculus(functional_calculus(m, g), f);
    CHECK((lhs - rhs).norm() < 1e-9 * (1.0 + m.norm()));
  }
}

TEST_CASE("spectral_projection") {
  Matrix m = diag2(-1.0, 1.0);
  CHECK((spectral_projection(m, 0.0, 2.0) - diag2(0.0, 1.0)).norm() < 1e-12);
  CHECK((spectral_projection(m, -2.0, 2.0) - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK_THROWS_AS(spectral_projection(m, 1.0, 2.0), Error);  // boundary on an eigenvalue

  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix h = random_hermitian(rng, 6);
    EigDecomp eig = eig_hermitian(h);
    // pick a window between two eigenvalues
    double a = (eig.values(1) + eig.values(2)) / 2.0;
    double b = (eig.values(4) + eig.values(5)) / 2.0;
    if (std::abs(eig.values(2) - a) < 1e-6 || std::abs(eig.values(4) - b) < 1e-6) continue;
    Matrix p = spectral_projection(h, a, b);
    CHECK((p * p - p).norm() < 1e-10);
    CHECK((p * h - h * p).norm() < 1e-9);
    int count = 0;
    for (int i = 0; i < 6; ++i) {
      if (eig.values(i) > a && eig.values(i) < b) ++count;
    }
    CHECK(std::llround(p.trace().real()) == count);
  }
}

TEST_CASE("signature") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  m(2, 2) = -1.0;
  SpectralSignature s = signature(m);
  CHECK(s.n_plus == 1);
  CHECK(s.n_minus == 2);
  CHECK(s.n_zero == 0);

  SpectralSignature z = signature(Matrix::Zero(2, 2));
  CHECK(z.n_zero == 2);

  Rng rng(29);
  Matrix g = random_gapped_hermitian(rng, 5);
  CHECK(signature(g).n_zero == 0);
  EigDecomp eig = eig_hermitian(g);
  int minus = 0;
  for (int i = 0; i < 5; ++i) minus += eig.values(i) < 0 ? 1 : 0;
  CHECK(signature(g).n_minus == minus);
}

TEST_CASE("det_phase_winding on loops") {
  auto scalar_loop = [](int samples, int wind) {
    std::vector<Matrix> loop;
    for (int i = 0; i < samples; ++i) {
      Matrix m(1, 1);
      m(0, 0) = std::exp(Complex(0, 2.0 * kPi * wind * i / samples));
      loop.push_back(m);
    }
    return loop;
  };

  std::vector<Matrix> constant(8, Matrix::Identity(2, 2));
  CHECK(det_phase_winding(constant, true) == 0);
  CHECK(det_phase_winding(scalar_loop(16, 1), true) == 1);

  // diag(e^{i theta}, e^{-2 i theta}) at high sampling
  std::vector<Matrix> mixed;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    double theta = 2.0 * kPi * i / n;
    mixed.push_back(diag2(std::exp(Complex(0, theta)), std::exp(Complex(0, -2.0 * theta))));
  }
  CHECK(det_phase_winding(mixed, true) == -1);
}

TEST_CASE("det_phase_winding additivity and reversal") {
  Rng rng(41);
  const int n = 48;
  std::vector<Matrix> a, b, sum, rev;
  Matrix ua = random_unitary(rng, 2), ub = random_unitary(rng, 2);
  for (int i = 0; i < n; ++i) {
    double theta = 2.0 * kPi * i / n;
    Matrix ma = ua * diag2(std::exp(Complex(0, theta)), std::exp(Complex(0, 2.0 * theta)));
    Matrix mb = ub * diag2(std::exp(Complex(0, -theta)), 1.0);
    a.push_back(ma);
    b.push_back(mb);
    Matrix s = Matrix::Zero(4, 4);
    s.topLeftCorner(2, 2) = ma;
    s.bottomRightCorner(2, 2) = mb;
    sum.push_back(s);
  }
  for (int i = n; i-- > 0;) rev.push_back(a[i]);
  long long wa = det_phase_winding(a, true);
  long long wb = det_phase_winding(b, true);
  CHECK(det_phase_winding(sum, true) == wa + wb);
  CHECK(det_phase_winding(rev, true) == -wa);
}

TEST_CASE("det_phase refusals") {
  // 3 samples of a winding-one loop step by 2pi/3 >= pi/2
  std::vector<Matrix> coarse;
  for (int i = 0; i < 3; ++i) {
    Matrix m(1, 1);
    m(0, 0) = std::exp(Complex(0, 2.0 * kPi * i / 3));
    coarse.push_back(m);
  }
  CHECK_THROWS_AS(det_phase_winding(coarse, true), Error);

  std::vector<Matrix> singular(4, Matrix::Zero(1, 1));
  CHECK_THROWS_AS(det_phase_accumulation(singular), Error);
}

TEST_CASE("open-path phase accumulation") {
  const int n = 32;
  std::vector<Matrix> arc;
  for (int i = 0; i < n; ++i) {
    Matrix m(1, 1);
    m(0, 0) = std::exp(Complex(0, kPi * i / (n - 1)));  // half turn
    arc.push_back(m);
  }
  CHECK(det_phase_accumulation(arc) == doctest::Approx(kPi));
}

TEST_CASE("assignment matching is an optimal permutation") {
  Rng rng(59);
  Matrix v = random_unitary(rng, 5);
  // a permuted copy of the same frame must be matched exactly
  std::vector<int> perm{3, 0, 4, 1, 2};
  Matrix w(5, 5);
  for (int j = 0; j < 5; ++j) w.col(perm[j]) = v.col(j);
  std::vector<int> got = match_eigenvectors(v, w);
  for (int j = 0; j < 5; ++j) CHECK(got[j] == perm[j]);
}
