#pragma once

#include <random>

#include "sflow/oracle.hpp"

namespace sflow::testutil {

using Rng = std::mt19937_64;

inline Matrix random_hermitian(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = Complex(dist(rng), dist(rng));
  }
  return (g + g.adjoint()) / 2.0;
}

inline Matrix random_unitary(Rng& rng, int n) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = Complex(dist(rng), dist(rng));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
  }
  return q;
}

// Hermitian with every |eigenvalue| in [gap, gap + spread].
inline Matrix random_gapped_hermitian(Rng& rng, int n, double gap = 0.4, double spread = 1.2) {
  std::uniform_real_distribution<double> mag(gap, gap + spread);
  std::bernoulli_distribution sign(0.5);
  Matrix v = random_unitary(rng, n);
  RealVector lambda(n);
  for (int i = 0; i < n; ++i) lambda(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  Matrix m = v * lambda.asDiagonal() * v.adjoint();
  return (m + m.adjoint()) / 2.0;
}

// Unitary conjugation loop in theta: spectrum constant, frames rotating.
// The generator is normalized so consecutive samples stay close on the
// coarsest grids in use.
inline std::vector<Matrix> conjugation_loop(Rng& rng, const Matrix& base, int n_theta) {
  Matrix h = random_hermitian(rng, static_cast<int>(base.rows()));
  h *= 1.0 / std::max(1.0, h.norm());
  std::vector<Matrix> out;
  for (int th = 0; th < n_theta; ++th) {
    double s = std::sin(2.0 * kPi * th / n_theta);
    Matrix rot = unitary_calculus(h, [&](double x) { return std::exp(Complex(0, s * x)); });
    Matrix m = rot * base * rot.adjoint();
    out.push_back((m + m.adjoint()) / 2.0);
  }
  return out;
}

// Smooth hermitian loop with no spectral guarantee.
inline std::vector<Matrix> free_hermitian_loop(Rng& rng, int n, int n_theta, double scale) {
  Matrix a = random_hermitian(rng, n, scale);
  Matrix b = random_hermitian(rng, n, scale);
  Matrix c = random_hermitian(rng, n, scale);
  std::vector<Matrix> out;
  for (int th = 0; th < n_theta; ++th) {
    double angle = 2.0 * kPi * th / n_theta;
    out.push_back(a + std::cos(angle) * b + std::sin(angle) * c);
  }
  return out;
}

inline AElement gapped_endpoint(Rng& rng, const AlgebraShape& shape, int rank, double gap = 0.4) {
  AElement out = AElement::zero(shape, rank);
  for (int b = 0; b < shape.block_count(); ++b) {
    const int d = shape.block_matrix_dim(b, rank);
    Matrix base = random_gapped_hermitian(rng, d, gap);
    if (shape.blocks[b].kind == BlockKind::loop) {
      out.blocks[b] = conjugation_loop(rng, base, shape.theta_count(b));
    } else {
      out.at(b, 0) = base;
    }
  }
  return out;
}

inline AElement free_interior(Rng& rng, const AlgebraShape& shape, int rank, double scale) {
  AElement out = AElement::zero(shape, rank);
  for (int b = 0; b < shape.block_count(); ++b) {
    const int d = shape.block_matrix_dim(b, rank);
    if (shape.blocks[b].kind == BlockKind::loop) {
      out.blocks[b] = free_hermitian_loop(rng, d, shape.theta_count(b), scale);
    } else {
      out.at(b, 0) = random_hermitian(rng, d, scale);
    }
  }
  return out;
}

// Valid path: gapped endpoints, a free bump in the middle, resampled until
// the validator accepts.
inline HermPath random_valid_path(Rng& rng, const AlgebraShape& shape, int rank,
                                  int samples = 97, double gap_min = kDefaultGapMin) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    AElement d0 = gapped_endpoint(rng, shape, rank);
    AElement d1 = gapped_endpoint(rng, shape, rank);
    AElement bump = free_interior(rng, shape, rank, 0.35);
    HermPath p;
    p.shape = shape;
    p.rank = rank;
    for (int i = 0; i < samples; ++i) {
      double t = static_cast<double>(i) / (samples - 1);
      p.t_grid.push_back(t);
      p.samples.push_back((1.0 - t) * d0 + t * d1 + std::sin(kPi * t) * bump);
    }
    p.t_grid.front() = 0.0;
    p.t_grid.back() = 1.0;
    if (validate_path(p, gap_min).verdict == PathVerdict::valid) return p;
  }
  throw std::runtime_error("random_valid_path: no valid sample after 64 attempts");
}

// Projection element of given per-block ranks, theta-rotating on loop blocks.
inline AElement random_projection(Rng& rng, const AlgebraShape& shape, int rank,
                                  const std::vector<int>& block_ranks) {
  AElement out = AElement::zero(shape, rank);
  for (int b = 0; b < shape.block_count(); ++b) {
    const int d = shape.block_matrix_dim(b, rank);
    Matrix u0 = random_unitary(rng, d);
    Matrix base = u0.leftCols(block_ranks[b]) * u0.leftCols(block_ranks[b]).adjoint();
    if (shape.blocks[b].kind == BlockKind::loop) {
      out.blocks[b] = conjugation_loop(rng, (base + base.adjoint()) / 2.0, shape.theta_count(b));
    } else {
      out.at(b, 0) = (base + base.adjoint()) / 2.0;
    }
  }
  return out;
}

inline std::vector<int> random_ranks(Rng& rng, const AlgebraShape& shape, int rank) {
  std::vector<int> out;
  for (int b = 0; b < shape.block_count(); ++b) {
    std::uniform_int_distribution<int> pick(0, shape.block_matrix_dim(b, rank));
    out.push_back(pick(rng));
  }
  return out;
}

// Unitary path sample u(t) = exp(i t H) exp(i sin(pi t) K) u0, smooth with
// free endpoints.
struct UnitaryPathGen {
  Matrix h, k, u0;

  static UnitaryPathGen make(Rng& rng, int n, double scale = 1.0) {
    return UnitaryPathGen{random_hermitian(rng, n, scale), random_hermitian(rng, n, scale),
                          random_unitary(rng, n)};
  }

  Matrix at(double t) const {
    Matrix a = unitary_calculus(h, [&](double x) { return std::exp(Complex(0, t * x)); });
    Matrix b =
        unitary_calculus(k, [&](double x) { return std::exp(Complex(0, std::sin(kPi * t) * x)); });
    return a * b * u0;
  }
};

// Graded path over loop blocks with prescribed endpoint winding data:
// W_i(theta) = A_i diag(exp(i m_j theta)) B_i, linear interior with a bump.
struct GradedPathSpec {
  GradedHermPath path;
  KOneClass expected;  // endpoint winding difference
};

inline GradedPathSpec random_graded_path(Rng& rng, const AlgebraShape& shape, int half,
                                         int samples = 65, int max_wind = 2) {
  GradedPathSpec out;
  out.path.half = half;
  out.path.path.shape = shape;
  out.path.path.rank = 2 * half;
  std::vector<long long> expect(shape.block_count(), 0);

  std::uniform_int_distribution<int> wind(-max_wind, max_wind);
  std::vector<std::vector<Matrix>> w0(shape.block_count()), w1(shape.block_count());
  for (int b = 0; b < shape.block_count(); ++b) {
    const int hd = shape.block_matrix_dim(b, half);
    const int n_theta = shape.theta_count(b);
    Matrix a0 = random_unitary(rng, hd), b0 = random_unitary(rng, hd);
    Matrix a1 = random_unitary(rng, hd), b1 = random_unitary(rng, hd);
    std::vector<int> m0(hd), m1(hd);
    long long s0 = 0, s1 = 0;
    for (int j = 0; j < hd; ++j) {
      m0[j] = wind(rng);
      m1[j] = wind(rng);
      s0 += m0[j];
      s1 += m1[j];
    }
    if (shape.blocks[b].kind == BlockKind::loop) expect[b] = s1 - s0;
    for (int th = 0; th < n_theta; ++th) {
      double theta = 2.0 * kPi * th / n_theta;
      Eigen::VectorXcd ph0(hd), ph1(hd);
      for (int j = 0; j < hd; ++j) {
        ph0(j) = std::exp(Complex(0, m0[j] * theta));
        ph1(j) = std::exp(Complex(0, m1[j] * theta));
      }
      w0[b].push_back(a0 * ph0.asDiagonal() * b0);
      w1[b].push_back(a1 * ph1.asDiagonal() * b1);
    }
  }

  std::vector<std::vector<Matrix>> bump(shape.block_count());
  for (int b = 0; b < shape.block_count(); ++b) {
    const int hd = shape.block_matrix_dim(b, half);
    for (int th = 0; th < shape.theta_count(b); ++th) {
      std::normal_distribution<double> dist(0.0, 0.3);
      Matrix g(hd, hd);
      for (int i = 0; i < hd; ++i) {
        for (int j = 0; j < hd; ++j) g(i, j) = Complex(dist(rng), dist(rng));
      }
      bump[b].push_back(g);
    }
  }
  // one smooth loop of general complex bumps
  for (int b = 0; b < shape.block_count(); ++b) {
    const int n_theta = shape.theta_count(b);
    if (n_theta > 1) {
      std::vector<Matrix> smooth(n_theta);
      for (int th = 0; th < n_theta; ++th) {
        double angle = 2.0 * kPi * th / n_theta;
        smooth[th] = bump[b][0] + std::cos(angle) * bump[b][1 % n_theta] +
                     std::sin(angle) * bump[b][2 % n_theta];
      }
      bump[b] = std::move(smooth);
    }
  }

  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / (samples - 1);
    AElement s = AElement::zero(shape, 2 * half);
    for (int b = 0; b < shape.block_count(); ++b) {
      const int hd = shape.block_matrix_dim(b, half);
      for (int th = 0; th < shape.theta_count(b); ++th) {
        Matrix w = (1.0 - t) * w0[b][th] + t * w1[b][th] + (t * (1.0 - t)) * bump[b][th];
        s.at(b, th).topRightCorner(hd, hd) = w.adjoint();
        s.at(b, th).bottomLeftCorner(hd, hd) = w;
      }
    }
    out.path.path.t_grid.push_back(t);
    out.path.path.samples.push_back(std::move(s));
  }
  out.path.path.t_grid.front() = 0.0;
  out.path.path.t_grid.back() = 1.0;
  out.expected = KOneClass(shape, std::move(expect));
  return out;
}

// Random monotone odd function with f(0) = 0, f'(0) > 0.  The linear floor
// and the small cubic keep the slope ratio moderate, so transformed paths
// usually stay within the validator's motion cap.
inline std::function<double(double)> random_normalizing_function(Rng& rng) {
  std::uniform_real_distribution<double> lin(0.3, 1.0);
  std::uniform_real_distribution<double> cub(0.02, 0.2);
  std::uniform_real_distribution<double> sat(0.05, 0.5);
  double a = lin(rng), b = cub(rng), c = sat(rng), d = sat(rng);
  return [a, b, c, d](double x) {
    return a * x + b * x * x * x + c * std::tanh(x) + d * x / std::sqrt(1.0 + x * x);
  };
}

// Truncation of the diagonal family whose entries switch from -1 to +1 on
// windows accumulating at t = 1/2: entry n is clamp(n (t - 1/2) + 1, -1, 1).
// Crossings pile up while the family never clears the validity contract.
inline HermPath divergence_family(int dim, int samples) {
  AlgebraShape shape = AlgebraShape::scalar(dim);
  HermPath p;
  p.shape = shape;
  p.rank = 1;
  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / (samples - 1);
    AElement s = AElement::zero(shape, 1);
    for (int n = 1; n <= dim; ++n) {
      s.at(0, 0)(n - 1, n - 1) = std::clamp(n * (t - 0.5) + 1.0, -1.0, 1.0);
    }
    p.t_grid.push_back(t);
    p.samples.push_back(std::move(s));
  }
  p.t_grid.front() = 0.0;
  p.t_grid.back() = 1.0;
  return p;
}

// Sign flips of the diagonal entries, ignoring validity; the "naive" count.
inline long long naive_crossing_count(const HermPath& p) {
  long long count = 0;
  const int dim = p.shape.block_matrix_dim(0, 1);
  for (int n = 0; n < dim; ++n) {
    double prev = p.samples.front().at(0, 0)(n, n).real();
    for (int i = 1; i < p.sample_count(); ++i) {
      double cur = p.samples[i].at(0, 0)(n, n).real();
      if (prev < -1e-12 && cur > 1e-12) ++count;
      if (prev > 1e-12 && cur < -1e-12) --count;
      if (std::abs(cur) > 1e-12) prev = cur;
    }
  }
  return count;
}

inline AlgebraShape mixed_shape(int scalar_dim = 2, int loop_dim = 1, int theta = 16) {
  AlgebraShape s;
  s.blocks.push_back(BlockSpec{BlockKind::scalar, scalar_dim, 1});
  s.blocks.push_back(BlockSpec{BlockKind::loop, loop_dim, theta});
  return s;
}

}  // namespace sflow::testutil
