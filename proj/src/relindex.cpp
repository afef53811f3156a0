#include "sflow/relindex.hpp"

#include <random>

namespace sflow {

namespace {

int matrix_projection_rank(const Matrix& p) {
  if ((p - p.adjoint()).norm() > tol_herm(p.norm())) {
    fail(Errc::not_projection, "projection is not hermitian");
  }
  EigDecomp eig = eig_hermitian(p);
  int rank = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    double v = eig.values(i);
    if (v > 0.1 && v < 0.9) {
      fail(Errc::not_projection, "eigenvalue " + std::to_string(v) + " cannot be snapped to {0,1}");
    }
    if (v >= 0.9) ++rank;
  }
  return rank;
}

}  // namespace

std::vector<int> projection_ranks(const AElement& p) {
  if ((p * p - p).norm() > 100.0 * tol_herm(p.norm())) {
    fail(Errc::not_projection, "||P^2 - P|| too large");
  }
  std::vector<int> ranks;
  for (int b = 0; b < p.shape.block_count(); ++b) {
    int rank = matrix_projection_rank(p.at(b, 0));
    for (int th = 1; th < p.shape.theta_count(b); ++th) {
      if (matrix_projection_rank(p.at(b, th)) != rank) {
        fail(Errc::non_constant_rank, "loop-block projection rank varies with theta");
      }
    }
    ranks.push_back(rank);
  }
  return ranks;
}

ProjectionPair::ProjectionPair(AElement p_in, AElement q_in)
    : p(std::move(p_in)), q(std::move(q_in)) {
  p.check_same_shape(q);
  p.validate();
  q.validate();
  projection_ranks(p);
  projection_ranks(q);
}

KZeroClass rel_index_fredholm(const ProjectionPair& pp) {
  // Index of QP: Ran P -> Ran Q.  At finite rank this is the rank
  // difference, with theta-constancy enforced by projection_ranks.
  std::vector<int> rp = projection_ranks(pp.p);
  std::vector<int> rq = projection_ranks(pp.q);
  KZeroClass out = KZeroClass::zero(pp.p.shape);
  for (std::size_t b = 0; b < rp.size(); ++b) {
    out.components[b] = static_cast<long long>(rp[b]) - static_cast<long long>(rq[b]);
  }
  return out;
}

KZeroClass rel_index_crossing(const ProjectionPair& pp, int line_samples) {
  const AElement f0 = 2.0 * pp.p - AElement::identity(pp.p.shape, pp.p.rank);
  const AElement f1 = 2.0 * pp.q - AElement::identity(pp.p.shape, pp.p.rank);
  KZeroClass out = KZeroClass::zero(pp.p.shape);
  std::vector<double> t_grid(line_samples);
  for (int i = 0; i < line_samples; ++i) t_grid[i] = static_cast<double>(i) / (line_samples - 1);

  for (int b = 0; b < pp.p.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < pp.p.shape.theta_count(b); ++th) {
      std::vector<Matrix> line(line_samples);
      for (int i = 0; i < line_samples; ++i) {
        line[i] = (1.0 - t_grid[i]) * f0.at(b, th) + t_grid[i] * f1.at(b, th);
      }
      long long net = -slice_zero_crossings(t_grid, line).net;
      if (th == 0) {
        value = net;
      } else if (net != value) {
        fail(Errc::theta_inconsistent, "crossing index varies with theta");
      }
    }
    out.components[b] = value;
  }
  return out;
}

namespace {

Matrix random_unitary(std::mt19937_64& rng, int n) {
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

// Rank-r projection with a smooth theta dependence on loop blocks.
AElement random_projection(std::mt19937_64& rng, const AlgebraShape& shape, int rank,
                           const std::vector<int>& block_ranks) {
  AElement out = AElement::zero(shape, rank);
  for (int b = 0; b < shape.block_count(); ++b) {
    const int d = shape.block_matrix_dim(b, rank);
    const int r = block_ranks[b];
    Matrix u0 = random_unitary(rng, d);
    Matrix h = Matrix::Zero(d, d);
    {
      std::normal_distribution<double> dist(0.0, 1.0);
      Matrix g(d, d);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) g(i, j) = Complex(dist(rng), dist(rng));
      }
      h = (g + g.adjoint()) / 2.0;
    }
    const int n_th = shape.theta_count(b);
    for (int th = 0; th < n_th; ++th) {
      double angle = 2.0 * kPi * th / n_th;
      double s = std::sin(angle);
      // unitary rotation varying smoothly over theta, periodic by construction
      Matrix rot = unitary_calculus(h, [&](double x) { return std::exp(Complex(0, s * x)); });
      Matrix frame = rot * u0;
      Matrix p = frame.leftCols(r) * frame.leftCols(r).adjoint();
      out.at(b, th) = (p + p.adjoint()) / 2.0;
    }
  }
  return out;
}

}  // namespace

AxiomReport rel_index_axiom_suite(const AlgebraShape& shape, int rank, int trials,
                                  std::uint64_t seed) {
  shape.validate();
  AxiomReport report;
  report.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(trial);
    std::mt19937_64 rng(trial_seed);
    auto note = [&](const std::string& axiom, const std::string& detail) {
      report.failures.push_back(AxiomFailure{axiom, trial_seed, detail});
    };

    std::vector<int> rp, rq, rr;
    for (int b = 0; b < shape.block_count(); ++b) {
      const int d = shape.block_matrix_dim(b, rank);
      std::uniform_int_distribution<int> pick(0, d);
      rp.push_back(pick(rng));
      rq.push_back(pick(rng));
      rr.push_back(pick(rng));
    }
    AElement p = random_projection(rng, shape, rank, rp);
    AElement q = random_projection(rng, shape, rank, rq);
    AElement r = random_projection(rng, shape, rank, rr);

    KZeroClass ind_pq = rel_index_fredholm(ProjectionPair(p, q));
    KZeroClass ind_qr = rel_index_fredholm(ProjectionPair(q, r));
    KZeroClass ind_pr = rel_index_fredholm(ProjectionPair(p, r));
    if (!(k_add(ind_pq, ind_qr) == ind_pr)) note("additivity", "ind(P,R) != ind(P,Q) + ind(Q,R)");

    KZeroClass ind_qp = rel_index_fredholm(ProjectionPair(q, p));
    if (!(k_neg(ind_pq) == ind_qp)) note("antisymmetry", "ind(P,Q) != -ind(Q,P)");

    // Both constructions agree (uniqueness).
    if (!(rel_index_crossing(ProjectionPair(p, q)) == ind_pq)) {
      note("uniqueness", "crossing construction disagrees with Fredholm construction");
    }

    // Stabilization inside a doubled module: P (+) R vs Q (+) R.
    {
      AElement p2 = AElement::zero(shape, 2 * rank);
      AElement q2 = AElement::zero(shape, 2 * rank);
      for (int b = 0; b < shape.block_count(); ++b) {
        const int d = shape.block_matrix_dim(b, rank);
        for (int th = 0; th < shape.theta_count(b); ++th) {
          p2.at(b, th).topLeftCorner(d, d) = p.at(b, th);
          p2.at(b, th).bottomRightCorner(d, d) = r.at(b, th);
          q2.at(b, th).topLeftCorner(d, d) = q.at(b, th);
          q2.at(b, th).bottomRightCorner(d, d) = r.at(b, th);
        }
      }
      if (!(rel_index_fredholm(ProjectionPair(p2, q2)).components == ind_pq.components)) {
        note("stabilization", "ind(P+R, Q+R) != ind(P,Q) for orthogonal R");
      }
    }

    // Normalization: ind(P + Q, Q) = [P] for orthogonal compact P.
    {
      AElement psum = AElement::zero(shape, 2 * rank);
      AElement qbig = AElement::zero(shape, 2 * rank);
      for (int b = 0; b < shape.block_count(); ++b) {
        const int d = shape.block_matrix_dim(b, rank);
        for (int th = 0; th < shape.theta_count(b); ++th) {
          psum.at(b, th).topLeftCorner(d, d) = p.at(b, th);
          psum.at(b, th).bottomRightCorner(d, d) = q.at(b, th);
          qbig.at(b, th).bottomRightCorner(d, d) = q.at(b, th);
        }
      }
      KZeroClass got = rel_index_fredholm(ProjectionPair(psum, qbig));
      bool ok = true;
      for (int b = 0; b < shape.block_count(); ++b) {
        if (got.components[b] != rp[b]) ok = false;
      }
      if (!ok) note("normalization", "ind(P+Q, Q) != [P]");
    }

    // Conjugation invariance under a random unitary.
    {
      AElement u = AElement::zero(shape, rank);
      for (int b = 0; b < shape.block_count(); ++b) {
        const int d = shape.block_matrix_dim(b, rank);
        Matrix fixed = random_unitary(rng, d);
        for (int th = 0; th < shape.theta_count(b); ++th) u.at(b, th) = fixed;
      }
      AElement pu = u * p * u.adjoint();
      AElement qu = u * q * u.adjoint();
      if (!(rel_index_fredholm(ProjectionPair(pu, qu)) == ind_pq)) {
        note("conjugation", "ind(UPU*, UQU*) != ind(P,Q)");
      }
    }

    // Functoriality under a block permutation (and loop evaluation if present).
    {
      std::vector<int> perm(shape.block_count());
      for (int b = 0; b < shape.block_count(); ++b) perm[b] = shape.block_count() - 1 - b;
      bool uniform = true;
      for (int b = 0; b < shape.block_count(); ++b) {
        if (!(shape.blocks[b] == shape.blocks[shape.block_count() - 1 - b])) uniform = false;
      }
      if (uniform) {
        Homomorphism hom = Homomorphism::permute(shape, perm);
        KZeroClass pushed = pushforward(ind_pq, hom);
        KZeroClass direct = rel_index_fredholm(ProjectionPair(apply(hom, p), apply(hom, q)));
        if (!(pushed == direct)) note("functoriality", "pushforward does not commute with ind");
      }
      for (int b = 0; b < shape.block_count(); ++b) {
        if (shape.blocks[b].kind != BlockKind::loop) continue;
        Homomorphism ev = Homomorphism::evaluate(shape, b, shape.blocks[b].theta_samples / 3);
        KZeroClass pushed = pushforward(ind_pq, ev);
        KZeroClass direct = rel_index_fredholm(ProjectionPair(apply(ev, p), apply(ev, q)));
        if (!(pushed == direct)) note("functoriality", "evaluation does not commute with ind");
        break;
      }
    }
  }
  return report;
}

}  // namespace sflow
