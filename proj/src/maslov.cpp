#include "sflow/maslov.hpp"

#include <algorithm>
#include <cmath>

namespace sflow {

namespace {

double unitarity_defect(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.cols(), u.cols())).norm();
}

void check_unitary_element(const AElement& u) {
  u.validate();
  for (const auto& blk : u.blocks) {
    for (const Matrix& m : blk) {
      if (unitarity_defect(m) > tol_unitary() * (1.0 + m.norm())) {
        fail(Errc::bad_input, "element is not unitary");
      }
    }
  }
}

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

Matrix unitary_polar(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-6 * (1.0 + svd.singularValues().maxCoeff())) {
    fail(Errc::unresolved_crossing, "unitary interpolation is singular");
  }
  return svd.matrixU() * svd.matrixV().adjoint();
}

struct UnitaryEig {
  Eigen::VectorXcd values;
  Matrix vectors;
};

// Schur of a normal matrix: T diagonal, Schur vectors an orthonormal
// eigenbasis.
UnitaryEig eig_unitary(const Matrix& w) {
  if (unitarity_defect(w) > 1e-7 * (1.0 + w.norm())) {
    fail(Errc::bad_input, "eigenphase tracking needs a unitary matrix");
  }
  Eigen::ComplexSchur<Matrix> schur(w);
  if (schur.info() != Eigen::Success) fail(Errc::bad_input, "schur failed");
  UnitaryEig out{schur.matrixT().diagonal(), schur.matrixU()};
  for (int j = 0; j < out.vectors.cols(); ++j) {
    for (int i = 0; i < out.vectors.rows(); ++i) {
      Complex v = out.vectors(i, j);
      if (std::abs(v) > 1e-8) {
        out.vectors.col(j) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
  return out;
}

struct PhaseTracker {
  std::vector<double> phases;  // unwrapped, one per curve
  Matrix vectors;
};

PhaseTracker seed_tracker(const Matrix& w) {
  UnitaryEig eig = eig_unitary(w);
  PhaseTracker tr;
  tr.vectors = eig.vectors;
  tr.phases.resize(eig.values.size());
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    double a = std::arg(eig.values(j));  // (-pi, pi]
    if (a <= 0) a += 2.0 * kPi;          // seed in (0, 2pi)
    tr.phases[j] = a;
  }
  return tr;
}

// Advances matched eigenphases from tracker state across one unitary step;
// recursive polar-midpoint refinement keeps each phase increment below pi/2.
void advance_tracker(PhaseTracker& tr, const Matrix& w_from, const Matrix& w_to, int depth,
                     int refine_max) {
  UnitaryEig eig = eig_unitary(w_to);
  std::vector<int> perm = match_eigenvectors(tr.vectors, eig.vectors);
  std::vector<double> deltas(tr.phases.size());
  bool fine = true;
  for (std::size_t j = 0; j < tr.phases.size(); ++j) {
    Complex current = std::exp(Complex(0.0, tr.phases[j]));
    deltas[j] = std::arg(eig.values(perm[j]) / current);
    if (!(std::abs(deltas[j]) < kPhaseStepMax)) fine = false;
  }
  if (!fine) {
    if (depth >= refine_max) {
      fail(Errc::unresolved_crossing, "eigenphase step stuck above pi/2");
    }
    Matrix mid = unitary_polar((w_from + w_to) / 2.0);
    advance_tracker(tr, w_from, mid, depth + 1, refine_max);
    advance_tracker(tr, mid, w_to, depth + 1, refine_max);
    return;
  }
  std::vector<double> next(tr.phases.size());
  Matrix vectors_next = eig.vectors;
  for (std::size_t j = 0; j < tr.phases.size(); ++j) {
    next[j] = tr.phases[j] + deltas[j];
    vectors_next.col(static_cast<int>(j)) = eig.vectors.col(perm[j]);
  }
  // keep vector column order aligned with the curve order
  for (std::size_t j = 0; j < tr.phases.size(); ++j) tr.phases[j] = next[j];
  tr.vectors = vectors_next;
}

// det winding of a closed loop of unitaries with adaptive polar-midpoint
// refinement of oversized phase steps.
double unitary_winding_step(const Matrix& a, const Matrix& b, const Complex& det_a,
                            const Complex& det_b, int depth, int refine_max) {
  double delta = std::arg(det_b / det_a);
  if (std::abs(delta) < kPhaseStepMax) return delta;
  if (depth >= refine_max) fail(Errc::sampling_too_coarse, "det phase step stuck above pi/2");
  Matrix mid = unitary_polar((a + b) / 2.0);
  Complex det_m = mid.determinant();
  return unitary_winding_step(a, mid, det_a, det_m, depth + 1, refine_max) +
         unitary_winding_step(mid, b, det_m, det_b, depth + 1, refine_max);
}

long long unitary_loop_winding(const std::vector<Matrix>& loop, bool wrap, int refine_max) {
  double phase = 0.0;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
    phase += unitary_winding_step(loop[i], loop[i + 1], loop[i].determinant(),
                                  loop[i + 1].determinant(), 0, refine_max);
  }
  if (wrap) {
    phase += unitary_winding_step(loop.back(), loop.front(), loop.back().determinant(),
                                  loop.front().determinant(), 0, refine_max);
  }
  double w = phase / (2.0 * kPi);
  long long rounded = std::llround(w);
  if (std::abs(w - static_cast<double>(rounded)) > 1e-6) {
    fail(Errc::sampling_too_coarse, "winding not integral");
  }
  return rounded;
}

long long slice_phase_passes(const std::vector<Matrix>& w_samples, int refine_max) {
  PhaseTracker tr = seed_tracker(w_samples.front());
  std::vector<double> start = tr.phases;
  for (std::size_t i = 0; i + 1 < w_samples.size(); ++i) {
    advance_tracker(tr, w_samples[i], w_samples[i + 1], 0, refine_max);
  }
  long long passes = 0;
  for (std::size_t j = 0; j < tr.phases.size(); ++j) {
    passes += static_cast<long long>(std::floor(tr.phases[j] / (2.0 * kPi))) -
              static_cast<long long>(std::floor(start[j] / (2.0 * kPi)));
  }
  return passes;
}

}  // namespace

Lagrangian::Lagrangian(AElement u_in) : u(std::move(u_in)) { check_unitary_element(u); }

void LagrangianPath::validate_structure() const {
  shape.validate();
  if (t_grid.size() != u0.size() || t_grid.size() != u1.size() || t_grid.size() < 2) {
    fail(Errc::bad_input, "lagrangian path needs matching sample lists");
  }
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    check_unitary_element(u0[i]);
    check_unitary_element(u1[i]);
    if (!(u0[i].shape == shape) || !(u1[i].shape == shape) || u0[i].rank != rank ||
        u1[i].rank != rank) {
      fail(Errc::shape_mismatch, "lagrangian sample shape mismatch");
    }
  }
}

bool LagrangianPath::closed_in_t() const {
  double scale = 1.0 + u0.front().norm();
  return (u0.front() - u0.back()).norm() < 1e-9 * scale &&
         (u1.front() - u1.back()).norm() < 1e-9 * scale;
}

bool transverse(const Lagrangian& l0, const Lagrangian& l1, double margin) {
  l0.u.check_same_shape(l1.u);
  for (int b = 0; b < l0.u.shape.block_count(); ++b) {
    for (int th = 0; th < l0.u.shape.theta_count(b); ++th) {
      if (min_singular_value(l0.u.at(b, th) - l1.u.at(b, th)) < margin) return false;
    }
  }
  return true;
}

PairUnitary pair_unitary(const Lagrangian& l0, const Lagrangian& l1, double gap_min) {
  l0.u.check_same_shape(l1.u);
  PairUnitary out{l0.u, KOneClass::zero(l0.u.shape)};
  std::vector<long long> windings(l0.u.shape.block_count(), 0);
  for (int b = 0; b < l0.u.shape.block_count(); ++b) {
    for (int th = 0; th < l0.u.shape.theta_count(b); ++th) {
      out.u.at(b, th) = l0.u.at(b, th) * l1.u.at(b, th).adjoint();
    }
    if (l0.u.shape.blocks[b].kind == BlockKind::loop) {
      windings[b] = det_phase_winding(out.u.blocks[b], /*wrap=*/true, gap_min);
    }
  }
  out.loop_class = KOneClass(l0.u.shape, std::move(windings));
  return out;
}

std::vector<double> interval_spectrum(const Matrix& u, double lo, double hi, int sigma_d) {
  if (!(lo < hi)) fail(Errc::bad_input, "window must satisfy lo < hi");
  UnitaryEig eig = eig_unitary(u);
  std::vector<double> out;
  for (Eigen::Index j = 0; j < eig.values.size(); ++j) {
    double theta = std::arg(eig.values(j));
    if (theta < 0) theta += 2.0 * kPi;  // [0, 2pi)
    double base = sigma_d * theta / 2.0;
    long long k_lo = static_cast<long long>(std::ceil((lo - base) / kPi - 1e-12));
    long long k_hi = static_cast<long long>(std::floor((hi - base) / kPi + 1e-12));
    for (long long k = k_lo; k <= k_hi; ++k) {
      double lambda = base + static_cast<double>(k) * kPi;
      if (lambda >= lo - 1e-12 && lambda <= hi + 1e-12) out.push_back(lambda);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<long long> maslov_pair_raw(const LagrangianPath& lp, const MaslovParams& params) {
  lp.validate_structure();
  if (!transverse(Lagrangian(lp.u0.front()), Lagrangian(lp.u1.front()), params.gap_min) ||
      !transverse(Lagrangian(lp.u0.back()), Lagrangian(lp.u1.back()), params.gap_min)) {
    fail(Errc::not_transverse, "pair must be transverse at t = 0 and t = 1");
  }
  const bool closed = lp.closed_in_t();
  std::vector<long long> out;
  for (int b = 0; b < lp.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < lp.shape.theta_count(b); ++th) {
      std::vector<Matrix> w;
      w.reserve(lp.t_grid.size());
      for (std::size_t i = 0; i < lp.t_grid.size(); ++i) {
        w.push_back(lp.u0[i].at(b, th).adjoint() * lp.u1[i].at(b, th));
      }
      long long passes = slice_phase_passes(w, params.refine_max);
      if (closed) {
        // Loop identity: passes equal the winding of det(u1 u0*) over t.
        std::vector<Matrix> loop;
        loop.reserve(lp.t_grid.size());
        for (std::size_t i = 0; i < lp.t_grid.size(); ++i) {
          loop.push_back(lp.u1[i].at(b, th) * lp.u0[i].at(b, th).adjoint());
        }
        long long wind = unitary_loop_winding(loop, /*wrap=*/false, params.refine_max);
        if (wind != passes) {
          fail(Errc::cross_check_failed,
               "closed pair: eigenphase passes disagree with det winding");
        }
      }
      if (th == 0) {
        value = passes;
      } else if (passes != value) {
        fail(Errc::theta_inconsistent, "Maslov count varies with theta");
      }
    }
    out.push_back(value);
  }
  return out;
}

KZeroClass maslov_pair(const LagrangianPath& lp, const MaslovParams& params) {
  std::vector<long long> raw = maslov_pair_raw(lp, params);
  KZeroClass out = KZeroClass::zero(lp.shape);
  for (std::size_t b = 0; b < raw.size(); ++b) {
    out.components[b] = kFrozenSigns.sigma_m * raw[b];
  }
  return out;
}

namespace {

Matrix lagrangian_frame(const Matrix& u) {
  const int d = static_cast<int>(u.rows());
  Matrix frame(2 * d, d);
  frame.topRows(d) = Matrix::Identity(d, d);
  frame.bottomRows(d) = u;
  return frame / std::sqrt(2.0);
}

Matrix lagrangian_projection_matrix(const Matrix& u) {
  Matrix b = lagrangian_frame(u);
  return b * b.adjoint();
}

struct TripleForm {
  Matrix h;
  SpectralSignature sig;
};

TripleForm triple_form(const Matrix& u0, const Matrix& u1, const Matrix& u2, double margin,
                       double tol_cross) {
  const int d = static_cast<int>(u0.rows());
  if (min_singular_value(u0 - u1) < margin || min_singular_value(u1 - u2) < margin ||
      min_singular_value(u2 - u0) < margin) {
    fail(Errc::not_transverse, "triple must be pairwise transverse");
  }

  Matrix b0 = lagrangian_frame(u0);
  Matrix b1 = lagrangian_frame(u1);
  Matrix b2 = lagrangian_frame(u2);

  Matrix big_i = Matrix::Zero(2 * d, 2 * d);
  big_i.topLeftCorner(d, d) = Complex(0, 1) * Matrix::Identity(d, d);
  big_i.bottomRightCorner(d, d) = Complex(0, -1) * Matrix::Identity(d, d);

  // Route (a): decompose the basis of L0 along L1 (+) L2 and assemble the
  // Gram table of the pairing (v, w) -> <v_2, I w_1>; the insertion of the
  // symplectic I is what makes the table selfadjoint.
  Matrix basis(2 * d, 2 * d);
  basis.leftCols(d) = b1;
  basis.rightCols(d) = b2;
  Matrix coeff = basis.partialPivLu().solve(b0);
  Matrix v1 = b1 * coeff.topRows(d);
  Matrix v2 = b2 * coeff.bottomRows(d);
  Matrix h_decomp = v2.adjoint() * big_i * v1;

  // Route (b): the closed projection expression restricted to L0.
  Matrix p0 = lagrangian_projection_matrix(u0);
  Matrix p1 = lagrangian_projection_matrix(u1);
  Matrix p2 = lagrangian_projection_matrix(u2);
  Matrix sum_inv = (p1 + p2).partialPivLu().solve(Matrix::Identity(2 * d, 2 * d));
  Matrix m = p0 * sum_inv * p2 * big_i * p1 * sum_inv * p0;
  Matrix h_closed = b0.adjoint() * m * b0;

  if ((h_decomp - h_closed).norm() > tol_cross * (1.0 + h_decomp.norm())) {
    fail(Errc::cross_check_failed, "triple form routes disagree");
  }
  if ((h_decomp - h_decomp.adjoint()).norm() > 1e-9 * (1.0 + h_decomp.norm())) {
    fail(Errc::cross_check_failed, "triple form is not hermitian");
  }

  TripleForm out;
  out.h = (h_decomp + h_decomp.adjoint()) / 2.0;
  out.sig = signature(out.h);
  if (out.sig.n_zero > 0) fail(Errc::degenerate_form, "triple form is singular");
  return out;
}

}  // namespace

KZeroClass maslov_triple(const Lagrangian& l0, const Lagrangian& l1, const Lagrangian& l2,
                         double margin, double tol_cross) {
  l0.u.check_same_shape(l1.u);
  l0.u.check_same_shape(l2.u);
  KZeroClass out = KZeroClass::zero(l0.u.shape);
  for (int b = 0; b < l0.u.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < l0.u.shape.theta_count(b); ++th) {
      TripleForm form =
          triple_form(l0.u.at(b, th), l1.u.at(b, th), l2.u.at(b, th), margin, tol_cross);
      long long sig = form.sig.n_plus - form.sig.n_minus;
      if (th == 0) {
        value = sig;
      } else if (sig != value) {
        fail(Errc::theta_inconsistent, "triple signature varies with theta");
      }
    }
    out.components[b] = value;
  }
  return out;
}

TripleIdentityReport triple_pair_identity(const LagrangianTriplePath& tp,
                                          const MaslovParams& params) {
  auto pair_path = [&](const std::vector<AElement>& a, const std::vector<AElement>& b) {
    LagrangianPath lp;
    lp.shape = tp.shape;
    lp.rank = tp.rank;
    lp.t_grid = tp.t_grid;
    lp.u0 = a;
    lp.u1 = b;
    return lp;
  };

  TripleIdentityReport rep{
      maslov_triple(Lagrangian(tp.u0.front()), Lagrangian(tp.u1.front()),
                    Lagrangian(tp.u2.front()), params.gap_min),
      maslov_triple(Lagrangian(tp.u0.back()), Lagrangian(tp.u1.back()),
                    Lagrangian(tp.u2.back()), params.gap_min),
      maslov_pair(pair_path(tp.u0, tp.u1), params),
      maslov_pair(pair_path(tp.u1, tp.u2), params),
      maslov_pair(pair_path(tp.u2, tp.u0), params),
      false};

  KZeroClass lhs = k_add(rep.tau_end, k_neg(rep.tau_start));
  KZeroClass rhs = k_add(k_add(rep.mu01, rep.mu12), rep.mu20);
  for (auto& c : rhs.components) c *= 2;
  rep.holds = (lhs == rhs);
  return rep;
}

}  // namespace sflow
