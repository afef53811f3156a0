#include "sflow/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sflow {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::not_hermitian: return "NotHermitian";
    case Errc::boundary_hits_spectrum: return "BoundaryHitsSpectrum";
    case Errc::sampling_too_coarse: return "SamplingTooCoarse";
    case Errc::singular_sample: return "SingularSample";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::unsupported_homomorphism: return "UnsupportedHomomorphism";
    case Errc::non_constant_rank: return "NonConstantRank";
    case Errc::not_projection: return "NotProjection";
    case Errc::invalid_path: return "InvalidPath";
    case Errc::no_gap_found: return "NoGapFound";
    case Errc::gap_hits_spectrum: return "GapHitsSpectrum";
    case Errc::endpoint_mismatch: return "EndpointMismatch";
    case Errc::unresolved_crossing: return "UnresolvedCrossing";
    case Errc::theta_inconsistent: return "ThetaInconsistent";
    case Errc::not_normalizing: return "NotNormalizing";
    case Errc::not_transverse: return "NotTransverse";
    case Errc::degenerate_form: return "DegenerateForm";
    case Errc::cross_check_failed: return "CrossCheckFailed";
    case Errc::not_lagrangian: return "NotLagrangian";
    case Errc::not_odd: return "NotOdd";
    case Errc::singular_endpoint: return "SingularEndpoint";
    case Errc::not_almost_involution: return "NotAlmostInvolution";
    case Errc::kernel_rank_jump: return "KernelRankJump";
    case Errc::rank_jump: return "RankJump";
    case Errc::gapless_suspension: return "GaplessSuspension";
    case Errc::scan_too_coarse: return "ScanTooCoarse";
    case Errc::inconsistent_conventions: return "InconsistentConventions";
    case Errc::bad_input: return "BadInput";
  }
  return "UnknownError";
}

double hermiticity_defect(const Matrix& m) { return (m - m.adjoint()).norm(); }

namespace {

void check_finite(const Matrix& m) {
  if (!m.allFinite()) fail(Errc::bad_input, "matrix has non-finite entries");
}

// Gram-Schmidt in index order within each degenerate cluster, then a phase
// fix per column (first entry above threshold made real positive).
void canonicalize_eigenvectors(const RealVector& values, Matrix& vectors, double scale) {
  const int n = static_cast<int>(values.size());
  const double cluster_tol = 1e-9 * (1.0 + scale);
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && values(end) - values(end - 1) <= cluster_tol) ++end;
    for (int j = start; j < end; ++j) {
      for (int k = start; k < j; ++k) {
        Complex c = vectors.col(k).dot(vectors.col(j));
        vectors.col(j) -= c * vectors.col(k);
      }
      double nrm = vectors.col(j).norm();
      if (nrm > 0) vectors.col(j) /= nrm;
    }
    start = end;
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      Complex v = vectors(i, j);
      if (std::abs(v) > 1e-8) {
        vectors.col(j) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }
}

}  // namespace

EigDecomp eig_hermitian(const Matrix& m, double tol) {
  check_finite(m);
  if (m.rows() != m.cols()) fail(Errc::bad_input, "matrix not square");
  const double scale = m.norm();
  if (tol < 0) tol = tol_herm(scale);
  if (hermiticity_defect(m) > tol) {
    fail(Errc::not_hermitian, "hermiticity defect " + std::to_string(hermiticity_defect(m)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver((m + m.adjoint()) / 2.0);
  if (solver.info() != Eigen::Success) fail(Errc::bad_input, "eigensolver failed");
  EigDecomp out{solver.eigenvalues(), solver.eigenvectors()};
  canonicalize_eigenvectors(out.values, out.vectors, scale);
  return out;
}

Matrix functional_calculus(const Matrix& m, const std::function<double(double)>& f,
                           double tol) {
  EigDecomp eig = eig_hermitian(m, tol);
  RealVector mapped(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) mapped(i) = f(eig.values(i));
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

Matrix unitary_calculus(const Matrix& m, const std::function<Complex(double)>& f,
                        double tol) {
  EigDecomp eig = eig_hermitian(m, tol);
  Eigen::VectorXcd mapped(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) mapped(i) = f(eig.values(i));
  return eig.vectors * mapped.asDiagonal() * eig.vectors.adjoint();
}

Matrix spectral_projection(const Matrix& m, double a, double b, double tol) {
  if (!(a < b)) fail(Errc::bad_input, "interval must satisfy a < b");
  EigDecomp eig = eig_hermitian(m);
  const double guard = tol < 0 ? tol_zero(m.norm()) : tol;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (std::abs(eig.values(i) - a) <= guard || std::abs(eig.values(i) - b) <= guard) {
      fail(Errc::boundary_hits_spectrum,
           "eigenvalue " + std::to_string(eig.values(i)) + " within tol of interval boundary");
    }
  }
  RealVector mask(eig.values.size());
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    mask(i) = (eig.values(i) > a && eig.values(i) < b) ? 1.0 : 0.0;
  }
  Matrix out = eig.vectors * mask.asDiagonal() * eig.vectors.adjoint();
  return (out + out.adjoint()) / 2.0;
}

SpectralSignature signature(const Matrix& m, double tol) {
  EigDecomp eig = eig_hermitian(m);
  const double guard = tol < 0 ? tol_zero(m.norm()) : tol;
  SpectralSignature sig;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i) > guard) {
      ++sig.n_plus;
    } else if (eig.values(i) < -guard) {
      ++sig.n_minus;
    } else {
      ++sig.n_zero;
    }
  }
  return sig;
}

namespace {

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

double principal_phase_step(const Matrix& a, const Matrix& b, double gap_min) {
  if (min_singular_value(b) < gap_min) {
    fail(Errc::singular_sample, "sample has smallest singular value below gap_min");
  }
  Complex da = a.determinant();
  Complex db = b.determinant();
  double step = std::arg(db / da);
  if (!(std::abs(step) < kPhaseStepMax)) {
    fail(Errc::sampling_too_coarse,
         "determinant phase step " + std::to_string(step) + " exceeds pi/2");
  }
  return step;
}

}  // namespace

double det_phase_accumulation(const std::vector<Matrix>& samples, double gap_min) {
  if (samples.empty()) fail(Errc::bad_input, "empty sample list");
  if (min_singular_value(samples.front()) < gap_min) {
    fail(Errc::singular_sample, "sample has smallest singular value below gap_min");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    total += principal_phase_step(samples[i], samples[i + 1], gap_min);
  }
  return total;
}

long long det_phase_winding(const std::vector<Matrix>& loop, bool wrap, double gap_min) {
  double total = det_phase_accumulation(loop, gap_min);
  if (wrap) {
    total += principal_phase_step(loop.back(), loop.front(), gap_min);
  } else if ((loop.front() - loop.back()).norm() > 1e-8 * (1.0 + loop.front().norm())) {
    fail(Errc::bad_input, "loop endpoints differ; pass wrap = true for wrapped grids");
  }
  double w = total / (2.0 * kPi);
  long long rounded = std::llround(w);
  if (std::abs(w - static_cast<double>(rounded)) > 1e-6) {
    fail(Errc::sampling_too_coarse,
         "winding " + std::to_string(w) + " not integral; loop sampling inconsistent");
  }
  return rounded;
}

// Hungarian algorithm with potentials (shortest augmenting paths); ties
// resolved by scanning order so the result is deterministic.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) fail(Errc::bad_input, "assignment needs a square cost matrix");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

std::vector<int> match_eigenvectors(const Matrix& v_prev, const Matrix& v_next) {
  const int n = static_cast<int>(v_prev.cols());
  Eigen::MatrixXd cost(n, n);
  Matrix overlap = v_prev.adjoint() * v_next;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = -std::norm(overlap(i, j));
  }
  return min_cost_assignment(cost);
}

}  // namespace sflow
