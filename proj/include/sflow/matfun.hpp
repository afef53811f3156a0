#pragma once

#include <functional>
#include <vector>

#include "sflow/types.hpp"

namespace sflow {

// Eigendecomposition of a hermitian matrix: values ascending, vectors the
// matching unitary of column eigenvectors.  Degenerate clusters are
// re-orthonormalized in index order and phase-fixed, so identical input
// yields identical output.
struct EigDecomp {
  RealVector values;
  Matrix vectors;

  Matrix reconstruct() const {
    return vectors * values.asDiagonal() * vectors.adjoint();
  }
};

// Signed eigenvalue counts of a hermitian matrix at a zero threshold.
struct SpectralSignature {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;
};

double hermiticity_defect(const Matrix& m);

// Throws Errc::not_hermitian if ||M - M*|| exceeds the tolerance
// (scale-relative default when tol < 0).
EigDecomp eig_hermitian(const Matrix& m, double tol = -1.0);

// V f(Lambda) V*; result is hermitian for real-valued f.
Matrix functional_calculus(const Matrix& m, const std::function<double(double)>& f,
                           double tol = -1.0);

// Same spectral substitution with a circle-valued function; result is unitary
// when |f| = 1 on the spectrum.
Matrix unitary_calculus(const Matrix& m, const std::function<Complex(double)>& f,
                        double tol = -1.0);

// 1_{[a,b]}(M).  Throws Errc::boundary_hits_spectrum if a or b lies within
// tol of an eigenvalue.
Matrix spectral_projection(const Matrix& m, double a, double b, double tol = -1.0);

SpectralSignature signature(const Matrix& m, double tol = -1.0);

// Unwrapped phase of det along a sampled path of invertible matrices.
// Each per-step principal-branch increment must stay below kPhaseStepMax
// (Errc::sampling_too_coarse otherwise); samples with smallest singular
// value below gap_min raise Errc::singular_sample.  Reduction order is
// fixed left to right.
double det_phase_accumulation(const std::vector<Matrix>& samples,
                              double gap_min = kDefaultGapMin);

// Winding number of det over a closed loop.  With wrap = true the step from
// the last sample back to the first is included; otherwise first and last
// samples must agree.
long long det_phase_winding(const std::vector<Matrix>& loop, bool wrap,
                            double gap_min = kDefaultGapMin);

// Minimum-cost assignment (rows to columns) of a square cost matrix,
// deterministic with index-order tie-breaking.
std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost);

// perm[i] = index of the column of v_next continuing curve i of v_prev,
// by maximal-overlap assignment on |<v_i, w_j>|^2.
std::vector<int> match_eigenvectors(const Matrix& v_prev, const Matrix& v_next);

}  // namespace sflow
