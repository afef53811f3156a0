#pragma once

#include "sflow/oddflow.hpp"

namespace sflow {

// Shooting-matrix scanner for the interval operator.  Builds
// M(lambda) = Bperp(u1)* exp(-lambda I) B(u0) from the frame
// B(u) = (1/sqrt 2) [1; u] and the exact propagator of I d/dx, and locates
// the zeros of the smallest singular value.  Never diagonalizes u0 or u1.
struct ShootingConfig {
  double lo = -4.0;
  double hi = 4.0;
  int resolution = 0;       // 0: derived from the window and matrix size
  double dip_tol = 1e-6;    // singular-value threshold separating dips
  int bisect_depth = 80;    // refinement iterations per dip
};

std::vector<double> shooting_spectrum(const Matrix& u0, const Matrix& u1,
                                      const ShootingConfig& cfg = {});

// Net signed zero crossings of the shooting dips along a pair of sampled
// unitary paths, dips matched by proximity between consecutive t samples.
long long shooting_crossing_count(const std::vector<Matrix>& u0_path,
                                  const std::vector<Matrix>& u1_path,
                                  double window = 2.0, const ShootingConfig& cfg = {});

// Runs the canonical fixtures and derives the orientation record; throws
// Errc::inconsistent_conventions if no single assignment satisfies all of
// them.  Deterministic.
SignRecord pin_sign_constants();

// Brute-force reference flow: oversampled grid, sign counting only, no
// eigenvector matching.  Test-time oracle.
KZeroClass dense_crossing_oracle(const HermPath& p, int oversample = 8,
                                 double gap_min = kDefaultGapMin);

}  // namespace sflow
