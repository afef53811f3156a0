#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "sflow/algebra.hpp"
#include "sflow/matfun.hpp"

namespace sflow {

// Sampled path t in [0,1] of hermitian elements of M_rank(A).
struct HermPath {
  AlgebraShape shape;
  int rank = 1;
  std::vector<double> t_grid;     // strictly increasing, t0 = 0, tM = 1
  std::vector<AElement> samples;  // hermitian, one per grid point

  int sample_count() const { return static_cast<int>(samples.size()); }
  void validate_structure() const;

  static HermPath constant(const AElement& value, int samples);
  static HermPath linear(const AElement& a, const AElement& b, int samples);
};

enum class PathVerdict { valid, refine, invalid };

struct PathValidity {
  double endpoint_gap = 0.0;       // min |eigenvalue| over both endpoints
  double worst_step_motion = 0.0;  // max matched eigenvalue motion per step
  std::vector<double> min_gap_profile;  // per sample, min |eigenvalue|
  PathVerdict verdict = PathVerdict::invalid;
};

const char* verdict_name(PathVerdict v);

// invalid iff an endpoint eigenvalue sits within gap_min of 0; refine iff the
// matched per-step motion exceeds motion_cap (default endpoint_gap / 2).
PathValidity validate_path(const HermPath& p, double gap_min = kDefaultGapMin,
                           double motion_cap = -1.0);

// Applies functional calculus samplewise.  f must be odd, non-decreasing,
// with f(0) = 0 and f'(0) > 0; these are spot-checked on the union of the
// sampled spectra (Errc::not_normalizing on failure).
HermPath normalizing_transform(const HermPath& p, const std::function<double(double)>& f);

// A = 2a 1_{[-a,a]}(D); D + A is invertible with gap >= min(a, dist(spec, -a)).
AElement trivializing_operator(const AElement& d, double a, double tol = -1.0);

// Subdivision of the sample range into segments with per-segment gap levels:
// +-level avoids every sampled eigenvalue in the segment and the count of
// eigenvalues >= -level is constant across the segment (per block and theta).
struct PathSegment {
  int first = 0;  // sample indices, inclusive; consecutive segments share one
  int last = 0;
  double level = 0.0;
};

std::vector<PathSegment> find_segments(const HermPath& p, double gap_min = kDefaultGapMin,
                                       std::optional<std::uint64_t> seed = std::nullopt);

// t-parametrized eigenvalue data used by validation, segment search and the
// crossing route: values[s] holds the sorted spectrum of sample s for one
// (block, theta) slice.
struct SpectralCurves {
  std::vector<RealVector> values;
  std::vector<Matrix> vectors;
};

SpectralCurves block_curves(const HermPath& p, int block, int theta);

// Net signed zero crossings of matched eigenvalue curves along one sampled
// matrix path.  Interior samples with an eigenvalue within tol0 of zero are
// replaced by linearly interpolated neighbors (local bisection), up to
// refine_max halvings per side; Errc::unresolved_crossing when exhausted.
// Endpoints must be clean.
struct SliceCrossingEvent {
  double t = 0.0;
  int direction = 0;  // +1 upward, -1 downward
};

struct SliceCrossings {
  long long net = 0;
  std::vector<SliceCrossingEvent> events;
};

SliceCrossings slice_zero_crossings(const std::vector<double>& t_grid,
                                    const std::vector<Matrix>& samples, double tol0 = -1.0,
                                    int refine_max = kDefaultRefineMax);

}  // namespace sflow
