#pragma once

#include <optional>
#include <string>

#include "sflow/relindex.hpp"
#include "sflow/signs.hpp"

namespace sflow {

struct FlowParams {
  double gap_min = kDefaultGapMin;
  int refine_max = kDefaultRefineMax;
  std::optional<std::uint64_t> segment_seed;  // randomized segmentation (sections route)
};

struct CrossingEvent {
  int block = 0;
  int theta = 0;
  double t = 0.0;
  int direction = 0;
};

struct JunctionTerm {
  int sample = 0;  // junction sample index; -1 / -2 mark the endpoint terms
  double level_before = 0.0;
  double level_after = 0.0;
  std::vector<long long> index_per_block;
};

struct FlowDiagnostics {
  std::string route;
  std::vector<PathSegment> segments;
  std::vector<JunctionTerm> junctions;
  std::vector<CrossingEvent> crossings;
  std::vector<double> winding_phase;  // per block, accumulated det phase at theta = 0
  std::vector<SpectralSignature> endpoint_signature_start;  // per block, theta = 0
  std::vector<SpectralSignature> endpoint_signature_end;
};

struct FlowResult {
  KZeroClass value;
  FlowDiagnostics diagnostics;
};

// The three flow routes.  They compute the same K0 class by construction
// independent machinery; the winding route is the reference definition and
// the public default.
FlowResult spectral_flow_sections(const HermPath& p, const FlowParams& params = {});
FlowResult spectral_flow_winding(const HermPath& p, const FlowParams& params = {});
FlowResult spectral_flow_crossings(const HermPath& p, const FlowParams& params = {});
inline FlowResult spectral_flow(const HermPath& p, const FlowParams& params = {}) {
  return spectral_flow_winding(p, params);
}

// Winding of det U(chi(D_t)) per block at theta = 0, before orientation.
// Exposed for the sign-pinning fixtures.
std::vector<long long> winding_route_raw(const HermPath& p, const FlowParams& params = {});

// Flow of a loop (D_0 = D_1 exactly, endpoints may be singular) against the
// trivializing operator at gap level a; level chosen with maximal clearance
// when not supplied.  Independent of the choice of level.
FlowResult loop_spectral_flow(const HermPath& p, std::optional<double> level = std::nullopt,
                              const FlowParams& params = {});

HermPath concatenate(const HermPath& p, const HermPath& q);
HermPath reverse(const HermPath& p);
HermPath direct_sum(const HermPath& p, const HermPath& q);

}  // namespace sflow
