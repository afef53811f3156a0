#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sflow/oppath.hpp"

namespace sflow {

// Pair of projections over the same shape and rank.  Construction verifies
// the projection property (eigenvalues snap to {0,1}; anything in (0.1, 0.9)
// is rejected) and, for loop blocks, theta-constant rank.
struct ProjectionPair {
  AElement p;
  AElement q;

  ProjectionPair(AElement p_in, AElement q_in);
};

// Per-block rank of a projection; Errc::not_projection / non_constant_rank
// on malformed input.
std::vector<int> projection_ranks(const AElement& p);

// ind(P,Q) as the Fredholm index of QP: Ran P -> Ran Q, per block.
KZeroClass rel_index_fredholm(const ProjectionPair& pp);

// ind(P,Q) as minus the spectral flow of the straight line from 2P-1 to 2Q-1
// (crossing count route).
KZeroClass rel_index_crossing(const ProjectionPair& pp, int line_samples = 65);

struct AxiomFailure {
  std::string axiom;
  std::uint64_t seed = 0;
  std::string detail;
};

struct AxiomReport {
  int trials = 0;
  std::vector<AxiomFailure> failures;
  bool passed() const { return failures.empty(); }
};

// Randomized verification of additivity, stabilization, normalization,
// functoriality under pushforward, antisymmetry and conjugation invariance.
AxiomReport rel_index_axiom_suite(const AlgebraShape& shape, int rank, int trials,
                                  std::uint64_t seed = 1);

}  // namespace sflow
