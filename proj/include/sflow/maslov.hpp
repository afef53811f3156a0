#pragma once

#include "sflow/specflow.hpp"

namespace sflow {

// Lagrangian submodule of A^{2n}, represented by the unitary u with
// L(u) = { (v, u v) : v in A^n }.
struct Lagrangian {
  AElement u;

  explicit Lagrangian(AElement u_in);  // checks unitarity per block and theta
};

struct LagrangianPath {
  AlgebraShape shape;
  int rank = 1;  // n
  std::vector<double> t_grid;
  std::vector<AElement> u0;
  std::vector<AElement> u1;

  void validate_structure() const;
  bool closed_in_t() const;
};

struct LagrangianTriplePath {
  AlgebraShape shape;
  int rank = 1;
  std::vector<double> t_grid;
  std::vector<AElement> u0;
  std::vector<AElement> u1;
  std::vector<AElement> u2;
};

// min singular value of (u0 - u1) >= margin, per block and theta.
bool transverse(const Lagrangian& l0, const Lagrangian& l1, double margin);

struct PairUnitary {
  AElement u;  // u0 u1*
  KOneClass loop_class;
};

PairUnitary pair_unitary(const Lagrangian& l0, const Lagrangian& l1,
                         double gap_min = kDefaultGapMin);

// Spectrum in [lo, hi] of the interval operator with boundary conditions
// L(1) at x = 0 and L(u) at x = 1: branches sigma_d * theta_j / 2 + k*pi for
// the eigenphases theta_j of u, with multiplicity.
std::vector<double> interval_spectrum(const Matrix& u, double lo, double hi,
                                      int sigma_d = kFrozenSigns.sigma_d);

struct MaslovParams {
  double gap_min = kDefaultGapMin;
  int refine_max = kDefaultRefineMax;
};

// Maslov index of the pair path: net signed count of interval-operator
// branches of u0(t)* u1(t) crossing zero.
KZeroClass maslov_pair(const LagrangianPath& lp, const MaslovParams& params = {});

// Eigenphase passes of u0* u1 through 1, counterclockwise positive, before
// orientation; at theta = 0 for loop blocks.  Exposed for sign pinning.
std::vector<long long> maslov_pair_raw(const LagrangianPath& lp, const MaslovParams& params = {});

// Triple index: signature class of the pairing form on L0 decomposed along
// L1 (+) L2.  The form is assembled both from the basis decomposition and
// from the closed projection expression; disagreement beyond tol_cross is
// Errc::cross_check_failed, degeneracy is Errc::degenerate_form.
KZeroClass maslov_triple(const Lagrangian& l0, const Lagrangian& l1, const Lagrangian& l2,
                         double margin = kDefaultGapMin, double tol_cross = 1e-8);

struct TripleIdentityReport {
  KZeroClass tau_start;
  KZeroClass tau_end;
  KZeroClass mu01;
  KZeroClass mu12;
  KZeroClass mu20;
  bool holds = false;
};

// tau(1) - tau(0) = 2 (mu(L0,L1) + mu(L1,L2) + mu(L2,L0)), evaluated exactly.
TripleIdentityReport triple_pair_identity(const LagrangianTriplePath& tp,
                                          const MaslovParams& params = {});

}  // namespace sflow
