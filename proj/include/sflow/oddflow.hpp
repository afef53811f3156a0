#pragma once

#include "sflow/maslov.hpp"

namespace sflow {

// Path of odd hermitian elements with respect to the grading
// sigma = diag(1, -1) splitting the rank 2k module into A^k (+) A^k.
// Samples have the block form [[0, W*], [W, 0]].
struct GradedHermPath {
  HermPath path;
  int half = 1;  // k

  void validate_structure(double tol = -1.0) const;  // Errc::not_odd on grading defect
  Matrix w_block(int sample, int block, int theta) const;  // lower-left block
};

// Projection P with 2P - 1 odd, hence P = (1/2) [[1, u*], [u, 1]].
struct LagrangianProjection {
  AElement p;
  AElement u;  // derived
  int half = 1;

  explicit LagrangianProjection(AElement p_in);
};

LagrangianProjection lagrangian_projection_from_unitary(const AElement& u);

// Difference class [U(P - R, Q - R)] with R = 0: per loop block the winding
// of det(u_P u_Q*) over theta; scalar blocks are 0.
KOneClass odd_rel_index(const LagrangianProjection& p, const LagrangianProjection& q,
                        double gap_min = kDefaultGapMin);

// Endpoint winding difference of the off-diagonal block: per loop block
// wind det W(1) - wind det W(0).
KOneClass odd_spectral_flow(const GradedHermPath& g, double gap_min = kDefaultGapMin);

struct SuspendEvenOddReport {
  KZeroClass flow;                         // spectral flow of the input path
  std::vector<long long> boundary_winding; // per block, det winding around [0,1]^2
  bool consistent = false;
};

// Winding of det(D_t - i cos(pi x)) around the boundary of the (t,x) square,
// counterclockwise; sigma_s * winding must reproduce the spectral flow
// (Errc::cross_check_failed otherwise).  Scalar blocks only.
SuspendEvenOddReport suspend_even_to_odd(const HermPath& p, int x_samples = 33,
                                         const FlowParams& params = {});

// Per block, the ccw boundary winding before orientation; pinning fixture
// access.
std::vector<long long> suspension_boundary_winding_raw(const HermPath& p, int x_samples = 33,
                                                       const FlowParams& params = {});

struct SuspendOddEvenReport {
  KOneClass odd_flow;
  std::vector<long long> chern_start;  // per block
  std::vector<long long> chern_end;
  bool consistent = false;
};

// Discrete Chern numbers of the negative spectral projection families of
// D_i + sigma cos(pi x) over the boundary-trivialized cylinder;
// sigma_c * (C_0 - C_1) must reproduce the odd flow.
SuspendOddEvenReport suspend_odd_to_even(const GradedHermPath& g, int x_samples = 64,
                                         int grid_cap = 512,
                                         const FlowParams& params = {});

// Per block, (C_start, C_end) before orientation; pinning fixture access.
std::vector<std::pair<long long, long long>> suspension_chern_raw(const GradedHermPath& g,
                                                                  int x_samples = 64,
                                                                  int grid_cap = 512,
                                                                  double gap_min = kDefaultGapMin);

// Projection family on a theta x row grid with supplied boundary frames
// fixing the gauge on the first and last rows.
struct ProjectionCylinder {
  std::vector<std::vector<Matrix>> p;  // [row][theta]
  std::vector<Matrix> frame_bottom;    // [theta], columns span Ran p[0][theta]
  std::vector<Matrix> frame_top;       // [theta], columns span Ran p[last][theta]
};

// Discrete field-strength Chern number: link variables are determinants of
// frame overlaps, plaquette curvature the principal phase of the plaquette
// product, traversed theta-then-row counterclockwise.  Exact once every
// plaquette phase is below pi/2 (Errc::sampling_too_coarse otherwise).
long long bott_beta_cylinder(const ProjectionCylinder& pc);

// Suspension family [[0, cos - i sin F], [cos + i sin F, 0]] of an almost
// involution (||F^2 - 1|| <= 0.1) over the closed t circle.
GradedHermPath suspend_bounded(const AElement& f, int t_samples = 65);

struct SuspendBoundedReport {
  KOneClass chern_class;    // cylinder Chern evaluation of the suspension
  KOneClass winding_class;  // winding of det exp(i pi (F + 1)) over theta
  bool consistent = false;
};

SuspendBoundedReport suspend_bounded_check(const AElement& f, int t_samples = 64,
                                           int grid_cap = 512);

struct SplittingReport {
  KOneClass odd_index;
  KOneClass maslov_class;
  bool holds = false;
};

// Kernel-Lagrangian splitting correction: for an odd loop-block element d_n
// with theta-constant kernel rank 2m and Lagrangians L_i in the kernel given
// by m x m unitary loops u_i (in the deterministic internal kernel frames),
// odd_rel_index(P_0, P_1) with P_i = 1_{>0}(d_n) + P_{L_i} equals the loop
// Maslov class of (L_0, L_1).
SplittingReport splitting_correction_check(const AElement& d_n,
                                           const std::vector<Matrix>& u0_kernel,
                                           const std::vector<Matrix>& u1_kernel,
                                           double gap_min = kDefaultGapMin);

}  // namespace sflow
