#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sflow {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Hard per-step bound for phase unwrapping; a step at or above this is refused
// rather than silently aliased.
inline constexpr double kPhaseStepMax = kPi / 2;

inline constexpr double kDefaultGapMin = 1e-6;
inline constexpr int kDefaultRefineMax = 12;

enum class Errc {
  not_hermitian,
  boundary_hits_spectrum,
  sampling_too_coarse,
  singular_sample,
  shape_mismatch,
  unsupported_homomorphism,
  non_constant_rank,
  not_projection,
  invalid_path,
  no_gap_found,
  gap_hits_spectrum,
  endpoint_mismatch,
  unresolved_crossing,
  theta_inconsistent,
  not_normalizing,
  not_transverse,
  degenerate_form,
  cross_check_failed,
  not_lagrangian,
  not_odd,
  singular_endpoint,
  not_almost_involution,
  kernel_rank_jump,
  rank_jump,
  gapless_suspension,
  scan_too_coarse,
  inconsistent_conventions,
  bad_input,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

// Scale-relative tolerances.  The scale argument is a norm of the operand,
// so identical data always yields identical tolerances.
inline double tol_herm(double scale) { return 1e-10 * (1.0 + scale); }
inline double tol_recon(double scale) { return 1e-9 * (1.0 + scale); }
inline double tol_zero(double scale) { return 1e-8 * (1.0 + scale); }
inline double tol_unitary() { return 1e-9; }

}  // namespace sflow
