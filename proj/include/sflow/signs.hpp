#pragma once

namespace sflow {

// Orientation constants relating the winding-based constructions to the
// crossing-count orientation (upward crossing of zero counts +1).  Pinned
// once by the fixture suite in pin_sign_constants() and frozen here; the
// tests assert the measured record matches this one.
//
//   sigma_e : even flow, winding route vs crossing count
//   sigma_d : interval-operator eigenvalue branches lambda = sigma_d*theta/2 + k*pi
//   sigma_m : Maslov pair index vs counterclockwise eigenphase passes through 1
//   sigma_s : even->odd suspension, boundary square winding vs flow
//   sigma_c : odd->even suspension, cylinder Chern difference vs odd flow
struct SignRecord {
  int sigma_e = 0;
  int sigma_d = 0;
  int sigma_m = 0;
  int sigma_s = 0;
  int sigma_c = 0;

  bool operator==(const SignRecord&) const = default;
};

inline constexpr SignRecord kFrozenSigns{+1, +1, +1, +1, +1};

}  // namespace sflow
