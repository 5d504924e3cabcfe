#pragma once

#include <stdexcept>
#include <string>

namespace cpd {

// Failure taxonomy. Three CLI exit classes:
//   2  invalid configuration or model assumption violated
//   3  numerical refusal (the estimate cannot be trusted and is withheld)
//   4  I/O failure
enum class Errc {
  config,                // bad parameters, constraint violation, malformed input
  branch_ambiguity,      // |phi_n| fell below the safety threshold kappa
  phase_jump,            // successive ECF ratio left the reliable unwrapping disk
  symmetry_violation,    // conjugate-symmetry residual exceeded tolerance
  kernel_degenerate,     // taper constant c numerically zero
  index_out_of_window,   // atom index outside the estimation window
  division_by_near_zero, // denominator estimate too close to zero
  unsupported_weight,    // weight outside the closed covariance catalog
  nonzero_drift,         // operation requires the drift-removed frame
  not_psd,               // covariance matrix not factorizable even with jitter
  refusal_rate,          // too many Monte Carlo replicates refused
  io,                    // file read/write failure
};

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

  int exit_code() const noexcept {
    switch (code_) {
      case Errc::config:
      case Errc::kernel_degenerate:
      case Errc::index_out_of_window:
      case Errc::unsupported_weight:
      case Errc::nonzero_drift:
        return 2;
      case Errc::io:
        return 4;
      default:
        return 3;
    }
  }

  // true for the refusal modes a Monte Carlo driver tolerates per replicate
  bool is_refusal() const noexcept {
    return code_ == Errc::branch_ambiguity || code_ == Errc::phase_jump ||
           code_ == Errc::symmetry_violation;
  }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace cpd
