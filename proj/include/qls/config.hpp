#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qls {

/// Raised for invalid physical parameters or malformed user configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a dense solve does not converge or a linear system is singular.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a formula is evaluated on its pole (light line, resonance).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// On-site interaction strength. The hard-core limit is a distinct state,
/// not a large number.
class Interaction {
 public:
  static constexpr Interaction hard_core() { return Interaction(0.0, true); }
  static constexpr Interaction finite(double chi) { return Interaction(chi, false); }

  constexpr bool is_hard_core() const { return hard_core_; }
  /// Only meaningful when !is_hard_core().
  constexpr double value() const { return value_; }

  friend constexpr bool operator==(const Interaction&, const Interaction&) = default;

 private:
  constexpr Interaction(double v, bool hc) : value_(v), hard_core_(hc) {}
  double value_;
  bool hard_core_;
};

/// Physical parameters of the array. Energies are in units of gamma0.
struct ArrayConfig {
  int n_qubits = 2;
  double phase = 0.0;  // q0 * d, radians
  double gamma0 = 1.0;
  Interaction chi = Interaction::hard_core();

  void validate(int min_qubits = 1) const {
    if (n_qubits < min_qubits) {
      throw ConfigError("n_qubits must be >= " + std::to_string(min_qubits) + ", got " +
                        std::to_string(n_qubits));
    }
    if (!std::isfinite(phase)) throw ConfigError("phase must be finite");
    if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) throw ConfigError("gamma0 must be > 0");
    if (!chi.is_hard_core() && (!(chi.value() >= 0.0) || !std::isfinite(chi.value()))) {
      throw ConfigError("chi must be a nonnegative finite number or infinite");
    }
  }
};

}  // namespace qls
