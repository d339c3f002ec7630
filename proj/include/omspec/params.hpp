#ifndef OMSPEC_PARAMS_HPP
#define OMSPEC_PARAMS_HPP

#include <cmath>
#include <vector>

#include "omspec/errors.hpp"

namespace omspec {

/// Physical constants of the optomechanical system. All rates and
/// frequencies are expressed in units of the mechanical frequency, so
/// omega_m defaults to 1; callers working with raw frequencies divide
/// through by omega_m first (the CLI does this for them).
struct SystemParams {
  double g0 = 0.0;       ///< single-photon optomechanical coupling
  double gamma_c = 0.1;  ///< cavity-field decay rate
  double omega_m = 1.0;  ///< mechanical frequency

  /// Dimensionless displacement of the single-photon phonon basis.
  double beta0() const { return g0 / omega_m; }
  /// Polaron shift delta = g0^2 / omega_m; offset of the sideband comb.
  double polaron_shift() const { return g0 * g0 / omega_m; }

  void validate() const {
    if (!(omega_m > 0.0) || !(gamma_c > 0.0) || g0 < 0.0 ||
        !std::isfinite(g0) || !std::isfinite(gamma_c) ||
        !std::isfinite(omega_m)) {
      throw InvalidInputError(
          "SystemParams: require omega_m > 0, gamma_c > 0, g0 >= 0, all "
          "finite");
    }
  }
};

/// One sampled spectrum value. detuning is Delta_k = omega_k - omega_c in
/// units of omega_m; value carries units 1/omega_m. sigma < 0 means "no
/// uncertainty attached".
struct SpectrumPoint {
  double detuning = 0.0;
  double value = 0.0;
  double sigma = -1.0;
};

struct Spectrum {
  std::vector<SpectrumPoint> points;

  bool has_sigma() const {
    return !points.empty() && points.front().sigma >= 0.0;
  }
};

/// Lorentzian single-photon wave packet used as the scattering input.
struct LorentzianPacket {
  double center = 0.0;  ///< Delta_0
  double width = 0.1;   ///< epsilon > 0

  void validate() const {
    if (!(width > 0.0)) {
      throw InvalidInputError("LorentzianPacket: width must be > 0");
    }
  }
};

}  // namespace omspec

#endif
