#pragma once

#include <functional>
#include <optional>
#include <string>

namespace spde {

/// Time-dependent second-order elliptic operator on the interval,
///   A(t)u = -(q(x,t) u')' + bdr(x,t) u',
/// described by its coefficients. The diffusion coefficient must stay
/// above `ellipticity_floor` everywhere the assembly samples it.
struct OperatorFamily {
  std::function<double(double x, double t)> diffusion;
  std::function<double(double x, double t)> advection;
  double ellipticity_floor = 0.0;

  /// Set by factories when advection == 0 identically; enables the
  /// self-adjoint (spectral) kernel path.
  bool advection_is_zero = true;

  /// Present when q(x,t) = spatial(x) * temporal(t). Stiffness matrices at
  /// different times then share one assembly: K(t) = temporal(t) * K_spatial.
  struct Separable {
    std::function<double(double)> spatial;
    std::function<double(double)> temporal;
  };
  std::optional<Separable> separable;

  std::string name = "custom";
};

/// q constant in space and time, no advection.
OperatorFamily constantCoefficients(double q0, double floor = 0.0);

/// q(x,t) = q0 * (1 + 0.5 sin(2 pi t / T)), no advection. Self-adjoint at
/// every time; the scalar modulation keeps the generalized eigenbasis fixed.
OperatorFamily timeSineCoefficients(double q0, double period);

/// q(x,t) = q0 * (1 + 0.25 sin(pi (x-a)/(b-a))) * (1 + 0.5 sin(2 pi t / T)).
OperatorFamily spaceTimeSineCoefficients(double q0, double a, double b,
                                         double period);

/// Adds a constant advection coefficient to an existing family.
OperatorFamily withConstantAdvection(OperatorFamily base, double bdr);

}  // namespace spde
