#include "spde/operator_family.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spde {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

OperatorFamily constantCoefficients(double q0, double floor) {
  if (q0 <= 0.0) throw std::invalid_argument("constantCoefficients: q0 > 0 required");
  OperatorFamily ops;
  ops.diffusion = [q0](double, double) { return q0; };
  ops.advection = [](double, double) { return 0.0; };
  ops.ellipticity_floor = floor > 0.0 ? floor : 0.5 * q0;
  ops.advection_is_zero = true;
  ops.separable = OperatorFamily::Separable{
      [q0](double) { return q0; }, [](double) { return 1.0; }};
  ops.name = "constant";
  return ops;
}

OperatorFamily timeSineCoefficients(double q0, double period) {
  if (q0 <= 0.0 || period <= 0.0)
    throw std::invalid_argument("timeSineCoefficients: q0, period > 0 required");
  auto temporal = [period](double t) { return 1.0 + 0.5 * std::sin(kTwoPi * t / period); };
  OperatorFamily ops;
  ops.diffusion = [q0, temporal](double, double t) { return q0 * temporal(t); };
  ops.advection = [](double, double) { return 0.0; };
  ops.ellipticity_floor = 0.4 * q0;  // min of the modulation is 0.5*q0
  ops.advection_is_zero = true;
  ops.separable = OperatorFamily::Separable{[q0](double) { return q0; }, temporal};
  ops.name = "time-sine";
  return ops;
}

OperatorFamily spaceTimeSineCoefficients(double q0, double a, double b,
                                         double period) {
  if (q0 <= 0.0 || period <= 0.0 || !(b > a))
    throw std::invalid_argument("spaceTimeSineCoefficients: invalid parameters");
  auto spatial = [q0, a, b](double x) {
    return q0 * (1.0 + 0.25 * std::sin(std::numbers::pi * (x - a) / (b - a)));
  };
  auto temporal = [period](double t) { return 1.0 + 0.5 * std::sin(kTwoPi * t / period); };
  OperatorFamily ops;
  ops.diffusion = [spatial, temporal](double x, double t) { return spatial(x) * temporal(t); };
  ops.advection = [](double, double) { return 0.0; };
  ops.ellipticity_floor = 0.4 * q0;
  ops.advection_is_zero = true;
  ops.separable = OperatorFamily::Separable{spatial, temporal};
  ops.name = "space-time-sine";
  return ops;
}

OperatorFamily withConstantAdvection(OperatorFamily base, double bdr) {
  base.advection = [bdr](double, double) { return bdr; };
  base.advection_is_zero = (bdr == 0.0);
  if (bdr != 0.0) {
    base.separable.reset();  // kernel fast path requires self-adjointness
    base.name += "+advection";
  }
  return base;
}

}  // namespace spde
