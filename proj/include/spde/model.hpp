#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spde/noise.hpp"
#include "spde/operator_family.hpp"

namespace spde {

/// Nemytskii nonlinearity F(t, u) acting on FE coefficient vectors, with a
/// declared Lipschitz constant (in the mass norm).
struct Nonlinearity {
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> apply;
  double lipschitz = 0.0;
  std::string name = "zero";

  bool isZero() const { return !apply; }
};

Nonlinearity zeroNonlinearity();
/// F(t,u)_i = scale * (1 + 0.5 cos(2 pi t / T)) * u_i / (1 + u_i^2).
/// Lipschitz constant 1.5 * |scale|, F(t, 0) = 0.
Nonlinearity boundedNonlinearity(double scale, double period);
/// F(t,u) = scale * u (linear; used by tests and as a forcing-free default).
Nonlinearity linearNonlinearity(double scale);
/// F(t,u) = constant vector c (scalar tests).
Nonlinearity constantNonlinearity(const Eigen::VectorXd& value);

/// Scalar amplitude schedule sigma(t) multiplying the fBm field increment;
/// the FE realization of the paper-level noise operator phi(t).
struct ScalarSchedule {
  std::function<double(double)> value;
  std::string name = "constant";

  double operator()(double t) const { return value ? value(t) : 1.0; }
};

ScalarSchedule constantSchedule(double v);
/// sigma(t) = v * (1 + 0.5 cos(2 pi t / T)) -- smooth, Hoelder of any order.
ScalarSchedule cosineSchedule(double v, double period);

/// Full SPDE instance. The mesh is supplied separately at discretization
/// time; everything here is mesh-free.
struct ModelSpec {
  OperatorFamily ops;
  Nonlinearity F;
  ScalarSchedule phi;
  FbmSpec fbm;
  JumpModel jump;
  std::function<double(double)> x0;  // initial data, projected per mesh
  double horizon = 1.0;
};

enum class Scheme { Smti, Implicit };

const char* schemeName(Scheme s);

struct Trajectory {
  TimeGrid grid;
  std::vector<Eigen::VectorXd> states;  // size steps + 1, states[0] = X0
  Scheme scheme = Scheme::Smti;
};

}  // namespace spde
