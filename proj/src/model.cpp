#include "spde/model.hpp"

#include <cmath>
#include <numbers>

namespace spde {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Nonlinearity zeroNonlinearity() { return {}; }

Nonlinearity boundedNonlinearity(double scale, double period) {
  Nonlinearity f;
  f.apply = [scale, period](double t, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    const double amp = scale * (1.0 + 0.5 * std::cos(kTwoPi * t / period));
    return amp * (u.array() / (1.0 + u.array().square())).matrix();
  };
  f.lipschitz = 1.5 * std::abs(scale);
  f.name = "bounded";
  return f;
}

Nonlinearity linearNonlinearity(double scale) {
  Nonlinearity f;
  f.apply = [scale](double, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return scale * u;
  };
  f.lipschitz = std::abs(scale);
  f.name = "linear";
  return f;
}

Nonlinearity constantNonlinearity(const Eigen::VectorXd& value) {
  Nonlinearity f;
  f.apply = [value](double, const Eigen::VectorXd&) { return value; };
  f.lipschitz = 0.0;
  f.name = "constant";
  return f;
}

ScalarSchedule constantSchedule(double v) {
  return {[v](double) { return v; }, "constant"};
}

ScalarSchedule cosineSchedule(double v, double period) {
  return {[v, period](double t) { return v * (1.0 + 0.5 * std::cos(kTwoPi * t / period)); },
          "cosine"};
}

const char* schemeName(Scheme s) {
  return s == Scheme::Smti ? "smti" : "implicit";
}

}  // namespace spde
