#pragma once

#include <stdexcept>

namespace spde {

/// Uniform partition of [a, b] with homogeneous Dirichlet boundary.
/// Interior nodes are x_i = a + i*h, i = 1..n_interior; the boundary nodes
/// x_0 = a and x_{n+1} = b carry no degrees of freedom.
struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  int n_interior = 1;
  double h = 0.5;

  Mesh1D() = default;
  Mesh1D(double left, double right, int interior)
      : a(left), b(right), n_interior(interior) {
    if (!(b > a)) throw std::invalid_argument("Mesh1D: requires b > a");
    if (n_interior < 1) throw std::invalid_argument("Mesh1D: n_interior >= 1");
    h = (b - a) / (n_interior + 1);
  }

  double node(int i) const { return a + i * h; }
  int elementCount() const { return n_interior + 1; }
  double length() const { return b - a; }
};

/// True when `fine` refines `coarse` by keeping every coarse node
/// (same interval, element count an integer multiple).
inline bool isNestedRefinement(const Mesh1D& coarse, const Mesh1D& fine) {
  if (coarse.a != fine.a || coarse.b != fine.b) return false;
  return (fine.n_interior + 1) % (coarse.n_interior + 1) == 0 &&
         fine.n_interior > coarse.n_interior;
}

}  // namespace spde
