#include "spde/fem.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace spde {

namespace {

// 2-point Gauss abscissae on the reference element [0, 1].
constexpr double kGaussOffset = 0.28867513459481287;  // 1/(2 sqrt 3)
constexpr double kQ0 = 0.5 - kGaussOffset;
constexpr double kQ1 = 0.5 + kGaussOffset;

struct LocalNodes {
  int left;   // dof index of left node, -1 when boundary
  int right;  // dof index of right node, -1 when boundary
};

inline LocalNodes elementDofs(const Mesh1D& mesh, int e) {
  const int nl = e;
  const int nr = e + 1;
  return {nl >= 1 && nl <= mesh.n_interior ? nl - 1 : -1,
          nr >= 1 && nr <= mesh.n_interior ? nr - 1 : -1};
}

inline void scatter(TriDiag& out, const LocalNodes& d, const double loc[2][2]) {
  if (d.left >= 0) out.diag[d.left] += loc[0][0];
  if (d.right >= 0) out.diag[d.right] += loc[1][1];
  if (d.left >= 0 && d.right >= 0) {
    out.upper[d.left] += loc[0][1];
    out.lower[d.left] += loc[1][0];
  }
}

}  // namespace

TriDiag assembleMass(const Mesh1D& mesh) {
  const double h = mesh.h;
  TriDiag m(mesh.n_interior);
  // Exact P1 element mass: h/6 * [[2,1],[1,2]].
  const double loc[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
  for (int e = 0; e < mesh.elementCount(); ++e) {
    scatter(m, elementDofs(mesh, e), loc);
  }
  return m;
}

TriDiag assembleStiffness(const Mesh1D& mesh, const OperatorFamily& ops,
                          double t) {
  const double h = mesh.h;
  const double w = 0.5 * h;  // Gauss weight per point
  TriDiag k(mesh.n_interior);
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const double xl = mesh.node(e);
    const double grad[2] = {-1.0 / h, 1.0 / h};
    double loc[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (double s : {kQ0, kQ1}) {
      const double xq = xl + s * h;
      const double q = ops.diffusion(xq, t);
      if (q < ops.ellipticity_floor) {
        std::ostringstream msg;
        msg << "assembleStiffness: diffusion coefficient " << q << " at (x=" << xq
            << ", t=" << t << ") violates ellipticity floor "
            << ops.ellipticity_floor;
        throw std::domain_error(msg.str());
      }
      const double bdr = ops.advection(xq, t);
      const double val[2] = {1.0 - s, s};
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
          loc[r][c] += w * (q * grad[r] * grad[c] + bdr * grad[c] * val[r]);
        }
      }
    }
    scatter(k, elementDofs(mesh, e), loc);
  }
  return k;
}

Eigen::VectorXd assembleLoadRefined(const Mesh1D& mesh,
                                    const std::function<double(double)>& f,
                                    int refine) {
  if (refine < 1) throw std::invalid_argument("assembleLoadRefined: refine >= 1");
  const double h = mesh.h;
  Eigen::VectorXd load = Eigen::VectorXd::Zero(mesh.n_interior);
  for (int e = 0; e < mesh.elementCount(); ++e) {
    const double xl = mesh.node(e);
    const LocalNodes d = elementDofs(mesh, e);
    const double hs = h / refine;
    const double w = 0.5 * hs;
    for (int sub = 0; sub < refine; ++sub) {
      const double x0 = xl + sub * hs;
      for (double s : {kQ0, kQ1}) {
        const double xq = x0 + s * hs;
        const double fr = (xq - xl) / h;  // right hat value, in [0,1]
        const double fv = f(xq);
        if (d.left >= 0) load[d.left] += w * fv * (1.0 - fr);
        if (d.right >= 0) load[d.right] += w * fv * fr;
      }
    }
  }
  return load;
}

Eigen::VectorXd assembleLoad(const Mesh1D& mesh,
                             const std::function<double(double)>& f) {
  return assembleLoadRefined(mesh, f, 1);
}

Eigen::VectorXd l2Project(const Mesh1D& mesh, const TriDiag& mass,
                          const std::function<double(double)>& f) {
  if (mass.size() != mesh.n_interior)
    throw std::invalid_argument("l2Project: mass/mesh mismatch");
  return mass.solve(assembleLoad(mesh, f));
}

Eigen::VectorXd sineModeLoad(const Mesh1D& mesh, int k) {
  if (k < 1) throw std::invalid_argument("sineModeLoad: mode index k >= 1");
  const double len = mesh.length();
  const double h = mesh.h;
  const double omega = k * std::numbers::pi / len;
  const double amp = std::sqrt(2.0 / len);
  // closed form: integral of hat_i(x) sin(omega (x-a)) dx
  //            = (2 - 2 cos(omega h)) / (omega^2 h) * sin(omega (x_i - a))
  const double sh = std::sin(0.5 * omega * h);
  const double weight = 4.0 * sh * sh / (omega * omega * h);
  Eigen::VectorXd load(mesh.n_interior);
  for (int i = 1; i <= mesh.n_interior; ++i) {
    load[i - 1] = amp * weight * std::sin(omega * (mesh.node(i) - mesh.a));
  }
  return load;
}

Eigen::VectorXd projectSineMode(const Mesh1D& mesh, const TriDiag& mass,
                                int k) {
  return mass.solve(sineModeLoad(mesh, k));
}

GeneralizedEig generalizedEigendecomposition(const TriDiag& mass,
                                             const TriDiag& stiffness) {
  if (mass.size() != stiffness.size())
    throw std::invalid_argument("generalizedEigendecomposition: size mismatch");
  if (!stiffness.isSymmetric(1e-12))
    throw std::invalid_argument(
        "generalizedEigendecomposition: K must be symmetric; pass its "
        "symmetric part for advective operators");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      stiffness.dense(), mass.dense(),
      Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("generalizedEigendecomposition: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Eigen::VectorXd fractionalPowerApply(const GeneralizedEig& eig,
                                     const TriDiag& mass, double alpha,
                                     const Eigen::VectorXd& v) {
  if (alpha < -1.0 || alpha > 1.0)
    throw std::invalid_argument("fractionalPowerApply: alpha in [-1, 1]");
  if (alpha == 0.0) return v;
  if (alpha < 0.0 && eig.values.minCoeff() <= 0.0)
    throw std::domain_error(
        "fractionalPowerApply: negative power needs positive spectrum");
  Eigen::VectorXd coeff = eig.vectors.transpose() * mass.apply(v);
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff[i] *= std::pow(eig.values[i], alpha);
  }
  return eig.vectors * coeff;
}

}  // namespace spde
