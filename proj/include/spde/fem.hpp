#pragma once

#include <functional>

#include "spde/mesh.hpp"
#include "spde/operator_family.hpp"
#include "spde/tridiag.hpp"

namespace spde {

/// P1 consistent mass matrix with Dirichlet rows/columns eliminated.
/// On a uniform mesh the interior stencil is h/6 * (1, 4, 1).
TriDiag assembleMass(const Mesh1D& mesh);

/// Stiffness K(t) of the bilinear form
///   a(t)(u, v) = \int q(x,t) u' v' dx + \int bdr(x,t) u' v dx,
/// assembled with 2-point Gauss quadrature per element. Throws
/// std::domain_error when a sampled q(x,t) falls below the declared
/// ellipticity floor.
TriDiag assembleStiffness(const Mesh1D& mesh, const OperatorFamily& ops,
                          double t);

/// Load vector (f, phi_i) by 2-point Gauss quadrature per element.
Eigen::VectorXd assembleLoad(const Mesh1D& mesh,
                             const std::function<double(double)>& f);

/// Same, with each element split into `refine` sub-intervals. Used as a
/// quadrature oracle and for strongly oscillatory integrands.
Eigen::VectorXd assembleLoadRefined(const Mesh1D& mesh,
                                    const std::function<double(double)>& f,
                                    int refine);

/// L2 projection onto V_h: solves M c = (f, phi_i).
Eigen::VectorXd l2Project(const Mesh1D& mesh, const TriDiag& mass,
                          const std::function<double(double)>& f);

/// Exact load vector of the Dirichlet sine mode
///   e_k(x) = sqrt(2/(b-a)) sin(k pi (x-a)/(b-a)),
/// using the closed form of the hat/sine overlap integral.
Eigen::VectorXd sineModeLoad(const Mesh1D& mesh, int k);

/// L2 projection of e_k with the exact load (no quadrature error).
Eigen::VectorXd projectSineMode(const Mesh1D& mesh, const TriDiag& mass,
                                int k);

/// Generalized eigendecomposition K v = lambda M v with M SPD and K
/// symmetric. Eigenvalues ascending; eigenvectors M-orthonormal
/// (V' M V = I).
struct GeneralizedEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Throws std::invalid_argument when K is not symmetric; callers with an
/// advective stiffness must pass its symmetric part.
GeneralizedEig generalizedEigendecomposition(const TriDiag& mass,
                                             const TriDiag& stiffness);

/// Applies A^alpha through the spectral decomposition:
///   v -> sum_k lambda_k^alpha (v_k' M v) v_k,  alpha in [-1, 1].
Eigen::VectorXd fractionalPowerApply(const GeneralizedEig& eig,
                                     const TriDiag& mass, double alpha,
                                     const Eigen::VectorXd& v);

}  // namespace spde
