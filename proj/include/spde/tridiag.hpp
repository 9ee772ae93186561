#pragma once

#include <Eigen/Dense>

namespace spde {

/// Tridiagonal matrix stored by bands. `lower` and `upper` have size n-1.
/// All assembled FE operators in this library are exactly tridiagonal.
struct TriDiag {
  Eigen::VectorXd lower;
  Eigen::VectorXd diag;
  Eigen::VectorXd upper;

  TriDiag() = default;
  explicit TriDiag(int n)
      : lower(Eigen::VectorXd::Zero(std::max(n - 1, 0))),
        diag(Eigen::VectorXd::Zero(n)),
        upper(Eigen::VectorXd::Zero(std::max(n - 1, 0))) {}

  int size() const { return static_cast<int>(diag.size()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  /// Solves (*this) x = rhs by the Thomas algorithm (no pivoting; the
  /// matrices used here have positive definite symmetric part).
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  Eigen::MatrixXd dense() const;
  TriDiag symmetricPart() const;
  bool isSymmetric(double tol) const;
  double maxAbs() const;
};

/// a*X + b*Y, elementwise on the bands.
TriDiag lincomb(double a, const TriDiag& x, double b, const TriDiag& y);

/// v' M w
double weightedInner(const TriDiag& m, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w);

/// sqrt(v' M v) -- the discrete L2 norm when m is the mass matrix.
double weightedNorm(const TriDiag& m, const Eigen::VectorXd& v);

}  // namespace spde
