#include "spde/tridiag.hpp"

#include <cmath>
#include <stdexcept>

namespace spde {

Eigen::VectorXd TriDiag::apply(const Eigen::VectorXd& v) const {
  const int n = size();
  if (v.size() != n) throw std::invalid_argument("TriDiag::apply: size mismatch");
  Eigen::VectorXd out = diag.cwiseProduct(v);
  if (n > 1) {
    out.head(n - 1) += upper.cwiseProduct(v.tail(n - 1));
    out.tail(n - 1) += lower.cwiseProduct(v.head(n - 1));
  }
  return out;
}

Eigen::VectorXd TriDiag::solve(const Eigen::VectorXd& rhs) const {
  const int n = size();
  if (rhs.size() != n) throw std::invalid_argument("TriDiag::solve: size mismatch");
  Eigen::VectorXd c(n), d(n);
  double piv = diag[0];
  if (piv == 0.0) throw std::runtime_error("TriDiag::solve: zero pivot");
  if (n > 1) c[0] = upper[0] / piv;
  d[0] = rhs[0] / piv;
  for (int i = 1; i < n; ++i) {
    piv = diag[i] - lower[i - 1] * c[i - 1];
    if (piv == 0.0) throw std::runtime_error("TriDiag::solve: zero pivot");
    if (i < n - 1) c[i] = upper[i] / piv;
    d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
  }
  for (int i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
  return d;
}

Eigen::MatrixXd TriDiag::dense() const {
  const int n = size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) out(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) {
    out(i, i + 1) = upper[i];
    out(i + 1, i) = lower[i];
  }
  return out;
}

TriDiag TriDiag::symmetricPart() const {
  TriDiag s(size());
  s.diag = diag;
  if (size() > 1) {
    s.lower = 0.5 * (lower + upper);
    s.upper = s.lower;
  }
  return s;
}

bool TriDiag::isSymmetric(double tol) const {
  if (size() <= 1) return true;
  const double scale = std::max(maxAbs(), 1e-300);
  return ((lower - upper).cwiseAbs().maxCoeff()) <= tol * scale;
}

double TriDiag::maxAbs() const {
  double m = diag.cwiseAbs().maxCoeff();
  if (size() > 1) {
    m = std::max(m, lower.cwiseAbs().maxCoeff());
    m = std::max(m, upper.cwiseAbs().maxCoeff());
  }
  return m;
}

TriDiag lincomb(double a, const TriDiag& x, double b, const TriDiag& y) {
  if (x.size() != y.size()) throw std::invalid_argument("lincomb: size mismatch");
  TriDiag out(x.size());
  out.diag = a * x.diag + b * y.diag;
  if (x.size() > 1) {
    out.lower = a * x.lower + b * y.lower;
    out.upper = a * x.upper + b * y.upper;
  }
  return out;
}

double weightedInner(const TriDiag& m, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w) {
  return v.dot(m.apply(w));
}

double weightedNorm(const TriDiag& m, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(0.0, weightedInner(m, v, v)));
}

}  // namespace spde
