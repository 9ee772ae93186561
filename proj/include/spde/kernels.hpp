#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "spde/fem.hpp"
#include "spde/mesh.hpp"
#include "spde/operator_family.hpp"
#include "spde/tridiag.hpp"

namespace spde {

/// phi1(z) = (1 - e^{-z})/z, evaluated in the cancellation-safe form:
/// a 6-term Taylor series below |z| = 1e-4, the direct formula above.
double phi1Scalar(double z);

enum class KernelMode {
  Auto,           // Spectral when K is symmetric, Dense otherwise
  Spectral,       // generalized eigendecomposition of (M, K)
  Dense,          // scaling-and-squaring on the small dense matrix M^{-1} K
  ResolventOnly,  // no exponential machinery, only (M + dt K) solves
};

/// Applies the time-stepping kernels of the discrete operator
/// A_h = M^{-1} K frozen at one time level:
///   expm:      v -> e^{-dt A_h} v
///   phi1:      v -> phi1(dt A_h) v = (dt A_h)^{-1} (I - e^{-dt A_h}) v
///   resolvent: v -> (I + dt A_h)^{-1} v  via  (M + dt K) x = M v
/// Immutable after construction; all applications are const and safe to
/// run concurrently.
class KernelContext {
 public:
  struct Shared;  // defined in the implementation

  /// Standalone context for a fixed stiffness matrix.
  KernelContext(TriDiag mass, TriDiag stiffness, double t = 0.0,
                KernelMode mode = KernelMode::Auto);

  Eigen::VectorXd resolventStep(double dt, const Eigen::VectorXd& v) const;
  Eigen::VectorXd expmAction(double dt, const Eigen::VectorXd& v) const;
  Eigen::VectorXd phi1Action(double dt, const Eigen::VectorXd& v) const;

  double time() const { return t_; }
  KernelMode mode() const { return mode_; }
  const TriDiag& massMatrix() const;
  TriDiag stiffnessMatrix() const;  // scale * K0, assembled on demand
  /// Spectral cache of (M, sym(K)); absent in ResolventOnly/Dense modes.
  const GeneralizedEig* spectralCache() const;
  double spectralScale() const { return scale_; }

 private:
  KernelContext(std::shared_ptr<const Shared> shared, double scale, double t,
                KernelMode mode);
  friend class KernelCache;

  std::shared_ptr<const Shared> shared_;
  double scale_ = 1.0;  // K(t) = scale * K0
  double t_ = 0.0;
  KernelMode mode_ = KernelMode::Spectral;
};

/// Kernel contexts for every level of a uniform time grid, keyed on t_m.
/// Non-autonomy forces one context per level; when the operator family is
/// separable (q(x,t) = q_s(x) q_t(t)) and self-adjoint all levels share a
/// single eigendecomposition and differ only by the scalar q_t(t_m).
class KernelCache {
 public:
  KernelCache(const Mesh1D& mesh, const OperatorFamily& ops, double horizon,
              int steps, KernelMode mode = KernelMode::Auto);

  const KernelContext& at(int level) const;
  int levels() const { return static_cast<int>(contexts_.size()); }
  const TriDiag& massMatrix() const;

 private:
  std::vector<KernelContext> contexts_;
};

}  // namespace spde
