#pragma once

#include <memory>

#include "spde/kernels.hpp"
#include "spde/model.hpp"

namespace spde {

/// One step of the stochastic Magnus-type integrator with the operator
/// frozen at t_m (taken from the kernel context):
///   X_{m+1} = e^{-dt A} (X_m + fbm_inc + jump_inc)
///             + dt phi1(dt A) F(t_m, X_m).
/// `fbm_inc` must already carry the sigma(t_m) amplitude.
Eigen::VectorXd smtiStep(const KernelContext& kernels, const Nonlinearity& f,
                         const Eigen::VectorXd& state, double dt,
                         const Eigen::VectorXd& fbm_inc,
                         const Eigen::VectorXd& jump_inc);

/// One step of the linear semi-implicit Euler scheme:
///   Y_{m+1} = (I + dt A)^{-1} (Y_m + dt F(t_m, Y_m) + fbm_inc + jump_inc).
/// The single resolvent applied to the sum equals the four-term form by
/// linearity.
Eigen::VectorXd implicitStep(const KernelContext& kernels,
                             const Nonlinearity& f,
                             const Eigen::VectorXd& state, double dt,
                             const Eigen::VectorXd& fbm_inc,
                             const Eigen::VectorXd& jump_inc);

/// Discretization of a model on one mesh and time grid: owns the mass
/// matrix, the per-level kernel contexts, the projected initial data, the
/// noise projections and the bound jump spec. Immutable after construction;
/// `run` is const and thread-safe, so one simulator serves all Monte-Carlo
/// workers on a shared grid.
class Simulator {
 public:
  /// `need_exponential` selects the kernel machinery: true for the Magnus
  /// integrator (and anything needing expm/phi1), false builds
  /// resolvent-only contexts for implicit-scheme-only use.
  Simulator(const ModelSpec& model, const Mesh1D& mesh, int steps,
            bool need_exponential = true);

  Trajectory run(Scheme scheme, const NoisePath& noise) const;
  Eigen::VectorXd runFinal(Scheme scheme, const NoisePath& noise) const;

  const TimeGrid& grid() const { return grid_; }
  const Mesh1D& mesh() const { return mesh_; }
  const TriDiag& mass() const { return cache_->massMatrix(); }
  const Eigen::VectorXd& initialState() const { return x0_; }
  const JumpSpec& jumpSpec() const { return jump_; }
  const FieldProjector& projector() const { return projector_; }
  const KernelCache& kernels() const { return *cache_; }

 private:
  Eigen::VectorXd noiseIncrement(const NoisePath& noise, int level) const;

  const ModelSpec model_;
  Mesh1D mesh_;
  TimeGrid grid_;
  std::unique_ptr<KernelCache> cache_;
  FieldProjector projector_;
  JumpSpec jump_;
  Eigen::VectorXd x0_;
};

/// Convenience wrapper: builds a Simulator and runs one trajectory.
/// Deterministic function of (model, noise): same path, same trajectory.
Trajectory simulatePath(const ModelSpec& model, const Mesh1D& mesh,
                        Scheme scheme, const NoisePath& noise);

/// Reference trajectory: the Magnus integrator on the fine grid. The fine
/// step count must be a multiple of every coarse resolution under study.
Trajectory referenceSolution(const ModelSpec& model, const Mesh1D& mesh,
                             int fine_steps, const NoisePath& noise);

}  // namespace spde
