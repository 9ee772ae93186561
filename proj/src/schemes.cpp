#include "spde/schemes.hpp"

#include <cmath>
#include <stdexcept>

namespace spde {

Eigen::VectorXd smtiStep(const KernelContext& kernels, const Nonlinearity& f,
                         const Eigen::VectorXd& state, double dt,
                         const Eigen::VectorXd& fbm_inc,
                         const Eigen::VectorXd& jump_inc) {
  Eigen::VectorXd next =
      kernels.expmAction(dt, state + fbm_inc + jump_inc);
  if (!f.isZero()) {
    next += dt * kernels.phi1Action(dt, f.apply(kernels.time(), state));
  }
  return next;
}

Eigen::VectorXd implicitStep(const KernelContext& kernels,
                             const Nonlinearity& f,
                             const Eigen::VectorXd& state, double dt,
                             const Eigen::VectorXd& fbm_inc,
                             const Eigen::VectorXd& jump_inc) {
  Eigen::VectorXd rhs = state + fbm_inc + jump_inc;
  if (!f.isZero()) rhs += dt * f.apply(kernels.time(), state);
  return kernels.resolventStep(dt, rhs);
}

Simulator::Simulator(const ModelSpec& model, const Mesh1D& mesh, int steps,
                     bool need_exponential)
    : model_(model),
      mesh_(mesh),
      grid_(model.horizon, steps),
      cache_(std::make_unique<KernelCache>(
          mesh, model.ops, model.horizon, steps,
          need_exponential ? KernelMode::Auto : KernelMode::ResolventOnly)),
      projector_(model.fbm, mesh, cache_->massMatrix()),
      jump_(bindJumpModel(model.jump, mesh, cache_->massMatrix())) {
  x0_ = model.x0 ? l2Project(mesh, cache_->massMatrix(), model.x0)
                 : Eigen::VectorXd::Zero(mesh.n_interior);
}

Eigen::VectorXd Simulator::noiseIncrement(const NoisePath& noise,
                                          int level) const {
  const double t = grid_.time(level);
  const double sigma = model_.phi(t);
  Eigen::VectorXd inc =
      sigma * projector_.increment(noise.fbm_increments.col(level));
  return inc;
}

Trajectory Simulator::run(Scheme scheme, const NoisePath& noise) const {
  if (noise.grid.steps != grid_.steps ||
      noise.grid.horizon != grid_.horizon)
    throw std::invalid_argument("Simulator::run: noise path grid mismatch");
  if (noise.fbm_increments.rows() != projector_.modeCount())
    throw std::invalid_argument("Simulator::run: noise mode count mismatch");

  Trajectory traj;
  traj.grid = grid_;
  traj.scheme = scheme;
  traj.states.reserve(grid_.steps + 1);
  traj.states.push_back(x0_);

  const double dt = grid_.dt();
  Eigen::VectorXd state = x0_;
  for (int m = 0; m < grid_.steps; ++m) {
    const KernelContext& kernels = cache_->at(m);
    const Eigen::VectorXd fbm_inc = noiseIncrement(noise, m);
    const Eigen::VectorXd jump_inc = compensatedIncrement(
        jump_, eventsInStep(noise.jumps, grid_.time(m), grid_.time(m + 1)), dt);
    state = scheme == Scheme::Smti
                ? smtiStep(kernels, model_.F, state, dt, fbm_inc, jump_inc)
                : implicitStep(kernels, model_.F, state, dt, fbm_inc, jump_inc);
    traj.states.push_back(state);
  }
  return traj;
}

Eigen::VectorXd Simulator::runFinal(Scheme scheme,
                                    const NoisePath& noise) const {
  if (noise.grid.steps != grid_.steps ||
      noise.grid.horizon != grid_.horizon)
    throw std::invalid_argument("Simulator::runFinal: noise path grid mismatch");
  if (noise.fbm_increments.rows() != projector_.modeCount())
    throw std::invalid_argument("Simulator::runFinal: noise mode count mismatch");

  const double dt = grid_.dt();
  Eigen::VectorXd state = x0_;
  for (int m = 0; m < grid_.steps; ++m) {
    const KernelContext& kernels = cache_->at(m);
    const Eigen::VectorXd fbm_inc = noiseIncrement(noise, m);
    const Eigen::VectorXd jump_inc = compensatedIncrement(
        jump_, eventsInStep(noise.jumps, grid_.time(m), grid_.time(m + 1)), dt);
    state = scheme == Scheme::Smti
                ? smtiStep(kernels, model_.F, state, dt, fbm_inc, jump_inc)
                : implicitStep(kernels, model_.F, state, dt, fbm_inc, jump_inc);
  }
  return state;
}

Trajectory simulatePath(const ModelSpec& model, const Mesh1D& mesh,
                        Scheme scheme, const NoisePath& noise) {
  Simulator sim(model, mesh, noise.grid.steps, scheme == Scheme::Smti);
  return sim.run(scheme, noise);
}

Trajectory referenceSolution(const ModelSpec& model, const Mesh1D& mesh,
                             int fine_steps, const NoisePath& noise) {
  if (noise.grid.steps != fine_steps)
    throw std::invalid_argument("referenceSolution: noise must live on the fine grid");
  Simulator sim(model, mesh, fine_steps, true);
  return sim.run(Scheme::Smti, noise);
}

}  // namespace spde
