#include "spde/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace spde {

double phi1Scalar(double z) {
  if (std::abs(z) < 1e-4) {
    // sum_{k=0..5} (-z)^k / (k+1)!
    return 1.0 +
           z * (-1.0 / 2.0 +
                z * (1.0 / 6.0 +
                     z * (-1.0 / 24.0 + z * (1.0 / 120.0 - z / 720.0))));
  }
  return (1.0 - std::exp(-z)) / z;
}

struct KernelContext::Shared {
  TriDiag mass;
  TriDiag stiffness0;                  // K(t) = scale * stiffness0
  std::optional<GeneralizedEig> eig;   // of (M, sym(K0)), Spectral mode
  std::optional<Eigen::MatrixXd> op0;  // dense M^{-1} K0, Dense mode
};

namespace {

KernelMode resolveMode(KernelMode requested, const TriDiag& k) {
  switch (requested) {
    case KernelMode::Auto:
      return k.isSymmetric(1e-12) ? KernelMode::Spectral : KernelMode::Dense;
    case KernelMode::Spectral:
      if (!k.isSymmetric(1e-12))
        throw std::invalid_argument(
            "KernelContext: spectral mode requires a symmetric stiffness");
      return KernelMode::Spectral;
    default:
      return requested;
  }
}

std::shared_ptr<const KernelContext::Shared> buildShared(TriDiag mass,
                                                         TriDiag stiffness,
                                                         KernelMode mode) {
  auto shared = std::make_shared<KernelContext::Shared>();
  shared->mass = std::move(mass);
  shared->stiffness0 = std::move(stiffness);
  if (mode == KernelMode::Spectral) {
    shared->eig = generalizedEigendecomposition(shared->mass,
                                                shared->stiffness0.symmetricPart());
  } else if (mode == KernelMode::Dense) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shared->mass.dense());
    shared->op0 = lu.solve(shared->stiffness0.dense());
  }
  return shared;
}

}  // namespace

KernelContext::KernelContext(TriDiag mass, TriDiag stiffness, double t,
                             KernelMode mode)
    : scale_(1.0), t_(t) {
  if (mass.size() != stiffness.size())
    throw std::invalid_argument("KernelContext: size mismatch");
  mode_ = resolveMode(mode, stiffness);
  shared_ = buildShared(std::move(mass), std::move(stiffness), mode_);
}

KernelContext::KernelContext(std::shared_ptr<const Shared> shared, double scale,
                             double t, KernelMode mode)
    : shared_(std::move(shared)), scale_(scale), t_(t), mode_(mode) {}

const TriDiag& KernelContext::massMatrix() const { return shared_->mass; }

TriDiag KernelContext::stiffnessMatrix() const {
  return lincomb(scale_, shared_->stiffness0, 0.0, shared_->stiffness0);
}

const GeneralizedEig* KernelContext::spectralCache() const {
  return shared_->eig ? &*shared_->eig : nullptr;
}

Eigen::VectorXd KernelContext::resolventStep(double dt,
                                             const Eigen::VectorXd& v) const {
  if (dt < 0.0) throw std::invalid_argument("resolventStep: dt >= 0 required");
  if (dt == 0.0) return v;
  const TriDiag system = lincomb(1.0, shared_->mass, dt * scale_, shared_->stiffness0);
  return system.solve(shared_->mass.apply(v));
}

Eigen::VectorXd KernelContext::expmAction(double dt,
                                          const Eigen::VectorXd& v) const {
  if (dt < 0.0) throw std::invalid_argument("expmAction: dt >= 0 required");
  if (dt == 0.0) return v;
  if (mode_ == KernelMode::Spectral) {
    const GeneralizedEig& eig = *shared_->eig;
    Eigen::VectorXd coeff = eig.vectors.transpose() * shared_->mass.apply(v);
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      coeff[i] *= std::exp(-dt * scale_ * eig.values[i]);
    }
    return eig.vectors * coeff;
  }
  if (mode_ == KernelMode::Dense) {
    const Eigen::MatrixXd propagator = (-dt * scale_ * (*shared_->op0)).exp();
    return propagator * v;
  }
  throw std::logic_error("expmAction: context built resolvent-only");
}

Eigen::VectorXd KernelContext::phi1Action(double dt,
                                          const Eigen::VectorXd& v) const {
  if (dt <= 0.0) throw std::invalid_argument("phi1Action: dt > 0 required");
  if (mode_ == KernelMode::Spectral) {
    const GeneralizedEig& eig = *shared_->eig;
    Eigen::VectorXd coeff = eig.vectors.transpose() * shared_->mass.apply(v);
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
      coeff[i] *= phi1Scalar(dt * scale_ * eig.values[i]);
    }
    return eig.vectors * coeff;
  }
  if (mode_ == KernelMode::Dense) {
    // phi1(dt A) v = int_0^1 e^{-s dt A} v ds: top-right block of the
    // exponential of the augmented matrix [[-dt A, v], [0, 0]]. Handles a
    // singular A without a solve.
    const Eigen::Index n = v.size();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = -dt * scale_ * (*shared_->op0);
    aug.topRightCorner(n, 1) = v;
    const Eigen::MatrixXd e = aug.exp();
    return e.topRightCorner(n, 1);
  }
  throw std::logic_error("phi1Action: context built resolvent-only");
}

KernelCache::KernelCache(const Mesh1D& mesh, const OperatorFamily& ops,
                         double horizon, int steps, KernelMode mode) {
  if (steps < 1) throw std::invalid_argument("KernelCache: steps >= 1");
  if (horizon <= 0.0) throw std::invalid_argument("KernelCache: horizon > 0");
  const double dt = horizon / steps;
  TriDiag mass = assembleMass(mesh);

  const bool separable_fast_path =
      ops.separable.has_value() && ops.advection_is_zero &&
      mode != KernelMode::Dense;
  contexts_.reserve(steps);
  if (separable_fast_path) {
    const OperatorFamily::Separable& s = *ops.separable;
    OperatorFamily spatial_only;
    spatial_only.diffusion = [&s](double x, double) { return s.spatial(x); };
    spatial_only.advection = [](double, double) { return 0.0; };
    spatial_only.ellipticity_floor = 0.0;  // checked against q(x,t) below
    TriDiag k0 = assembleStiffness(mesh, spatial_only, 0.0);

    // Ellipticity spot check on the quadrature points of every level.
    double min_temporal = std::numeric_limits<double>::infinity();
    for (int m = 0; m < steps; ++m)
      min_temporal = std::min(min_temporal, s.temporal(m * dt));
    OperatorFamily probe = ops;
    probe.diffusion = [&s, min_temporal](double x, double) {
      return s.spatial(x) * min_temporal;
    };
    (void)assembleStiffness(mesh, probe, 0.0);  // throws on floor violation

    const KernelMode level_mode =
        mode == KernelMode::ResolventOnly ? mode : KernelMode::Spectral;
    auto shared = buildShared(std::move(mass), std::move(k0), level_mode);
    for (int m = 0; m < steps; ++m) {
      const double t = m * dt;
      contexts_.push_back(KernelContext(shared, s.temporal(t), t, level_mode));
    }
  } else {
    for (int m = 0; m < steps; ++m) {
      const double t = m * dt;
      TriDiag k = assembleStiffness(mesh, ops, t);
      const KernelMode level_mode =
          mode == KernelMode::ResolventOnly ? mode : resolveMode(mode, k);
      auto shared = buildShared(mass, std::move(k), level_mode);
      contexts_.push_back(KernelContext(std::move(shared), 1.0, t, level_mode));
    }
  }
}

const KernelContext& KernelCache::at(int level) const {
  if (level < 0 || level >= levels())
    throw std::out_of_range("KernelCache::at: level out of range");
  return contexts_[static_cast<size_t>(level)];
}

const TriDiag& KernelCache::massMatrix() const {
  return contexts_.front().massMatrix();
}

}  // namespace spde
