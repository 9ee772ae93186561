#pragma once

#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "spde/fem.hpp"
#include "spde/mesh.hpp"
#include "spde/tridiag.hpp"

namespace spde {

/// Uniform time grid with M steps of size T/M.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1;

  TimeGrid() = default;
  TimeGrid(double t, int m) : horizon(t), steps(m) {
    if (!(t > 0.0) || m < 1)
      throw std::invalid_argument("TimeGrid: horizon > 0 and steps >= 1");
  }
  double dt() const { return horizon / steps; }
  double time(int m) const { return m * dt(); }
};

/// Spectrum of the Q-cylindrical fBm field: Hurst parameter, mode variances
/// q_i of the covariance operator, and the Dirichlet sine eigenbasis
/// e_i(x) = sqrt(2/(b-a)) sin(i pi (x-a)/(b-a)).
struct FbmSpec {
  double hurst = 0.75;
  Eigen::VectorXd mode_variances;  // q_i >= 0, i = 1..n_modes

  int modeCount() const { return static_cast<int>(mode_variances.size()); }
  void validate() const;
};

/// q_i = scale * i^{-decay}. With decay = 2*beta + 1 the field regularity
/// heuristically matches smoothness parameter beta (documented heuristic,
/// not a proven identity).
FbmSpec powerLawSpectrum(double hurst, int n_modes, double decay,
                         double scale = 1.0);

struct JumpEvent {
  double time;
  double mark;
};

/// Finite-activity jump specification bound to one mesh: total intensity
/// lambda = nu(chi), normalized mark sampler, FE realization of psi, the
/// compensator mean int psi d(nu) and second moment int ||psi||^2_M d(nu).
struct JumpSpec {
  double intensity = 0.0;
  std::function<double(std::mt19937_64&)> mark_sampler;
  std::function<Eigen::VectorXd(double)> psi;
  Eigen::VectorXd compensator_mean;
  double second_moment = 0.0;
};

/// Mesh-free description of the default jump model: marks z ~ N(mean, sd^2),
/// psi(z) = z * P_h(profile).
struct JumpModel {
  double intensity = 0.0;
  double mark_mean = 0.0;
  double mark_sd = 1.0;
  std::function<double(double)> profile;  // may be null when intensity == 0
};

/// Realizes a JumpModel on a mesh (projects the profile, computes the
/// compensator and second moment in closed form).
JumpSpec bindJumpModel(const JumpModel& model, const Mesh1D& mesh,
                       const TriDiag& mass);

/// One sampled driving path on a time grid: per-mode fBm increments and the
/// absolute-time jump events. Coarsening re-bins both without resampling.
struct NoisePath {
  TimeGrid grid;
  Eigen::MatrixXd fbm_increments;  // n_modes x steps
  std::vector<JumpEvent> jumps;    // sorted by time, in (0, T]
};

/// Exact sampler of fBm increments over a uniform grid via circulant
/// embedding of the stationary autocovariance
///   gamma(k) = dt^{2H}/2 (|k+1|^{2H} + |k-1|^{2H} - 2 k^{2H}),
/// with a dense Cholesky fallback when the embedding is not nonnegative.
class FbmSampler {
 public:
  FbmSampler(double hurst, int steps, double dt, bool force_cholesky = false);
  ~FbmSampler();
  FbmSampler(const FbmSampler&) = delete;
  FbmSampler& operator=(const FbmSampler&) = delete;

  int steps() const { return steps_; }
  bool choleskyFallback() const { return use_cholesky_; }

  /// Draws one increment sequence (length = steps).
  void sample(std::mt19937_64& rng, Eigen::Ref<Eigen::VectorXd> out);

  static double incrementAutocovariance(double hurst, double dt, long lag);

 private:
  struct Fft;
  double hurst_;
  int steps_;
  double dt_;
  bool use_cholesky_ = false;
  Eigen::VectorXd sqrt_eigenvalues_;       // circulant path
  Eigen::MatrixXd cholesky_factor_;        // fallback path
  std::unique_ptr<Fft> fft_;
};

/// Exact increments of one scalar fBm on a uniform grid.
Eigen::VectorXd fbmIncrements(double hurst, int steps, double dt,
                              std::mt19937_64& rng);

/// Poisson(lambda T) events, uniform sorted times, marks from the model law.
std::vector<JumpEvent> sampleJumpPath(const JumpModel& model, double horizon,
                                      std::mt19937_64& times_rng,
                                      std::mt19937_64& marks_rng);

/// Full driving path for one Monte-Carlo sample; streams are derived from
/// (seed, sample, channel) so the result is independent of threading.
NoisePath sampleNoisePath(const FbmSpec& fbm, const JumpModel& jumps,
                          const TimeGrid& grid, std::uint64_t seed,
                          std::uint64_t sample_index);

/// Events with time in (t0, t1].
std::span<const JumpEvent> eventsInStep(const std::vector<JumpEvent>& events,
                                        double t0, double t1);

/// Compensated jump increment over one step:
///   sum_k psi(z_k) - dt * compensator_mean.
Eigen::VectorXd compensatedIncrement(const JumpSpec& spec,
                                     std::span<const JumpEvent> events,
                                     double dt);

/// Sums fBm increments in blocks of `factor` (exact in law) and keeps jump
/// events for re-binning on the coarser grid. `factor` must divide steps.
NoisePath coarsen(const NoisePath& path, int factor);

/// Order-independent fingerprint of a path: invariant under coarsening up
/// to floating-point association, used to assert common-random-number
/// discipline across resolutions.
double pathChecksum(const NoisePath& path);

/// Caches the L2 projections of the sine modes, scaled by sqrt(q_i);
/// a field increment is then one dense (n x modes) matvec.
class FieldProjector {
 public:
  FieldProjector(const FbmSpec& spec, const Mesh1D& mesh, const TriDiag& mass);

  Eigen::VectorXd increment(const Eigen::VectorXd& mode_increments) const;
  const Eigen::MatrixXd& matrix() const { return projections_; }
  int modeCount() const { return static_cast<int>(projections_.cols()); }

 private:
  Eigen::MatrixXd projections_;  // column i: sqrt(q_i) * P_h e_i
};

}  // namespace spde
