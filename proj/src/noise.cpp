#include "spde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

#include "spde/rng.hpp"

namespace spde {

void FbmSpec::validate() const {
  if (!(hurst > 0.5) || !(hurst < 1.0))
    throw std::invalid_argument("FbmSpec: Hurst parameter must lie in (1/2, 1)");
  if (mode_variances.size() > 0 && mode_variances.minCoeff() < 0.0)
    throw std::invalid_argument("FbmSpec: mode variances must be >= 0");
}

FbmSpec powerLawSpectrum(double hurst, int n_modes, double decay, double scale) {
  if (n_modes < 0) throw std::invalid_argument("powerLawSpectrum: n_modes >= 0");
  FbmSpec spec;
  spec.hurst = hurst;
  spec.mode_variances.resize(n_modes);
  for (int i = 0; i < n_modes; ++i)
    spec.mode_variances[i] = scale * std::pow(i + 1.0, -decay);
  spec.validate();
  return spec;
}

JumpSpec bindJumpModel(const JumpModel& model, const Mesh1D& mesh,
                       const TriDiag& mass) {
  if (model.intensity < 0.0)
    throw std::invalid_argument("bindJumpModel: intensity >= 0");
  JumpSpec spec;
  spec.intensity = model.intensity;
  const int n = mesh.n_interior;
  if (model.intensity == 0.0 || !model.profile) {
    spec.compensator_mean = Eigen::VectorXd::Zero(n);
    spec.second_moment = 0.0;
    spec.psi = [n](double) { return Eigen::VectorXd::Zero(n); };
    spec.mark_sampler = [](std::mt19937_64&) { return 0.0; };
    return spec;
  }
  Eigen::VectorXd profile_coeff = l2Project(mesh, mass, model.profile);
  spec.psi = [profile_coeff](double z) -> Eigen::VectorXd {
    return z * profile_coeff;
  };
  // marks ~ N(mean, sd^2); nu = intensity * law, so
  //   int psi d(nu) = intensity * mean * P_h g
  //   int ||psi||^2 d(nu) = intensity * (mean^2 + sd^2) * ||P_h g||_M^2
  spec.compensator_mean = model.intensity * model.mark_mean * profile_coeff;
  const double norm2 = weightedInner(mass, profile_coeff, profile_coeff);
  spec.second_moment =
      model.intensity *
      (model.mark_mean * model.mark_mean + model.mark_sd * model.mark_sd) *
      norm2;
  const double mean = model.mark_mean;
  const double sd = model.mark_sd;
  spec.mark_sampler = [mean, sd](std::mt19937_64& rng) {
    std::normal_distribution<double> normal(mean, sd);
    return normal(rng);
  };
  return spec;
}

// ---------------------------------------------------------------------------
// fBm sampling
// ---------------------------------------------------------------------------

namespace {
std::mutex& fftwPlanMutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct FbmSampler::Fft {
  int n = 0;
  fftw_complex* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;

  explicit Fft(int size) : n(size) {
    in = fftw_alloc_complex(static_cast<size_t>(n));
    out = fftw_alloc_complex(static_cast<size_t>(n));
    if (!in || !out) throw std::bad_alloc();
    std::lock_guard<std::mutex> lock(fftwPlanMutex());
    plan = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan) throw std::runtime_error("FbmSampler: FFTW plan failed");
  }
  ~Fft() {
    {
      std::lock_guard<std::mutex> lock(fftwPlanMutex());
      if (plan) fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
};

double FbmSampler::incrementAutocovariance(double hurst, double dt, long lag) {
  const double two_h = 2.0 * hurst;
  const double k = static_cast<double>(std::labs(lag));
  const double value = 0.5 * (std::pow(k + 1.0, two_h) +
                              std::pow(std::abs(k - 1.0), two_h) -
                              2.0 * std::pow(k, two_h));
  return std::pow(dt, two_h) * value;
}

FbmSampler::FbmSampler(double hurst, int steps, double dt, bool force_cholesky)
    : hurst_(hurst), steps_(steps), dt_(dt) {
  if (!(hurst > 0.5) || !(hurst < 1.0))
    throw std::invalid_argument("FbmSampler: Hurst parameter must lie in (1/2, 1)");
  if (steps < 1) throw std::invalid_argument("FbmSampler: steps >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("FbmSampler: dt > 0");

  use_cholesky_ = force_cholesky;
  if (!use_cholesky_) {
    // Circulant first row: gamma(0..M), then mirrored gamma(M-1..1).
    const int n = 2 * steps_;
    fft_ = std::make_unique<Fft>(n);
    for (int j = 0; j < n; ++j) {
      const long lag = j <= steps_ ? j : n - j;
      fft_->in[j][0] = incrementAutocovariance(hurst_, dt_, lag);
      fft_->in[j][1] = 0.0;
    }
    fftw_execute(fft_->plan);
    Eigen::VectorXd lambda(n);
    for (int j = 0; j < n; ++j) lambda[j] = fft_->out[j][0];
    const double max_l = lambda.maxCoeff();
    if (lambda.minCoeff() < -1e-12 * max_l) {
      use_cholesky_ = true;  // embedding not nonnegative definite
      fft_.reset();
    } else {
      sqrt_eigenvalues_ = lambda.cwiseMax(0.0).cwiseSqrt();
    }
  }
  if (use_cholesky_) {
    Eigen::MatrixXd cov(steps_, steps_);
    for (int i = 0; i < steps_; ++i)
      for (int j = 0; j < steps_; ++j)
        cov(i, j) = incrementAutocovariance(hurst_, dt_, i - j);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("FbmSampler: covariance not positive definite");
    cholesky_factor_ = llt.matrixL();
  }
}

FbmSampler::~FbmSampler() = default;

void FbmSampler::sample(std::mt19937_64& rng, Eigen::Ref<Eigen::VectorXd> out) {
  if (out.size() != steps_)
    throw std::invalid_argument("FbmSampler::sample: output size mismatch");
  std::normal_distribution<double> normal(0.0, 1.0);
  if (use_cholesky_) {
    Eigen::VectorXd z(steps_);
    for (int i = 0; i < steps_; ++i) z[i] = normal(rng);
    out = cholesky_factor_ * z;
    return;
  }
  // Dietrich-Newsam synthesis: with zeta_k = a_k + i b_k i.i.d. complex
  // standard normal, Re(ifft(sqrt(lambda) zeta))/sqrt(N) ~ N(0, Toeplitz).
  const int n = 2 * steps_;
  for (int k = 0; k < n; ++k) {
    const double s = sqrt_eigenvalues_[k];
    fft_->in[k][0] = s * normal(rng);
    fft_->in[k][1] = s * normal(rng);
  }
  fftw_execute(fft_->plan);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < steps_; ++j) out[j] = fft_->out[j][0] * inv_sqrt_n;
}

Eigen::VectorXd fbmIncrements(double hurst, int steps, double dt,
                              std::mt19937_64& rng) {
  FbmSampler sampler(hurst, steps, dt);
  Eigen::VectorXd out(steps);
  sampler.sample(rng, out);
  return out;
}

// ---------------------------------------------------------------------------
// Jumps
// ---------------------------------------------------------------------------

std::vector<JumpEvent> sampleJumpPath(const JumpModel& model, double horizon,
                                      std::mt19937_64& times_rng,
                                      std::mt19937_64& marks_rng) {
  if (model.intensity < 0.0)
    throw std::invalid_argument("sampleJumpPath: intensity >= 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("sampleJumpPath: horizon > 0");
  std::vector<JumpEvent> events;
  if (model.intensity == 0.0) return events;
  std::poisson_distribution<int> count_dist(model.intensity * horizon);
  const int count = count_dist(times_rng);
  events.reserve(count);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> mark_dist(model.mark_mean, model.mark_sd);
  for (int k = 0; k < count; ++k) {
    const double t = horizon * (1.0 - uniform(times_rng));  // in (0, T]
    events.push_back({t, 0.0});
  }
  std::sort(events.begin(), events.end(),
            [](const JumpEvent& x, const JumpEvent& y) { return x.time < y.time; });
  for (JumpEvent& e : events) e.mark = mark_dist(marks_rng);
  return events;
}

NoisePath sampleNoisePath(const FbmSpec& fbm, const JumpModel& jumps,
                          const TimeGrid& grid, std::uint64_t seed,
                          std::uint64_t sample_index) {
  fbm.validate();
  NoisePath path;
  path.grid = grid;
  const int modes = fbm.modeCount();
  path.fbm_increments.resize(modes, grid.steps);
  if (modes > 0) {
    FbmSampler sampler(fbm.hurst, grid.steps, grid.dt());
    Eigen::VectorXd row(grid.steps);
    for (int i = 0; i < modes; ++i) {
      auto rng = makeStream(seed, sample_index, channels::fbmMode(i));
      sampler.sample(rng, row);
      path.fbm_increments.row(i) = row.transpose();
    }
  }
  auto times_rng = makeStream(seed, sample_index, channels::kJumpTimesChannel);
  auto marks_rng = makeStream(seed, sample_index, channels::kJumpMarksChannel);
  path.jumps = sampleJumpPath(jumps, grid.horizon, times_rng, marks_rng);
  return path;
}

std::span<const JumpEvent> eventsInStep(const std::vector<JumpEvent>& events,
                                        double t0, double t1) {
  auto first = std::partition_point(
      events.begin(), events.end(),
      [t0](const JumpEvent& e) { return e.time <= t0; });
  auto last = std::partition_point(
      first, events.end(), [t1](const JumpEvent& e) { return e.time <= t1; });
  return {events.data() + (first - events.begin()),
          static_cast<size_t>(last - first)};
}

Eigen::VectorXd compensatedIncrement(const JumpSpec& spec,
                                     std::span<const JumpEvent> events,
                                     double dt) {
  Eigen::VectorXd out = -dt * spec.compensator_mean;
  for (const JumpEvent& e : events) out += spec.psi(e.mark);
  return out;
}

NoisePath coarsen(const NoisePath& path, int factor) {
  if (factor < 1) throw std::invalid_argument("coarsen: factor >= 1");
  if (path.grid.steps % factor != 0)
    throw std::invalid_argument("coarsen: factor must divide the step count");
  if (factor == 1) return path;
  NoisePath out;
  out.grid = TimeGrid(path.grid.horizon, path.grid.steps / factor);
  out.fbm_increments.resize(path.fbm_increments.rows(), out.grid.steps);
  for (int j = 0; j < out.grid.steps; ++j) {
    out.fbm_increments.col(j) =
        path.fbm_increments.middleCols(j * factor, factor).rowwise().sum();
  }
  out.jumps = path.jumps;
  return out;
}

double pathChecksum(const NoisePath& path) {
  double sum = 0.0;
  if (path.fbm_increments.size() > 0) sum += path.fbm_increments.sum();
  for (const JumpEvent& e : path.jumps) sum += e.time + e.mark;
  sum += static_cast<double>(path.jumps.size());
  return sum;
}

// ---------------------------------------------------------------------------
// Field assembly
// ---------------------------------------------------------------------------

FieldProjector::FieldProjector(const FbmSpec& spec, const Mesh1D& mesh,
                               const TriDiag& mass) {
  spec.validate();
  const int modes = spec.modeCount();
  projections_.resize(mesh.n_interior, modes);
  for (int i = 0; i < modes; ++i) {
    const double q = spec.mode_variances[i];
    if (q == 0.0) {
      projections_.col(i).setZero();
    } else {
      projections_.col(i) = std::sqrt(q) * projectSineMode(mesh, mass, i + 1);
    }
  }
}

Eigen::VectorXd FieldProjector::increment(
    const Eigen::VectorXd& mode_increments) const {
  if (mode_increments.size() != projections_.cols())
    throw std::invalid_argument("FieldProjector: mode count mismatch");
  return projections_ * mode_increments;
}

}  // namespace spde
