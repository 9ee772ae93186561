#include "spde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spde/io_util.hpp"

namespace spde {

namespace {

constexpr double kErrorFloor = 1e-12;

void checkSamples(int samples) {
  if (samples < 2)
    throw std::invalid_argument("study: at least 2 Monte-Carlo samples required");
}

std::vector<ErrorRow> reduceRows(const std::vector<int>& resolutions,
                                 const std::vector<double>& scales,
                                 const Eigen::MatrixXd& squared_errors) {
  const int samples = static_cast<int>(squared_errors.rows());
  std::vector<ErrorRow> rows;
  rows.reserve(resolutions.size());
  for (size_t j = 0; j < resolutions.size(); ++j) {
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
      const double e2 = squared_errors(s, static_cast<Eigen::Index>(j));
      sum += e2;
      sumsq += e2 * e2;
    }
    const double mean = sum / samples;
    const double var = std::max(0.0, (sumsq - samples * mean * mean) / (samples - 1));
    const double se_mean = std::sqrt(var / samples);
    const double rms = std::sqrt(std::max(0.0, mean));
    // delta method: se(sqrt(m)) ~= se(m) / (2 sqrt(m))
    const double se_rms = rms > 0.0 ? se_mean / (2.0 * rms) : 0.0;
    rows.push_back({resolutions[j], scales[j], rms, se_rms, samples});
  }
  return rows;
}

void fitSlope(ErrorTable& table) {
  table.floor_limited = true;
  for (const ErrorRow& row : table.rows) {
    if (row.rms_error > kErrorFloor) table.floor_limited = false;
  }
  bool fittable = table.rows.size() >= 2;
  for (const ErrorRow& row : table.rows) {
    if (!(row.rms_error > 0.0)) fittable = false;
  }
  if (fittable) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(table.rows.size());
    for (const ErrorRow& row : table.rows)
      pts.emplace_back(row.dt_or_h, row.rms_error);
    auto [slope, se] = estimateRate(pts);
    table.slope = slope;
    table.slope_stderr = se;
    table.slope_defined = true;
  }
}

}  // namespace

std::pair<double, double> estimateRate(
    const std::vector<std::pair<double, double>>& scale_error) {
  const int n = static_cast<int>(scale_error.size());
  if (n < 2) throw std::invalid_argument("estimateRate: need at least 2 rows");
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    if (!(scale_error[i].first > 0.0))
      throw std::invalid_argument("estimateRate: scales must be positive");
    if (!(scale_error[i].second > 0.0))
      throw std::invalid_argument("estimateRate: errors must be positive");
    x[i] = std::log(scale_error[i].first);
    y[i] = std::log(scale_error[i].second);
  }
  double xbar = 0.0, ybar = 0.0;
  for (int i = 0; i < n; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx == 0.0) throw std::invalid_argument("estimateRate: degenerate scales");
  const double slope = sxy / sxx;
  double se = 0.0;
  if (n > 2) {
    double ssr = 0.0;
    const double intercept = ybar - slope * xbar;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - (intercept + slope * x[i]);
      ssr += r * r;
    }
    se = std::sqrt(ssr / (n - 2) / sxx);
  }
  return {slope, se};
}

void parallelForSamples(int samples, int threads,
                        const std::function<void(int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1 || samples <= 1) {
    for (int s = 0; s < samples; ++s) body(s);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&]() {
    while (true) {
      const int s = next.fetch_add(1);
      if (s >= samples) return;
      {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error) return;
      }
      try {
        body(s);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

ErrorTable temporalStudy(const StudyConfig& cfg) {
  if (cfg.mode != StudyMode::Temporal)
    throw std::invalid_argument("temporalStudy: config mode mismatch");
  checkSamples(cfg.samples);
  if (cfg.resolutions.empty())
    throw std::invalid_argument("temporalStudy: no resolutions");
  std::vector<int> resolutions = cfg.resolutions;
  std::sort(resolutions.begin(), resolutions.end());
  const int m_ref = cfg.reference_resolution;
  for (int m : resolutions) {
    if (m < 1) throw std::invalid_argument("temporalStudy: resolutions >= 1");
    if (m >= m_ref)
      throw std::invalid_argument(
          "temporalStudy: reference resolution must be strictly finer than "
          "every study resolution");
    if (m_ref % m != 0)
      throw std::invalid_argument(
          "temporalStudy: reference resolution must be divisible by every "
          "study resolution");
  }

  const TimeGrid ref_grid(cfg.model.horizon, m_ref);
  Simulator ref_sim(cfg.model, cfg.mesh, m_ref, true);
  std::vector<Simulator> coarse;
  coarse.reserve(resolutions.size());
  for (int m : resolutions)
    coarse.emplace_back(cfg.model, cfg.mesh, m, cfg.scheme == Scheme::Smti);

  const TriDiag& mass = ref_sim.mass();
  Eigen::MatrixXd err2(cfg.samples, static_cast<Eigen::Index>(resolutions.size()));
  parallelForSamples(cfg.samples, cfg.threads, [&](int s) {
    const NoisePath path =
        sampleNoisePath(cfg.model.fbm, cfg.model.jump, ref_grid, cfg.seed,
                        static_cast<std::uint64_t>(s));
    const double checksum = pathChecksum(path);
    const Eigen::VectorXd x_ref = ref_sim.runFinal(Scheme::Smti, path);
    for (size_t j = 0; j < resolutions.size(); ++j) {
      const NoisePath coarse_path = coarsen(path, m_ref / resolutions[j]);
      const double coarse_sum = pathChecksum(coarse_path);
      if (std::abs(coarse_sum - checksum) >
          1e-9 * (1.0 + std::abs(checksum)))
        throw std::runtime_error(
            "temporalStudy: common-random-number checksum mismatch");
      const Eigen::VectorXd x = coarse[j].runFinal(cfg.scheme, coarse_path);
      err2(s, static_cast<Eigen::Index>(j)) =
          std::pow(weightedNorm(mass, x_ref - x), 2);
    }
  });

  std::vector<double> scales;
  scales.reserve(resolutions.size());
  for (int m : resolutions) scales.push_back(cfg.model.horizon / m);

  ErrorTable table;
  table.mode = StudyMode::Temporal;
  table.scheme = cfg.scheme;
  table.rows = reduceRows(resolutions, scales, err2);
  fitSlope(table);
  return table;
}

Eigen::VectorXd prolong(const Mesh1D& coarse, const Mesh1D& fine,
                        const Eigen::VectorXd& values) {
  if (!isNestedRefinement(coarse, fine))
    throw std::invalid_argument("prolong: meshes are not nested");
  if (values.size() != coarse.n_interior)
    throw std::invalid_argument("prolong: coefficient size mismatch");
  const long coarse_cells = coarse.n_interior + 1;
  const long fine_cells = fine.n_interior + 1;
  Eigen::VectorXd out(fine.n_interior);
  auto coarse_value = [&](long idx) -> double {
    return (idx >= 1 && idx <= coarse.n_interior) ? values[idx - 1] : 0.0;
  };
  for (long j = 1; j <= fine.n_interior; ++j) {
    const long num = j * coarse_cells;
    const long i0 = num / fine_cells;
    const long rem = num % fine_cells;
    if (rem == 0) {
      out[j - 1] = coarse_value(i0);
    } else {
      const double w = static_cast<double>(rem) / static_cast<double>(fine_cells);
      out[j - 1] = (1.0 - w) * coarse_value(i0) + w * coarse_value(i0 + 1);
    }
  }
  return out;
}

ErrorTable spatialStudy(const StudyConfig& cfg) {
  if (cfg.mode != StudyMode::Spatial)
    throw std::invalid_argument("spatialStudy: config mode mismatch");
  checkSamples(cfg.samples);
  if (cfg.resolutions.empty())
    throw std::invalid_argument("spatialStudy: no resolutions");
  if (cfg.fixed_steps < 1)
    throw std::invalid_argument("spatialStudy: fixed_steps >= 1");
  std::vector<int> resolutions = cfg.resolutions;
  std::sort(resolutions.begin(), resolutions.end());
  const int n_ref = cfg.reference_resolution;
  const Mesh1D fine(cfg.mesh.a, cfg.mesh.b, n_ref);
  std::vector<Mesh1D> meshes;
  for (int n : resolutions) {
    const Mesh1D m(cfg.mesh.a, cfg.mesh.b, n);
    if (!isNestedRefinement(m, fine))
      throw std::invalid_argument(
          "spatialStudy: every study mesh must be strictly coarser than and "
          "nested in the reference mesh");
    meshes.push_back(m);
  }

  const TimeGrid grid(cfg.model.horizon, cfg.fixed_steps);
  Simulator ref_sim(cfg.model, fine, cfg.fixed_steps, true);
  std::vector<Simulator> coarse;
  coarse.reserve(meshes.size());
  for (const Mesh1D& m : meshes)
    coarse.emplace_back(cfg.model, m, cfg.fixed_steps, cfg.scheme == Scheme::Smti);

  const TriDiag& mass_fine = ref_sim.mass();
  Eigen::MatrixXd err2(cfg.samples, static_cast<Eigen::Index>(meshes.size()));
  parallelForSamples(cfg.samples, cfg.threads, [&](int s) {
    const NoisePath path =
        sampleNoisePath(cfg.model.fbm, cfg.model.jump, grid, cfg.seed,
                        static_cast<std::uint64_t>(s));
    const Eigen::VectorXd x_ref = ref_sim.runFinal(Scheme::Smti, path);
    for (size_t j = 0; j < meshes.size(); ++j) {
      const Eigen::VectorXd x = coarse[j].runFinal(cfg.scheme, path);
      const Eigen::VectorXd xp = prolong(meshes[j], fine, x);
      err2(s, static_cast<Eigen::Index>(j)) =
          std::pow(weightedNorm(mass_fine, x_ref - xp), 2);
    }
  });

  std::vector<double> scales;
  scales.reserve(meshes.size());
  for (const Mesh1D& m : meshes) scales.push_back(m.h);

  ErrorTable table;
  table.mode = StudyMode::Spatial;
  table.scheme = cfg.scheme;
  table.rows = reduceRows(resolutions, scales, err2);
  fitSlope(table);
  return table;
}

HolderResult holderCheck(const ModelSpec& model, const Mesh1D& mesh, int steps,
                         int samples, std::uint64_t seed, int max_lag_log2,
                         int threads) {
  checkSamples(samples);
  std::vector<int> lags;
  for (int j = 0; j <= max_lag_log2; ++j) {
    const int lag = 1 << j;
    if (lag >= steps) break;
    lags.push_back(lag);
  }
  if (lags.size() < 2)
    throw std::invalid_argument("holderCheck: need at least two dyadic lags");

  const TimeGrid grid(model.horizon, steps);
  Simulator sim(model, mesh, steps, true);
  const TriDiag& mass = sim.mass();

  // per-sample, per-lag mean squared increment (averaged over start times)
  Eigen::MatrixXd acc(samples, static_cast<Eigen::Index>(lags.size()));
  parallelForSamples(samples, threads, [&](int s) {
    const NoisePath path = sampleNoisePath(model.fbm, model.jump, grid, seed,
                                           static_cast<std::uint64_t>(s));
    const Trajectory traj = sim.run(Scheme::Smti, path);
    for (size_t j = 0; j < lags.size(); ++j) {
      const int lag = lags[j];
      double sum = 0.0;
      int count = 0;
      for (int m = 0; m + lag <= steps; ++m) {
        const double d =
            weightedNorm(mass, traj.states[m + lag] - traj.states[m]);
        sum += d * d;
        ++count;
      }
      acc(s, static_cast<Eigen::Index>(j)) = sum / count;
    }
  });

  HolderResult result;
  std::vector<std::pair<double, double>> pts;
  for (size_t j = 0; j < lags.size(); ++j) {
    const double mean = acc.col(static_cast<Eigen::Index>(j)).mean();
    const double lag_time = lags[j] * grid.dt();
    result.lag_and_mean_square.emplace_back(lag_time, mean);
    pts.emplace_back(lag_time, mean);
  }
  auto [slope, se] = estimateRate(pts);
  result.exponent = slope;
  result.exponent_stderr = se;
  return result;
}

std::string toCsv(const ErrorTable& table, const std::string& preamble) {
  std::string out = preamble;
  out += "resolution,dt_or_h,rms_error,stderr,samples\n";
  for (const ErrorRow& row : table.rows) {
    out += std::to_string(row.resolution);
    out += ',';
    out += formatDouble(row.dt_or_h);
    out += ',';
    out += formatDouble(row.rms_error);
    out += ',';
    out += formatDouble(row.stderr_rms);
    out += ',';
    out += std::to_string(row.samples);
    out += '\n';
  }
  return out;
}

}  // namespace spde
