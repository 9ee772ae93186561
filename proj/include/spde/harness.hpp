#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spde/model.hpp"
#include "spde/schemes.hpp"

namespace spde {

enum class StudyMode { Temporal, Spatial };

/// Strong-error study configuration. In temporal mode `resolutions` are step
/// counts M on the common mesh; in spatial mode they are interior node
/// counts n of nested meshes on the same interval, stepped on a fixed fine
/// time grid.
struct StudyConfig {
  ModelSpec model;
  Scheme scheme = Scheme::Smti;
  StudyMode mode = StudyMode::Temporal;
  Mesh1D mesh;                    // temporal: the common mesh; spatial: interval donor
  std::vector<int> resolutions;   // M values or n_interior values, ascending
  int reference_resolution = 0;   // M_ref or n_ref
  int fixed_steps = 512;          // spatial mode: shared time grid
  int samples = 2;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ErrorRow {
  int resolution;
  double dt_or_h;
  double rms_error;
  double stderr_rms;
  int samples;
};

struct ErrorTable {
  StudyMode mode = StudyMode::Temporal;
  Scheme scheme = Scheme::Smti;
  std::vector<ErrorRow> rows;  // sorted by resolution (coarse first)
  double slope = 0.0;
  double slope_stderr = 0.0;
  bool floor_limited = false;
  bool slope_defined = false;
};

/// Ordinary least squares of log(error) on log(scale); returns the decay
/// rate (positive when errors shrink with the scale) and the residual-based
/// standard error (0 with two rows). Throws on non-positive errors or
/// fewer than two points.
std::pair<double, double> estimateRate(
    const std::vector<std::pair<double, double>>& scale_error);

/// Strong temporal error at final time against an SMTI reference on the
/// fine grid, with every resolution consuming a coarsening of the same
/// fine noise path (asserted by path checksums).
ErrorTable temporalStudy(const StudyConfig& cfg);

/// Strong spatial error on nested meshes against the finest mesh; coarse
/// solutions prolonged by exact P1 nodal interpolation before comparison.
ErrorTable spatialStudy(const StudyConfig& cfg);

/// Exact prolongation of a P1 coefficient vector from a nested coarse mesh
/// to a fine mesh (piecewise-linear evaluation at fine nodes).
Eigen::VectorXd prolong(const Mesh1D& coarse, const Mesh1D& fine,
                        const Eigen::VectorXd& values);

struct HolderResult {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  std::vector<std::pair<double, double>> lag_and_mean_square;
};

/// Empirical time-regularity exponent: slope of
/// log E||X(t+lag) - X(t)||_M^2 against log(lag) over dyadic lags,
/// averaged over the grid and over Monte-Carlo samples of the SMTI
/// trajectory.
HolderResult holderCheck(const ModelSpec& model, const Mesh1D& mesh, int steps,
                         int samples, std::uint64_t seed, int max_lag_log2,
                         int threads = 1);

/// CSV rendering of an error table (locale-independent: '.' decimals,
/// '\n' line endings). `preamble` lines are emitted verbatim first.
std::string toCsv(const ErrorTable& table, const std::string& preamble);

/// Deterministic work distribution over sample indices; results must be
/// written to per-sample slots so the reduction order never depends on
/// scheduling. Rethrows the first worker exception.
void parallelForSamples(int samples, int threads,
                        const std::function<void(int)>& body);

}  // namespace spde
