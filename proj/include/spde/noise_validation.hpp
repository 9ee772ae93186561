#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spde/noise.hpp"

namespace spde {

/// One statistical check: `estimate` against `expected` with the acceptance
/// `tolerance` whose meaning is spelled out in `detail` (3-standard-error
/// band, relative error, chi-square threshold, ...).
struct CheckResult {
  std::string name;
  double estimate = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  double zscore = 0.0;
  bool pass = true;
  std::string detail;
};

struct NoiseValidationReport {
  std::vector<CheckResult> checks;
  bool allPass() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Runs the full distributional test suite of the noise generators:
/// fBm increment law (variance, lag correlations, full small-grid
/// covariance against the definition-based oracle, Brownian limit),
/// field Parseval identity, Poisson jump counts and binning, the jump
/// Ito isometry, compensator consistency, and coarsening laws.
/// `base_samples` scales the large batches (default 100000); smaller
/// auxiliary batches use base_samples / 10.
NoiseValidationReport validateNoise(const FbmSpec& fbm, const JumpModel& jump,
                                    const Mesh1D& mesh, std::uint64_t seed,
                                    int base_samples = 100000);

/// Covariance of fBm increments over a uniform grid, built directly from
/// the defining covariance 1/2 (|t|^{2H} + |s|^{2H} - |t-s|^{2H});
/// independent route used as the oracle for the generator tests.
double fbmIncrementCovarianceFromDefinition(double hurst, double dt, int i,
                                            int j);

}  // namespace spde
