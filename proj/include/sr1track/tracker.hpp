#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "sr1track/oracles.hpp"
#include "sr1track/sr1.hpp"

namespace sr1 {

/// Triangular table of drift moduli eta(k,l) = sup over i in [k,l] of
/// ||A_i - A_k|| in the operator norm, for 0 <= k <= l <= horizon.
class EtaProfile {
public:
  EtaProfile(const std::function<SymMatrix(int)>& matrix_at, int horizon);
  EtaProfile(const MatrixProvider& provider, int horizon);

  int horizon() const noexcept { return horizon_; }
  double eta(int k, int l) const;

  /// Finite-horizon stand-in for the tail supremum: eta(k, horizon).
  double eta_star_finite(int k) const { return eta(k, horizon_); }

private:
  int horizon_;
  std::vector<double> table_;  // rows k, entries l = k..horizon
  std::vector<std::size_t> row_start_;
};

struct StepRecord {
  int k = 0;
  UpdateOutcome outcome{UpdateStatus::applied, 1.0, 0.0};
  double dist_op = std::numeric_limits<double>::quiet_NaN();
  double dist_fro = std::numeric_limits<double>::quiet_NaN();
};

/// One window-level comparison of ||B_{k+m} - A*|| against the quantitative
/// bound evaluated with the observed cosine, beta_hat and drift modulus.
struct WindowCheck {
  int k = 0;
  double eta_star = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct TrackReport {
  int dim = 0;
  int steps = 0;
  int window = 0;
  bool has_reference = false;
  bool eta_tail_sound = false;  // drift tail analytically covered
  bool aborted = false;
  std::string abort_reason;

  std::vector<StepRecord> step_records;

  std::vector<WindowCheck> limit_checks;
  long limit_violations = 0;  // counted only on sound, in-scope runs

  long drift_checks = 0;
  long drift_violations = 0;
  double drift_worst_ratio = 0.0;  // max lhs/allowance over checked pairs

  double beta_hat = std::numeric_limits<double>::quiet_NaN();
  double min_cosine = 1.0;
  long applied = 0;
  long skipped = 0;
  long noops = 0;
  bool bounds_in_scope = false;  // zero skips and beta_hat > 0

  double final_dist_op = std::numeric_limits<double>::quiet_NaN();
  double final_dist_fro = std::numeric_limits<double>::quiet_NaN();
  SymMatrix final_matrix = SymMatrix(1);

  std::string to_csv() const;
  std::string to_json_string() const;
};

struct TrackOptions {
  int steps = 20;
  SkipPolicy policy{};
  // Window size m for the independence profile and the limit checks.
  // -1 selects dim: the window-level comparison needs m >= dim so that
  // B_{k+m} has already absorbed a spanning set of window directions.
  int window = -1;
  bool check_bounds = true;
};

/// Runs the rank-one update against the oracle for the requested number of
/// steps. With diagnostics available it fills distances to the limit, the
/// per-window limit checks and the per-pair drift checks; bound violations
/// are only counted on skip-free runs (and, for the limit checks, when the
/// drift tail is analytically covered). Oracle failures abort with a
/// partial report instead of throwing.
TrackReport track(SequenceOracle& oracle, const TrackOptions& options);

}  // namespace sr1
