#pragma once

#include "sr1track/linalg.hpp"

namespace sr1 {

/// Guard rails for the rank-one update. An update is a no-op when the
/// residual is already negligible, and is skipped (recorded, not applied)
/// when the curvature cosine |r.s|/(|r||s|) falls below c_min.
struct SkipPolicy {
  double c_min = 1e-8;
  double r_floor = 1e-13;
};

enum class UpdateStatus { applied, skipped_low_cosine, noop_zero_residual };

struct UpdateOutcome {
  UpdateStatus status;
  double cosine;         // 1 for a vacuous (zero-residual) step
  double residual_norm;  // |y - B s| before the update
};

const char* to_string(UpdateStatus status);

/// |r.s| / (|r||s|), clamped to [0,1]; returns 1 when r = 0 (the secant
/// equation already holds, so the curvature hypothesis is vacuous).
/// Throws errc::degenerate_direction when s = 0.
double curvature_cosine(const Vector& s, const Vector& r);

/// Rank-one secant approximation state. Starts at the identity; every
/// applied update B += r r^T / (r.s) with r = y - B s enforces B s = y.
class Sr1State {
public:
  explicit Sr1State(int dim) : b_(SymMatrix::identity(dim)) {}

  UpdateOutcome update(const Vector& s, const Vector& y, const SkipPolicy& policy = {});

  const SymMatrix& matrix() const noexcept { return b_; }
  int dim() const noexcept { return b_.dim(); }
  long updates_applied() const noexcept { return applied_; }
  long updates_skipped() const noexcept { return skipped_; }
  long updates_noop() const noexcept { return noops_; }

  /// Smallest cosine among applied updates; vacuous steps do not count.
  double min_cosine_observed() const noexcept { return min_cosine_; }

private:
  SymMatrix b_;
  long applied_ = 0;
  long skipped_ = 0;
  long noops_ = 0;
  double min_cosine_ = 1.0;
};

inline Sr1State sr1_init(int dim) { return Sr1State(dim); }

/// ((2+c)/c)^(m+1) + 1; the window constant multiplying the drift modulus.
/// Strictly decreasing in c, strictly increasing in m. May overflow to +inf
/// for small c, which stays a valid upper bound.
double error_constant(double c, int m);

/// Bound on |(A_k - B_l) s_k| for l >= k+1 in terms of the drift eta over
/// [k, l-1]: ((2+c)/c)^(l-k-1) * eta * |s_k|.
double direction_drift_bound(double c, long k, long l, double eta_kl_minus1, double s_norm);

/// Bound on |B_{k+m} x - A* x| / |x| for x combined from one window with
/// coefficient l1-mass coeff_abs_sum: eta_star * error_constant * sum.
double span_error_bound(double c, int m, double eta_star, double coeff_abs_sum);

/// Bound on ||B_{k+m} - A*||: error_constant(c,m) * sqrt(d)/beta * eta_star.
double limit_error_bound(double c, int m, int dim, double beta, double eta_star);

}  // namespace sr1
