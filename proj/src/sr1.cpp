#include "sr1track/sr1.hpp"

#include <algorithm>
#include <cmath>

namespace sr1 {

namespace {

void check_curvature_constant(double c) {
  if (!(c > 0.0) || c > 1.0)
    fail(errc::invalid_argument, "curvature constant c must lie in (0,1]");
}

}  // namespace

const char* to_string(UpdateStatus status) {
  switch (status) {
    case UpdateStatus::applied: return "applied";
    case UpdateStatus::skipped_low_cosine: return "skipped_low_cosine";
    case UpdateStatus::noop_zero_residual: return "noop_zero_residual";
  }
  return "unknown";
}

double curvature_cosine(const Vector& s, const Vector& r) {
  const double sn = norm(s);
  if (!(sn > 1e-300)) fail(errc::degenerate_direction, "curvature_cosine: zero direction s");
  const double rn = norm(r);
  if (rn == 0.0) return 1.0;
  const double c = std::abs(dot(r, s)) / (rn * sn);
  return std::min(c, 1.0);
}

UpdateOutcome Sr1State::update(const Vector& s, const Vector& y, const SkipPolicy& policy) {
  if (static_cast<int>(s.size()) != dim() || static_cast<int>(y.size()) != dim())
    fail(errc::dimension_mismatch, "Sr1State::update: dimension mismatch");
  if (!all_finite(s) || !all_finite(y))
    fail(errc::invalid_argument, "Sr1State::update: non-finite input");
  const double sn = norm(s);
  if (!(sn > 1e-300)) fail(errc::degenerate_direction, "Sr1State::update: zero direction s");

  const Vector bs = b_.apply(s);
  Vector r(dim());
  for (int i = 0; i < dim(); ++i) r[i] = y[i] - bs[i];
  const double rn = norm(r);

  if (rn <= policy.r_floor * (1.0 + norm(y))) {
    ++noops_;
    return {UpdateStatus::noop_zero_residual, 1.0, rn};
  }

  const double cosine = curvature_cosine(s, r);
  if (cosine < policy.c_min) {
    ++skipped_;
    return {UpdateStatus::skipped_low_cosine, cosine, rn};
  }

  b_.add_scaled_outer(r, 1.0 / dot(r, s));
  ++applied_;
  min_cosine_ = std::min(min_cosine_, cosine);
  return {UpdateStatus::applied, cosine, rn};
}

double error_constant(double c, int m) {
  check_curvature_constant(c);
  if (m < 0) fail(errc::invalid_argument, "error_constant: window size must be >= 0");
  return 1.0 + std::pow((2.0 + c) / c, m + 1);
}

double direction_drift_bound(double c, long k, long l, double eta_kl_minus1, double s_norm) {
  check_curvature_constant(c);
  if (l < k + 1) fail(errc::invalid_argument, "direction_drift_bound: requires l >= k+1");
  if (eta_kl_minus1 < 0.0 || s_norm < 0.0)
    fail(errc::invalid_argument, "direction_drift_bound: negative modulus");
  return std::pow((2.0 + c) / c, static_cast<double>(l - k - 1)) * eta_kl_minus1 * s_norm;
}

double span_error_bound(double c, int m, double eta_star, double coeff_abs_sum) {
  if (eta_star < 0.0 || coeff_abs_sum < 0.0)
    fail(errc::invalid_argument, "span_error_bound: negative argument");
  return eta_star * error_constant(c, m) * coeff_abs_sum;
}

double limit_error_bound(double c, int m, int dim, double beta, double eta_star) {
  if (dim < 1) fail(errc::invalid_argument, "limit_error_bound: dimension must be >= 1");
  if (!(beta > 0.0)) fail(errc::invalid_argument, "limit_error_bound: beta must be > 0");
  if (eta_star < 0.0) fail(errc::invalid_argument, "limit_error_bound: negative eta");
  return error_constant(c, m) * std::sqrt(static_cast<double>(dim)) / beta * eta_star;
}

}  // namespace sr1
