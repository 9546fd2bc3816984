#include "sr1track/uli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace sr1 {

namespace {

constexpr long kExhaustiveSubsetCap = 20000;

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > 4 * kExhaustiveSubsetCap) return r;  // enough to decide the policy
  }
  return r;
}

void for_each_subset(int n, int d, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  while (true) {
    fn(idx);
    int i = d - 1;
    while (i >= 0 && idx[i] == n - d + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < d; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Greedy column-pivoted selection: repeatedly take the normalized window
// vector with the largest component orthogonal to the span chosen so far.
std::vector<int> greedy_subset(const Window& w, int d) {
  const int n = w.size();
  std::vector<Vector> residuals(n);
  for (int i = 0; i < n; ++i) {
    residuals[i] = w.at(i);
    const double nn = norm(residuals[i]);
    for (double& x : residuals[i]) x /= nn;
  }
  std::vector<int> chosen;
  std::vector<bool> used(n, false);
  std::vector<Vector> basis;
  for (int pick = 0; pick < d; ++pick) {
    int best = -1;
    double best_norm = -1.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double rn = norm(residuals[i]);
      if (rn > best_norm) {
        best_norm = rn;
        best = i;
      }
    }
    Vector q = residuals[best];
    const double qn = norm(q);
    if (qn > 1e-300)
      for (double& x : q) x /= qn;
    basis.push_back(q);
    used[best] = true;
    chosen.push_back(best);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double proj = dot(residuals[i], q);
      for (int c = 0; c < w.dim(); ++c) residuals[i][c] -= proj * q[c];
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

SubsetScore best_subset(const Window& w, int d,
                        const std::function<double(const SquareMatrix&)>& score_fn) {
  if (w.size() < d)
    fail(errc::invalid_argument, "window shorter than the space dimension");
  if (w.dim() != d)
    fail(errc::dimension_mismatch, "window vectors do not live in dimension d");

  SubsetScore best;
  if (binomial(w.size(), d) <= kExhaustiveSubsetCap) {
    best.exhaustive = true;
    for_each_subset(w.size(), d, [&](const std::vector<int>& subset) {
      const double s = score_fn(normalized_matrix(w, subset));
      if (s > best.score || best.subset.empty()) {
        best.score = s;
        best.subset = subset;
      }
    });
  } else {
    best.exhaustive = false;
    best.subset = greedy_subset(w, d);
    best.score = score_fn(normalized_matrix(w, best.subset));
  }
  return best;
}

}  // namespace

Window::Window(std::vector<Vector> vectors, int start_index)
    : vectors_(std::move(vectors)), start_index_(start_index) {
  if (vectors_.empty()) fail(errc::invalid_argument, "window must hold at least one vector");
  const std::size_t d = vectors_.front().size();
  if (d == 0) fail(errc::invalid_argument, "window vectors must have dimension >= 1");
  for (const Vector& v : vectors_) {
    if (v.size() != d) fail(errc::dimension_mismatch, "window vectors of unequal dimension");
    if (!all_finite(v)) fail(errc::invalid_argument, "window vector with non-finite entry");
    if (!(norm(v) >= 1e-300))
      fail(errc::invalid_argument, "window vector too small to normalize");
  }
}

SquareMatrix normalized_matrix(const Window& w, std::span<const int> subset) {
  const int d = w.dim();
  if (static_cast<int>(subset.size()) != d)
    fail(errc::invalid_argument, "subset size must equal the space dimension");
  SquareMatrix m(d);
  int prev = -1;
  for (int c = 0; c < d; ++c) {
    const int pos = subset[c];
    if (pos <= prev || pos >= w.size())
      fail(errc::invalid_argument, "subset must be strictly increasing within the window");
    prev = pos;
    Vector col = w.at(pos);
    const double nn = norm(col);
    for (double& x : col) x /= nn;
    m.set_column(c, col);
  }
  return m;
}

SubsetScore det_uli_score(const Window& w, int dim) {
  return best_subset(w, dim,
                     [](const SquareMatrix& v) { return std::abs(determinant(v)); });
}

SubsetScore eig_uli_score(const Window& w, int dim) {
  return best_subset(w, dim, [](const SquareMatrix& v) { return min_eig_modulus(v); });
}

double beta_to_alpha(double beta, int dim) {
  if (beta < 0.0) fail(errc::invalid_argument, "beta_to_alpha: beta must be >= 0");
  if (dim < 1) fail(errc::invalid_argument, "beta_to_alpha: dimension must be >= 1");
  return std::pow(beta, dim);
}

double alpha_to_beta(double alpha, int dim) {
  if (alpha < 0.0) fail(errc::invalid_argument, "alpha_to_beta: alpha must be >= 0");
  if (dim < 1) fail(errc::invalid_argument, "alpha_to_beta: dimension must be >= 1");
  return alpha / std::pow(static_cast<double>(dim), (dim - 1) / 2.0);
}

double gamma_bound(double beta, int dim) {
  if (dim < 1) fail(errc::invalid_argument, "gamma_bound: dimension must be >= 1");
  if (!(beta > 0.0)) fail(errc::invalid_argument, "gamma_bound: beta must be > 0");
  return std::sqrt(static_cast<double>(dim)) / beta;
}

SpanCoefficients span_coefficients(const Window& w, const Vector& x, int dim) {
  if (static_cast<int>(x.size()) != dim)
    fail(errc::dimension_mismatch, "span_coefficients: x has wrong dimension");
  const double xn = norm(x);
  if (!(xn > 1e-300)) fail(errc::invalid_argument, "span_coefficients: x must be nonzero");

  const SubsetScore det = det_uli_score(w, dim);
  if (!(det.score > 1e-12))
    fail(errc::not_in_span, "span_coefficients: window has no nonsingular subset");

  Vector xhat = x;
  for (double& v : xhat) v /= xn;
  const SquareMatrix v = normalized_matrix(w, det.subset);
  const Vector lambda = lu_solve(v, xhat);

  SpanCoefficients out;
  out.coefficients.assign(w.size(), 0.0);
  out.basis_indices = det.subset;
  for (int c = 0; c < dim; ++c) {
    out.coefficients[det.subset[c]] = lambda[c];
    out.abs_sum += std::abs(lambda[c]);
  }
  return out;
}

SequenceUliProfile sequence_uli_profile(std::span<const Vector> s, int m, int dim) {
  if (m < 0) fail(errc::invalid_argument, "sequence_uli_profile: m must be >= 0");
  const int horizon = static_cast<int>(s.size());
  if (horizon < m + 1)
    fail(errc::invalid_argument, "sequence_uli_profile: horizon shorter than a window");

  SequenceUliProfile profile;
  profile.beta_hat = std::numeric_limits<double>::infinity();
  profile.alpha_hat = std::numeric_limits<double>::infinity();
  for (int k = 0; k + m < horizon; ++k) {
    UliReport report;
    report.start_index = k;
    try {
      Window w(std::vector<Vector>(s.begin() + k, s.begin() + k + m + 1), k);
      const SubsetScore det = det_uli_score(w, dim);
      const SubsetScore eig = eig_uli_score(w, dim);
      report.alpha_det = det.score;
      report.alpha_subset = det.subset;
      report.beta_eig = eig.score;
      report.beta_subset = eig.subset;
      report.exhaustive = det.exhaustive && eig.exhaustive;
      report.gamma_bound = report.beta_eig > 0.0
                               ? gamma_bound(report.beta_eig, dim)
                               : std::numeric_limits<double>::infinity();
    } catch (const error&) {
      // degenerate window (zero vector or wrong size): scored as fully
      // dependent rather than aborting the profile
      report = UliReport{};
      report.start_index = k;
      report.gamma_bound = std::numeric_limits<double>::infinity();
    }
    profile.beta_hat = std::min(profile.beta_hat, report.beta_eig);
    profile.alpha_hat = std::min(profile.alpha_hat, report.alpha_det);
    profile.windows.push_back(std::move(report));
  }
  return profile;
}

}  // namespace sr1
