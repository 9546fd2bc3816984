#pragma once

#include <span>
#include <vector>

#include "sr1track/linalg.hpp"

namespace sr1 {

/// A consecutive slice s_k .. s_{k+m} of a direction sequence. Vectors must
/// be nonzero (|s| >= 1e-300, so normalization cannot overflow).
class Window {
public:
  Window(std::vector<Vector> vectors, int start_index);

  int size() const noexcept { return static_cast<int>(vectors_.size()); }
  int dim() const noexcept { return static_cast<int>(vectors_.front().size()); }
  int start_index() const noexcept { return start_index_; }
  const Vector& at(int i) const { return vectors_.at(i); }

private:
  std::vector<Vector> vectors_;
  int start_index_;
};

/// Best subset score over the d-subsets of a window. Exhaustive enumeration
/// up to 20000 candidate subsets, greedy column-pivoted selection beyond
/// that (then the score is a lower bound on the true optimum).
struct SubsetScore {
  double score = 0.0;
  std::vector<int> subset;  // positions within the window, strictly increasing
  bool exhaustive = true;
};

struct UliReport {
  int start_index = 0;
  double alpha_det = 0.0;  // best normalized |det|
  double beta_eig = 0.0;   // best smallest eigenvalue modulus
  double gamma_bound = 0.0;  // sqrt(d)/beta_eig (+inf when beta_eig = 0)
  std::vector<int> alpha_subset;
  std::vector<int> beta_subset;
  bool exhaustive = true;
};

/// Coefficients expressing x/|x| over the normalized vectors of one window.
/// Positions outside the chosen basis subset carry coefficient zero.
struct SpanCoefficients {
  std::vector<double> coefficients;  // one per window position
  double abs_sum = 0.0;
  std::vector<int> basis_indices;
};

struct SequenceUliProfile {
  std::vector<UliReport> windows;  // one per k in [0, horizon - m - 1]
  double beta_hat = 0.0;           // min over windows of beta_eig
  double alpha_hat = 0.0;          // min over windows of alpha_det
};

/// d x d matrix whose i-th column is the unit vector along the subset's
/// i-th selected window vector.
SquareMatrix normalized_matrix(const Window& w, std::span<const int> subset);

/// Determinant-based independence score: max |det(normalized_matrix)| over
/// d-subsets.
SubsetScore det_uli_score(const Window& w, int dim);

/// Eigenvalue-based independence score: max over d-subsets of the smallest
/// eigenvalue modulus of the normalized matrix.
SubsetScore eig_uli_score(const Window& w, int dim);

/// beta^d: an eigenvalue score guarantees at least this determinant score.
double beta_to_alpha(double beta, int dim);

/// alpha / d^((d-1)/2): a determinant score guarantees at least this
/// eigenvalue score.
double alpha_to_beta(double alpha, int dim);

/// sqrt(d)/beta. Throws for beta <= 0.
double gamma_bound(double beta, int dim);

/// Expresses x/|x| over the best-determinant subset of the window by a
/// linear solve. Throws errc::not_in_span when no subset has determinant
/// score above 1e-12.
SpanCoefficients span_coefficients(const Window& w, const Vector& x, int dim);

/// Per-start-index reports over a finite horizon (the span's length).
/// Windows that fail (zero vector, no usable subset) yield zeroed reports.
SequenceUliProfile sequence_uli_profile(std::span<const Vector> s, int m, int dim);

}  // namespace sr1
