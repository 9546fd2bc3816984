#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "sr1track/uli.hpp"
#include "test_support.hpp"

using namespace sr1;
using testutil::perturbed_cycle_vector;
using testutil::random_unit;

namespace {

Window canonical_window(int d) {
  std::vector<Vector> vs;
  for (int i = 0; i < d; ++i) vs.push_back(unit_vector(d, i));
  return Window(std::move(vs), 0);
}

std::vector<Vector> random_window_vectors(int d, int count, SeededRng& rng) {
  std::vector<Vector> vs;
  for (int i = 0; i < count; ++i) vs.push_back(random_unit(d, rng));
  return vs;
}

}  // namespace

TEST_CASE("window construction rejects degenerate vectors") {
  CHECK_THROWS_AS(Window({}, 0), error);
  CHECK_THROWS_AS(Window({{0.0, 0.0}}, 0), error);
  CHECK_THROWS_AS(Window({{1.0, 0.0}, {1.0}}, 0), error);
}

TEST_CASE("normalized_matrix") {
  const Window canonical = canonical_window(3);
  const std::vector<int> all{0, 1, 2};
  const SquareMatrix id = normalized_matrix(canonical, all);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(id.at(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

  const Window scaled({{2.0, 0.0}, {0.0, 3.0}}, 0);
  const SquareMatrix unit = normalized_matrix(scaled, std::vector<int>{0, 1});
  CHECK(unit.at(0, 0) == doctest::Approx(1.0));
  CHECK(unit.at(1, 1) == doctest::Approx(1.0));

  const Window slanted({{1.0, 1.0}, {1.0, 0.0}}, 0);
  const SquareMatrix v = normalized_matrix(slanted, std::vector<int>{0, 1});
  CHECK(v.at(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(v.at(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(v.at(0, 1) == doctest::Approx(1.0));
  CHECK(v.at(1, 1) == doctest::Approx(0.0));

  CHECK_THROWS_AS(normalized_matrix(slanted, std::vector<int>{1, 0}), error);
}

TEST_CASE("det_uli_score") {
  CHECK(det_uli_score(canonical_window(4), 4).score == doctest::Approx(1.0));

  // duplicate vector: the best subset discards it
  const Window dup({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 0);
  const SubsetScore dup_score = det_uli_score(dup, 2);
  CHECK(dup_score.score == doctest::Approx(1.0));
  CHECK(dup_score.subset == std::vector<int>{0, 2});

  const double eps = 1e-3;
  const Window nearly({{1.0, 0.0}, {1.0, eps}}, 0);
  CHECK(det_uli_score(nearly, 2).score ==
        doctest::Approx(eps / std::sqrt(1.0 + eps * eps)));

  CHECK_THROWS_AS(det_uli_score(Window({{1.0, 0.0}}, 0), 2), error);
}

TEST_CASE("eig_uli_score") {
  CHECK(eig_uli_score(canonical_window(5), 5).score == doctest::Approx(1.0));

  // cyclic shift of the basis: a permutation matrix, all |lambda| = 1
  std::vector<Vector> shifted;
  for (int i = 0; i < 4; ++i) shifted.push_back(unit_vector(4, (i + 1) % 4));
  CHECK(eig_uli_score(Window(std::move(shifted), 0), 4).score == doctest::Approx(1.0));

  // nearly parallel pair: check against the two-sided conversion instead of
  // a hand eigenvalue
  const double eps = 1e-3;
  const Window nearly({{1.0, 0.0}, {1.0, eps}}, 0);
  const double beta = eig_uli_score(nearly, 2).score;
  const double alpha = det_uli_score(nearly, 2).score;
  CHECK(beta_to_alpha(beta, 2) <= alpha + 1e-9);
  CHECK(beta >= alpha_to_beta(alpha, 2) - 1e-9);
}

TEST_CASE("score conversions") {
  CHECK(beta_to_alpha(1.0, 5) == doctest::Approx(1.0));
  CHECK(beta_to_alpha(0.5, 3) == doctest::Approx(0.125));
  CHECK(beta_to_alpha(0.0, 4) == 0.0);
  CHECK(alpha_to_beta(1.0, 1) == doctest::Approx(1.0));
  CHECK(alpha_to_beta(1.0, 4) == doctest::Approx(0.125));
  CHECK(alpha_to_beta(0.0, 6) == 0.0);
}

TEST_CASE("gamma_bound") {
  CHECK(gamma_bound(1.0, 4) == doctest::Approx(2.0));
  CHECK(gamma_bound(0.5, 4) == doctest::Approx(4.0));
  CHECK(gamma_bound(1.0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(gamma_bound(0.0, 4), error);
}

TEST_CASE("span_coefficients") {
  SUBCASE("window member") {
    const Window w = canonical_window(3);
    const SpanCoefficients c = span_coefficients(w, unit_vector(3, 1), 3);
    CHECK(c.coefficients[1] == doctest::Approx(1.0));
    CHECK(c.abs_sum == doctest::Approx(1.0));
  }
  SUBCASE("diagonal direction over the canonical plane") {
    const Window w = canonical_window(2);
    const SpanCoefficients c = span_coefficients(w, {1.0, 1.0}, 2);
    CHECK(c.coefficients[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.coefficients[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.abs_sum == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("vector outside the window span") {
    const Window w({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}}, 0);
    CHECK_THROWS_AS(span_coefficients(w, {0.0, 0.0, 1.0}, 3), error);
  }
  SUBCASE("reconstruction residual stays tiny") {
    SeededRng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const int d = 2 + static_cast<int>(rng.next_u64() % 5);
      const int len = d + static_cast<int>(rng.next_u64() % (d + 1));
      const Window w(random_window_vectors(d, len, rng), 0);
      const Vector x = random_unit(d, rng);
      SpanCoefficients c{};
      try {
        c = span_coefficients(w, x, d);
      } catch (const error&) {
        continue;  // no usable subset in this draw
      }
      Vector rebuilt(d, 0.0);
      for (int i = 0; i < w.size(); ++i) {
        const Vector& v = w.at(i);
        const double nn = norm(v);
        for (int cidx = 0; cidx < d; ++cidx) rebuilt[cidx] += c.coefficients[i] * v[cidx] / nn;
      }
      double resid = 0.0;
      for (int i = 0; i < d; ++i) resid += (rebuilt[i] - x[i]) * (rebuilt[i] - x[i]);
      CHECK(std::sqrt(resid) <= 1e-8);
    }
  }
}

TEST_CASE("two-sided score conversion on random normalized matrices") {
  SeededRng rng(2717);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + static_cast<int>(rng.next_u64() % 5);
    std::vector<Vector> vs = random_window_vectors(d, d, rng);
    const Window w(std::move(vs), 0);
    std::vector<int> all(d);
    for (int i = 0; i < d; ++i) all[i] = i;
    const SquareMatrix v = normalized_matrix(w, all);
    const double alpha = std::abs(determinant(v));
    double beta = std::numeric_limits<double>::infinity();
    double rho = 0.0;
    for (const std::complex<double>& lam : eigenvalues(v)) {
      beta = std::min(beta, std::abs(lam));
      rho = std::max(rho, std::abs(lam));
    }
    CHECK(beta_to_alpha(beta, d) <= alpha + 1e-9);
    CHECK(beta >= alpha_to_beta(alpha, d) - 1e-9);
    CHECK(rho <= std::sqrt(static_cast<double>(d)) + 1e-9);
  }
}

TEST_CASE("eigenvalue-score constant is not a universal coefficient cap") {
  // Single-subset window whose basis matrix is far from normal. Its smallest
  // eigenvalue modulus (0.9) exceeds its smallest singular value, so the
  // coefficient mass of an adversarial unit vector can exceed sqrt(d)/beta.
  // The cap does hold for normal bases (permutation windows, orthogonal
  // columns), which is what the tracking runs rely on.
  const Window w({{1.0, 0.0}, {0.436, 0.9}}, 0);
  const double beta = eig_uli_score(w, 2).score;
  CHECK(beta == doctest::Approx(0.9).epsilon(1e-3));
  const SpanCoefficients c = span_coefficients(w, {0.0, 1.0}, 2);
  CHECK(c.abs_sum > gamma_bound(beta, 2));
  CHECK(c.abs_sum < 1.02 * gamma_bound(beta, 2));
}

TEST_CASE("sequence profiles") {
  SUBCASE("cyclic canonical directions stay perfectly independent") {
    const int d = 5;
    std::vector<Vector> seq;
    for (int k = 0; k < 25; ++k) seq.push_back(unit_vector(d, k % d));
    const SequenceUliProfile profile = sequence_uli_profile(seq, d - 1, d);
    CHECK(profile.windows.size() == seq.size() - d + 1);
    CHECK(profile.beta_hat == doctest::Approx(1.0));
    for (const UliReport& r : profile.windows) CHECK(r.beta_eig == doctest::Approx(1.0));
  }
  SUBCASE("a constant sequence is fully dependent") {
    std::vector<Vector> seq(8, unit_vector(3, 0));
    const SequenceUliProfile profile = sequence_uli_profile(seq, 2, 3);
    CHECK(profile.beta_hat == 0.0);
    for (const UliReport& r : profile.windows) {
      CHECK(r.beta_eig == 0.0);
      CHECK(std::isinf(r.gamma_bound));
    }
  }
  SUBCASE("window reports respect the two-sided score conversion") {
    SeededRng rng(4444);
    std::vector<Vector> seq;
    for (int k = 0; k < 40; ++k) seq.push_back(random_unit(3, rng));
    const SequenceUliProfile profile = sequence_uli_profile(seq, 4, 3);
    for (const UliReport& r : profile.windows) {
      CHECK(beta_to_alpha(r.beta_eig, 3) <= r.alpha_det + 1e-9);
      CHECK(r.beta_eig >= alpha_to_beta(r.alpha_det, 3) - 1e-9);
    }
  }
}

TEST_CASE("slowly degenerating cycle: scores decay, part of the span stays cheap") {
  const int d = 4;
  std::vector<Vector> seq;
  for (int k = 0; k < 400; ++k) seq.push_back(perturbed_cycle_vector(k, d));
  const SequenceUliProfile profile = sequence_uli_profile(seq, d - 1, d);

  // beta decays roughly like the perturbation itself
  CHECK(profile.windows.front().beta_eig > profile.windows.back().beta_eig);
  CHECK(profile.beta_hat < 0.3);
  CHECK(profile.beta_hat > 0.0);

  // coefficients along the surviving span stay bounded at every k; the
  // escaping coordinate costs about 2k
  for (int k : {37, 101, 333}) {
    Window w(std::vector<Vector>(seq.begin() + k, seq.begin() + k + d), k);
    const SpanCoefficients cheap = span_coefficients(w, unit_vector(d, 0), d);
    CHECK(cheap.abs_sum <= std::sqrt(static_cast<double>(d)) + 1e-6);
    const SpanCoefficients costly = span_coefficients(w, unit_vector(d, d - 1), d);
    CHECK(costly.abs_sum >= static_cast<double>(k));
    CHECK(costly.abs_sum <= 2.2 * (k + d));
  }
}
