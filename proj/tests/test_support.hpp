#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "sr1track/linalg.hpp"
#include "sr1track/rng.hpp"

namespace testutil {

inline sr1::SymMatrix sym_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int d = static_cast<int>(rows.size());
  sr1::SymMatrix m(d);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) {
      if (j >= i) m.set(i, j, v);
      ++j;
    }
    ++i;
  }
  return m;
}

inline sr1::SquareMatrix square_from(std::initializer_list<std::initializer_list<double>> rows) {
  const int d = static_cast<int>(rows.size());
  sr1::SquareMatrix m(d);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m.at(i, j++) = v;
    ++i;
  }
  return m;
}

inline sr1::SquareMatrix random_square(int d, sr1::SeededRng& rng) {
  sr1::SquareMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m.at(i, j) = rng.next_gaussian();
  return m;
}

inline sr1::Vector random_unit(int d, sr1::SeededRng& rng) {
  sr1::Vector v(d);
  double n = 0.0;
  do {
    for (double& x : v) x = rng.next_gaussian();
    n = sr1::norm(v);
  } while (!(n > 1e-8));
  for (double& x : v) x /= n;
  return v;
}

/// Cyclic canonical directions with the last slot replaced by
/// e_0 + (1/k) e_{d-1}: the windows degenerate slowly, so the independence
/// scores decay while part of the space stays cheaply representable.
inline sr1::Vector perturbed_cycle_vector(int k, int d) {
  const int r = k % d;
  if (r != d - 1) return sr1::unit_vector(d, r);
  sr1::Vector v = sr1::unit_vector(d, 0);
  v[d - 1] = 1.0 / k;
  return v;
}

}  // namespace testutil
