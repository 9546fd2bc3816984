#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sr1track/errors.hpp"

namespace sr1 {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

/// Canonical basis vector e_index in dimension dim.
Vector unit_vector(int dim, int index);

/// Dense symmetric matrix. Only the upper triangle is stored, so symmetry
/// cannot drift no matter what is written into it.
class SymMatrix {
public:
  explicit SymMatrix(int dim);
  static SymMatrix identity(int dim);

  int dim() const noexcept { return dim_; }

  double operator()(int i, int j) const { return packed_[index(i, j)]; }
  void set(int i, int j, double value) { packed_[index(i, j)] = value; }

  /// y = M x
  Vector apply(const Vector& x) const;

  /// M += alpha * r r^T
  void add_scaled_outer(const Vector& r, double alpha);

  std::span<const double> packed() const noexcept { return packed_; }

private:
  std::size_t index(int i, int j) const;

  int dim_;
  std::vector<double> packed_;  // row-major upper triangle, dim*(dim+1)/2
};

/// Dense square matrix, row-major.
class SquareMatrix {
public:
  explicit SquareMatrix(int dim);
  static SquareMatrix identity(int dim);
  static SquareMatrix from_sym(const SymMatrix& m);

  int dim() const noexcept { return dim_; }

  double& at(int i, int j) { return data_[static_cast<std::size_t>(i) * dim_ + j]; }
  double at(int i, int j) const { return data_[static_cast<std::size_t>(i) * dim_ + j]; }

  Vector apply(const Vector& x) const;
  void set_column(int j, const Vector& col);

  std::span<const double> data() const noexcept { return data_; }

private:
  int dim_;
  std::vector<double> data_;
};

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);

struct SymEigenSystem {
  std::vector<double> values;  // ascending
  SquareMatrix vectors;        // columns are the corresponding eigenvectors
};

/// Cyclic Jacobi. Throws errc::no_convergence after the sweep cap.
SymEigenSystem sym_eigensystem(const SymMatrix& m);
std::vector<double> sym_eigenvalues(const SymMatrix& m);

/// max |eigenvalue|; the induced-2 norm for symmetric matrices.
double operator_norm(const SymMatrix& m);

double frobenius_norm(const SymMatrix& m);
double frobenius_distance(const SymMatrix& a, const SymMatrix& b);

/// LU with partial pivoting; a singular matrix reports determinant 0.
double determinant(const SquareMatrix& v);

/// All complex eigenvalues via Householder Hessenberg reduction followed by
/// implicit double-shift QR. Throws errc::no_convergence at the step cap.
std::vector<std::complex<double>> eigenvalues(const SquareMatrix& v);

/// min |lambda| over the complex eigenvalues of v.
double min_eig_modulus(const SquareMatrix& v);

/// Solve V x = b. Throws errc::singular_matrix when a pivot falls below
/// 1e-14 * ||V||_F.
Vector lu_solve(const SquareMatrix& v, const Vector& b);

SquareMatrix inverse(const SquareMatrix& v);

/// Inverse of a symmetric matrix, re-symmetrized into packed storage.
SymMatrix sym_inverse(const SymMatrix& m);

}  // namespace sr1
