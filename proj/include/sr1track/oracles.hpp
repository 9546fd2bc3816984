#pragma once

#include <functional>
#include <memory>

#include "sr1track/linalg.hpp"

namespace sr1 {

/// A convergent sequence of symmetric matrices, addressable by step index.
class MatrixProvider {
public:
  virtual ~MatrixProvider() = default;
  virtual int dim() const = 0;
  virtual SymMatrix matrix(int k) const = 0;
  virtual SymMatrix limit() const = 0;

  /// When true, tail_bound(k) bounds sup over the infinite tail beyond any
  /// finite horizon of ||A_i - A_k||, making finite-horizon drift moduli
  /// sound after adding it.
  virtual bool has_tail_bound() const { return false; }
  virtual double tail_bound(int /*k*/) const {
    fail(errc::invalid_argument, "provider has no analytic tail bound");
  }
};

class ConstantProvider : public MatrixProvider {
public:
  explicit ConstantProvider(SymMatrix a) : a_(std::move(a)) {}
  int dim() const override { return a_.dim(); }
  SymMatrix matrix(int) const override { return a_; }
  SymMatrix limit() const override { return a_; }
  bool has_tail_bound() const override { return true; }
  double tail_bound(int) const override { return 0.0; }

private:
  SymMatrix a_;
};

/// View of a sequence starting `offset` steps in. The seeded benchmark runs
/// consume perturbed sequences from index 1, so the first observed
/// perturbation is already decayed once; this matches the reference tables
/// the experiments reproduce.
std::shared_ptr<const MatrixProvider> shifted_provider(
    std::shared_ptr<const MatrixProvider> inner, int offset);

struct Sample {
  Vector s;
  Vector y;
};

/// Produces the (s_k, y_k) pairs fed to the rank-one update, plus optional
/// diagnostics: the matrix whose action y_k = M_k s_k reports, and its limit.
class SequenceOracle {
public:
  virtual ~SequenceOracle() = default;
  virtual int dim() const = 0;
  virtual Sample sample(int k) = 0;

  virtual bool has_reference() const { return false; }
  virtual SymMatrix reference_matrix(int /*k*/) const {
    fail(errc::invalid_argument, "oracle has no reference matrices");
  }
  virtual SymMatrix reference_limit() const {
    fail(errc::invalid_argument, "oracle has no reference limit");
  }

  virtual bool has_tail_bound() const { return false; }
  virtual double tail_bound(int /*k*/) const {
    fail(errc::invalid_argument, "oracle has no analytic tail bound");
  }
};

/// e_{k mod dim}.
Vector cyclic_direction(int k, int dim);

/// s_k supplied by direction_fn, y_k = A_k s_k. Tracks the providers limit.
std::unique_ptr<SequenceOracle> direct_oracle(std::shared_ptr<const MatrixProvider> provider,
                                              std::function<Vector(int)> direction_fn);

/// direct_oracle with the cyclic canonical directions.
std::unique_ptr<SequenceOracle> cyclic_oracle(std::shared_ptr<const MatrixProvider> provider);

/// s_k = A_k e_{k mod d}, y_k = e_{k mod d}; tracks the inverse of the limit.
std::unique_ptr<SequenceOracle> inverse_oracle(std::shared_ptr<const MatrixProvider> provider);

/// y_k Gaussian from a per-step derived stream, s_k = A_k y_k; tracks the
/// inverse of the limit.
std::unique_ptr<SequenceOracle> random_direction_oracle(
    std::shared_ptr<const MatrixProvider> provider, uint64_t seed);

/// s_k = x_{k+1} - x_k, y_k = grad(x_{k+1}) - grad(x_k). No reference
/// matrices (the averaged Hessian is unknowable in general).
std::unique_ptr<SequenceOracle> secant_oracle(std::function<Vector(const Vector&)> grad,
                                              std::vector<Vector> iterates);

/// Secant oracle for the quadratic 0.5 x^T Q x, where the averaged Hessian
/// is exactly Q and diagnostics are available.
std::unique_ptr<SequenceOracle> quadratic_secant_oracle(SymMatrix q,
                                                        std::vector<Vector> iterates);

}  // namespace sr1
