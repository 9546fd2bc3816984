#include "sr1track/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace sr1 {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kJacobiSweepCap = 100;
constexpr int kQrStepsPerEigenvalue = 30;  // times dim

void check_dim(int dim) {
  if (dim < 1) fail(errc::invalid_argument, "matrix dimension must be >= 1");
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(errc::dimension_mismatch, "dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

Vector unit_vector(int dim, int index) {
  if (dim < 1 || index < 0 || index >= dim)
    fail(errc::invalid_argument, "unit_vector: index out of range");
  Vector e(dim, 0.0);
  e[index] = 1.0;
  return e;
}

SymMatrix::SymMatrix(int dim) : dim_(dim) {
  check_dim(dim);
  packed_.assign(static_cast<std::size_t>(dim) * (dim + 1) / 2, 0.0);
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.set(i, i, 1.0);
  return m;
}

std::size_t SymMatrix::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  // row-major upper triangle: row i starts at i*dim - i*(i-1)/2
  return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2 +
         (j - i);
}

Vector SymMatrix::apply(const Vector& x) const {
  if (static_cast<int>(x.size()) != dim_) fail(errc::dimension_mismatch, "SymMatrix::apply");
  Vector y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

void SymMatrix::add_scaled_outer(const Vector& r, double alpha) {
  if (static_cast<int>(r.size()) != dim_)
    fail(errc::dimension_mismatch, "SymMatrix::add_scaled_outer");
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j) packed_[idx++] += alpha * r[i] * r[j];
}

SquareMatrix::SquareMatrix(int dim) : dim_(dim) {
  check_dim(dim);
  data_.assign(static_cast<std::size_t>(dim) * dim, 0.0);
}

SquareMatrix SquareMatrix::identity(int dim) {
  SquareMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::from_sym(const SymMatrix& m) {
  SquareMatrix s(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s.at(i, j) = m(i, j);
  return s;
}

Vector SquareMatrix::apply(const Vector& x) const {
  if (static_cast<int>(x.size()) != dim_)
    fail(errc::dimension_mismatch, "SquareMatrix::apply");
  Vector y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

void SquareMatrix::set_column(int j, const Vector& col) {
  if (static_cast<int>(col.size()) != dim_ || j < 0 || j >= dim_)
    fail(errc::dimension_mismatch, "SquareMatrix::set_column");
  for (int i = 0; i < dim_; ++i) at(i, j) = col[i];
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) fail(errc::dimension_mismatch, "SymMatrix subtraction");
  SymMatrix d(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) d.set(i, j, a(i, j) - b(i, j));
  return d;
}

double frobenius_norm(const SymMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i) {
    s += m(i, i) * m(i, i);
    for (int j = i + 1; j < m.dim(); ++j) s += 2.0 * m(i, j) * m(i, j);
  }
  return std::sqrt(s);
}

double frobenius_distance(const SymMatrix& a, const SymMatrix& b) {
  return frobenius_norm(a - b);
}

SymEigenSystem sym_eigensystem(const SymMatrix& m) {
  const int n = m.dim();
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
  SquareMatrix vecs = SquareMatrix::identity(n);

  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };

  const double fro = frobenius_norm(m);
  const double off_target = 1e-15 * fro;

  int sweep = 0;
  for (; sweep < kJacobiSweepCap; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    off = std::sqrt(2.0 * off);
    if (off <= off_target) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= kEps * off_target + 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        const double app = A(p, p);
        const double aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = A(i, p);
          const double aiq = A(i, q);
          A(i, p) = c * aip - s * aiq;
          A(p, i) = A(i, p);
          A(i, q) = s * aip + c * aiq;
          A(q, i) = A(i, q);
        }
        for (int i = 0; i < n; ++i) {
          const double vip = vecs.at(i, p);
          const double viq = vecs.at(i, q);
          vecs.at(i, p) = c * vip - s * viq;
          vecs.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (sweep == kJacobiSweepCap)
    fail(errc::no_convergence,
         "Jacobi eigensolver did not converge within " + std::to_string(kJacobiSweepCap) +
             " sweeps");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x) < A(y, y); });

  SymEigenSystem out{std::vector<double>(n), SquareMatrix(n)};
  for (int k = 0; k < n; ++k) {
    out.values[k] = A(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.vectors.at(i, k) = vecs.at(i, order[k]);
  }
  return out;
}

std::vector<double> sym_eigenvalues(const SymMatrix& m) { return sym_eigensystem(m).values; }

double operator_norm(const SymMatrix& m) {
  double best = 0.0;
  for (double v : sym_eigenvalues(m)) best = std::max(best, std::abs(v));
  return best;
}

namespace {

struct LuFactors {
  SquareMatrix lu;
  std::vector<int> piv;
  int sign = 1;
  double min_pivot = 0.0;
  double frob = 0.0;
};

LuFactors lu_factor(const SquareMatrix& m) {
  const int n = m.dim();
  LuFactors f{m, std::vector<int>(n), 1, std::numeric_limits<double>::infinity(), 0.0};
  for (double x : m.data()) f.frob += x * x;
  f.frob = std::sqrt(f.frob);

  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(f.lu.at(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double cand = std::abs(f.lu.at(i, k));
      if (cand > best) {
        best = cand;
        p = i;
      }
    }
    f.piv[k] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu.at(k, j), f.lu.at(p, j));
      f.sign = -f.sign;
    }
    const double pivot = f.lu.at(k, k);
    f.min_pivot = std::min(f.min_pivot, std::abs(pivot));
    if (pivot == 0.0) continue;  // singular; leave the zero column as-is
    for (int i = k + 1; i < n; ++i) {
      f.lu.at(i, k) /= pivot;
      const double lik = f.lu.at(i, k);
      if (lik == 0.0) continue;
      for (int j = k + 1; j < n; ++j) f.lu.at(i, j) -= lik * f.lu.at(k, j);
    }
  }
  return f;
}

Vector lu_solve_factored(const LuFactors& f, const Vector& b) {
  const int n = f.lu.dim();
  Vector x = b;
  // the multipliers live in final row positions, so permute fully first
  for (int k = 0; k < n; ++k)
    if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) x[i] -= f.lu.at(i, k) * x[k];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu.at(i, j) * x[j];
    x[i] /= f.lu.at(i, i);
  }
  return x;
}

void check_solvable(const LuFactors& f) {
  if (f.min_pivot <= 1e-14 * f.frob)
    fail(errc::singular_matrix, "linear solve: matrix is singular to working precision");
}

// Householder similarity reduction to upper Hessenberg form, in place.
void hessenberg_reduce(SquareMatrix& h) {
  const int n = h.dim();
  std::vector<double> v(n, 0.0);
  for (int k = 0; k + 2 < n; ++k) {
    double scale = 0.0;
    for (int i = k + 1; i < n; ++i) scale += std::abs(h.at(i, k));
    if (scale == 0.0) continue;
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[i] = h.at(i, k) / scale;
      norm2 += v[i] * v[i];
    }
    double alpha = std::sqrt(norm2);
    if (v[k + 1] < 0.0) alpha = -alpha;
    v[k + 1] += alpha;
    const double vnorm2 = 2.0 * alpha * v[k + 1];  // |v|^2 after the shift
    if (vnorm2 == 0.0) continue;

    for (int j = k; j < n; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += v[i] * h.at(i, j);
      s *= 2.0 / vnorm2;
      for (int i = k + 1; i < n; ++i) h.at(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += h.at(i, j) * v[j];
      s *= 2.0 / vnorm2;
      for (int j = k + 1; j < n; ++j) h.at(i, j) -= s * v[j];
    }
    for (int i = k + 2; i < n; ++i) h.at(i, k) = 0.0;
  }
}

// Implicit double-shift QR on an upper Hessenberg matrix; eigenvalues only.
std::vector<std::complex<double>> hessenberg_eigenvalues(SquareMatrix h) {
  const int nn = h.dim();
  std::vector<std::complex<double>> out(nn);

  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h.at(i, j));

  const int iter_cap = kQrStepsPerEigenvalue * nn;
  int n = nn - 1;
  double exshift = 0.0;
  int iter = 0;

  while (n >= 0) {
    // look for a single small subdiagonal element
    int l = n;
    while (l > 0) {
      double s = std::abs(h.at(l - 1, l - 1)) + std::abs(h.at(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(h.at(l, l - 1)) < kEps * s) break;
      --l;
    }

    if (l == n) {
      out[n] = h.at(n, n) + exshift;
      --n;
      iter = 0;
      continue;
    }
    if (l == n - 1) {
      const double w = h.at(n, n - 1) * h.at(n - 1, n);
      double p = (h.at(n - 1, n - 1) - h.at(n, n)) / 2.0;
      const double q = p * p + w;
      double z = std::sqrt(std::abs(q));
      const double x = h.at(n, n) + exshift;
      if (q >= 0.0) {
        z = (p >= 0.0) ? p + z : p - z;
        double lam1 = x + z;
        double lam2 = (z != 0.0) ? x - w / z : lam1;
        out[n - 1] = lam1;
        out[n] = lam2;
      } else {
        out[n - 1] = std::complex<double>(x + p, z);
        out[n] = std::complex<double>(x + p, -z);
      }
      n -= 2;
      iter = 0;
      continue;
    }

    if (iter >= iter_cap)
      fail(errc::no_convergence,
           "QR eigensolver stalled after " + std::to_string(iter) + " steps");

    double x = h.at(n, n);
    double y = h.at(n - 1, n - 1);
    double w = h.at(n, n - 1) * h.at(n - 1, n);

    if (iter != 0 && iter % 10 == 0) {
      // exceptional shift
      exshift += x;
      for (int i = l; i <= n; ++i) h.at(i, i) -= x;
      double s = std::abs(h.at(n, n - 1)) + std::abs(h.at(n - 1, n - 2));
      x = y = 0.75 * s;
      w = -0.4375 * s * s;
    }
    ++iter;

    // two consecutive small subdiagonals let the sweep start late
    int m = n - 2;
    double p = 0.0, q = 0.0, r = 0.0;
    while (m >= l) {
      const double z = h.at(m, m);
      const double rr = x - z;
      const double ss = y - z;
      p = (rr * ss - w) / h.at(m + 1, m) + h.at(m, m + 1);
      q = h.at(m + 1, m + 1) - z - rr - ss;
      r = h.at(m + 2, m + 1);
      const double s = std::abs(p) + std::abs(q) + std::abs(r);
      p /= s;
      q /= s;
      r /= s;
      if (m == l) break;
      if (std::abs(h.at(m, m - 1)) * (std::abs(q) + std::abs(r)) <
          kEps * std::abs(p) *
              (std::abs(h.at(m - 1, m - 1)) + std::abs(z) + std::abs(h.at(m + 1, m + 1))))
        break;
      --m;
    }
    for (int i = m + 2; i <= n; ++i) {
      h.at(i, i - 2) = 0.0;
      if (i > m + 2) h.at(i, i - 3) = 0.0;
    }

    // double QR sweep over rows l..n
    for (int k = m; k <= n - 1; ++k) {
      const bool notlast = (k != n - 1);
      if (k != m) {
        p = h.at(k, k - 1);
        q = h.at(k + 1, k - 1);
        r = notlast ? h.at(k + 2, k - 1) : 0.0;
        x = std::abs(p) + std::abs(q) + std::abs(r);
        if (x == 0.0) continue;
        p /= x;
        q /= x;
        r /= x;
      }
      double s = std::sqrt(p * p + q * q + r * r);
      if (p < 0.0) s = -s;
      if (s == 0.0) continue;
      if (k != m)
        h.at(k, k - 1) = -s * x;
      else if (l != m)
        h.at(k, k - 1) = -h.at(k, k - 1);
      p += s;
      x = p / s;
      y = q / s;
      const double z = r / s;
      q /= p;
      r /= p;

      for (int j = k; j <= n; ++j) {
        double pp = h.at(k, j) + q * h.at(k + 1, j);
        if (notlast) pp += r * h.at(k + 2, j);
        h.at(k, j) -= pp * x;
        h.at(k + 1, j) -= pp * y;
        if (notlast) h.at(k + 2, j) -= pp * z;
      }
      const int hi = std::min(n, k + 3);
      for (int i = l; i <= hi; ++i) {
        double pp = x * h.at(i, k) + y * h.at(i, k + 1);
        if (notlast) pp += z * h.at(i, k + 2);
        h.at(i, k) -= pp;
        h.at(i, k + 1) -= pp * q;
        if (notlast) h.at(i, k + 2) -= pp * r;
      }
    }
  }
  return out;
}

}  // namespace

double determinant(const SquareMatrix& v) {
  const LuFactors f = lu_factor(v);
  double det = f.sign;
  for (int k = 0; k < v.dim(); ++k) det *= f.lu.at(k, k);
  return det;
}

std::vector<std::complex<double>> eigenvalues(const SquareMatrix& v) {
  if (v.dim() == 1) return {std::complex<double>(v.at(0, 0), 0.0)};
  SquareMatrix h = v;
  hessenberg_reduce(h);
  return hessenberg_eigenvalues(std::move(h));
}

double min_eig_modulus(const SquareMatrix& v) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& lam : eigenvalues(v)) best = std::min(best, std::abs(lam));
  return best;
}

Vector lu_solve(const SquareMatrix& v, const Vector& b) {
  if (static_cast<int>(b.size()) != v.dim()) fail(errc::dimension_mismatch, "lu_solve");
  const LuFactors f = lu_factor(v);
  check_solvable(f);
  return lu_solve_factored(f, b);
}

SquareMatrix inverse(const SquareMatrix& v) {
  const int n = v.dim();
  const LuFactors f = lu_factor(v);
  check_solvable(f);
  SquareMatrix inv(n);
  for (int j = 0; j < n; ++j) inv.set_column(j, lu_solve_factored(f, unit_vector(n, j)));
  return inv;
}

SymMatrix sym_inverse(const SymMatrix& m) {
  const SquareMatrix inv = inverse(SquareMatrix::from_sym(m));
  SymMatrix out(m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = i; j < m.dim(); ++j) out.set(i, j, 0.5 * (inv.at(i, j) + inv.at(j, i)));
  return out;
}

}  // namespace sr1
