#pragma once

// Small dense complex linear algebra for Hermitian operators on a few qubits.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qmix {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Square complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  static Matrix identity(std::size_t dim);
  static Matrix diagonal(std::span<const double> entries);
  /// |v><v| for an (unnormalised) ket v.
  static Matrix projector(std::span<const cplx> ket);

  std::size_t dim() const { return dim_; }
  cplx& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const cplx& operator()(std::size_t row, std::size_t col) const { return data_[row * dim_ + col]; }
  std::span<const cplx> data() const { return data_; }

  Matrix adjoint() const;
  Matrix conj() const;
  cplx trace() const;
  double max_abs() const;
  double frobenius_norm() const;
  bool is_hermitian(double tol = 1e-12) const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(cplx scale);

  friend Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
  friend Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
  friend Matrix operator*(Matrix lhs, cplx scale) { return lhs *= scale; }
  friend Matrix operator*(cplx scale, Matrix rhs) { return rhs *= scale; }
  friend Matrix operator*(const Matrix& lhs, const Matrix& rhs);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<cplx> data_;
};

/// Largest entrywise difference |a - b|.
double max_abs_diff(const Matrix& a, const Matrix& b);

Matrix kron(const Matrix& a, const Matrix& b);

/// U A U^dagger
Matrix conjugate_by(const Matrix& unitary, const Matrix& a);

/// Re Tr(A B); exact for Hermitian A, B.
double trace_product(const Matrix& a, const Matrix& b);

/// Pauli matrix: 0 = identity, 1 = x, 2 = y, 3 = z.
Matrix pauli(int which);

/// v . sigma for a real 3-vector v.
Matrix spin_operator(const Vec3& v);

struct Spectrum {
  std::vector<double> values;  // non-increasing
  Matrix vectors;              // eigenvectors as columns, in the order of `values`
};

/// Cyclic Jacobi eigensolver. Throws Error(NotHermitian) beyond 1e-12 asymmetry.
Spectrum hermitian_eig(const Matrix& a);
std::vector<double> hermitian_eigenvalues(const Matrix& a);

/// Applies f to the spectrum: V f(Lambda) V^dagger.
template <typename F>
Matrix hermitian_apply(const Matrix& a, F&& f) {
  const Spectrum spec = hermitian_eig(a);
  const std::size_t d = a.dim();
  Matrix out(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double fk = f(spec.values[k]);
    for (std::size_t i = 0; i < d; ++i) {
      const cplx vik = spec.vectors(i, k) * fk;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += vik * std::conj(spec.vectors(j, k));
    }
  }
  return out;
}

/// Trace over every qubit not in `keep`. Qubit 0 is the leftmost Kronecker factor.
/// Throws Error(BadSubset) if `keep` is empty, full, or out of range.
Matrix partial_trace(const Matrix& m, int n_qubits, std::span<const int> keep);

/// Singular values of a real matrix (rows x cols, row-major), non-increasing.
std::vector<double> singular_values(std::span<const double> entries, std::size_t rows, std::size_t cols);

/// Gram-Schmidt orthonormalisation of the columns; with Gaussian input this is the
/// QR factor with positive diagonal of R.
Matrix orthonormalize_columns(const Matrix& m);

}  // namespace qmix
