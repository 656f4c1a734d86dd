#include "qmix/qla.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qmix/error.hpp"

namespace qmix {

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> entries) {
  Matrix m(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

Matrix Matrix::projector(std::span<const cplx> ket) {
  Matrix m(ket.size());
  for (std::size_t i = 0; i < ket.size(); ++i)
    for (std::size_t j = 0; j < ket.size(); ++j) m(i, j) = ket[i] * std::conj(ket[j]);
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

Matrix Matrix::conj() const {
  Matrix out(*this);
  for (auto& z : out.data_) z = std::conj(z);
  return out;
}

cplx Matrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (const auto& z : data_) m = std::max(m, std::abs(z));
  return m;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

bool Matrix::is_hermitian(double tol) const {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = i; j < dim_; ++j)
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(cplx scale) {
  for (auto& z : data_) z *= scale;
  return *this;
}

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  const std::size_t d = lhs.dim();
  Matrix out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const cplx a = lhs(i, k);
      if (a == cplx(0.0)) continue;
      for (std::size_t j = 0; j < d; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t da = a.dim(), db = b.dim();
  Matrix out(da * db);
  for (std::size_t i = 0; i < da; ++i)
    for (std::size_t j = 0; j < da; ++j) {
      const cplx aij = a(i, j);
      for (std::size_t k = 0; k < db; ++k)
        for (std::size_t l = 0; l < db; ++l) out(i * db + k, j * db + l) = aij * b(k, l);
    }
  return out;
}

Matrix conjugate_by(const Matrix& unitary, const Matrix& a) { return unitary * a * unitary.adjoint(); }

double trace_product(const Matrix& a, const Matrix& b) {
  double t = 0.0;
  const std::size_t d = a.dim();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) t += (a(i, k) * b(k, i)).real();
  return t;
}

Matrix pauli(int which) {
  Matrix m(2);
  switch (which) {
    case 0: m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case 1: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 2: m(0, 1) = cplx(0.0, -1.0); m(1, 0) = cplx(0.0, 1.0); break;
    case 3: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw Error(ErrorKind::BadSettings, "pauli index " + std::to_string(which));
  }
  return m;
}

Matrix spin_operator(const Vec3& v) {
  Matrix m(2);
  m(0, 0) = v[2];
  m(1, 1) = -v[2];
  m(0, 1) = cplx(v[0], -v[1]);
  m(1, 0) = cplx(v[0], v[1]);
  return m;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

// One complex Jacobi rotation annihilating a(p,q). G = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
// restricted to the (p,q) plane, applied as A <- G^dagger A G and V <- V G.
void jacobi_rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const cplx apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const cplx phase = apq / mag;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const cplx gpp = c, gpq = s;
  const cplx gqp = -s * std::conj(phase), gqq = c * std::conj(phase);
  const std::size_t d = a.dim();

  for (std::size_t k = 0; k < d; ++k) {
    const cplx akp = a(k, p), akq = a(k, q);
    a(k, p) = akp * gpp + akq * gqp;
    a(k, q) = akp * gpq + akq * gqq;
    const cplx vkp = v(k, p), vkq = v(k, q);
    v(k, p) = vkp * gpp + vkq * gqp;
    v(k, q) = vkp * gpq + vkq * gqq;
  }
  for (std::size_t k = 0; k < d; ++k) {
    const cplx apk = a(p, k), aqk = a(q, k);
    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();
}

}  // namespace

Spectrum hermitian_eig(const Matrix& input) {
  if (!input.is_hermitian(1e-12)) throw Error(ErrorKind::NotHermitian, "asymmetry exceeds 1e-12");
  const std::size_t d = input.dim();
  Matrix a = input;
  Matrix v = Matrix::identity(d);

  const double scale = a.frobenius_norm();
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 100; ++sweep) {
      if (off_diagonal_norm(a) <= 1e-13 * scale) break;
      for (std::size_t p = 0; p + 1 < d; ++p)
        for (std::size_t q = p + 1; q < d; ++q) jacobi_rotate(a, v, p, q);
    }
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

  Spectrum out{std::vector<double>(d), Matrix(d)};
  for (std::size_t k = 0; k < d; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < d; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const Matrix& a) { return hermitian_eig(a).values; }

Matrix partial_trace(const Matrix& m, int n_qubits, std::span<const int> keep) {
  if (keep.empty() || static_cast<int>(keep.size()) >= n_qubits)
    throw Error(ErrorKind::BadSubset, "keep must be a non-empty proper subset");
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (std::adjacent_find(kept.begin(), kept.end()) != kept.end() || kept.front() < 0 || kept.back() >= n_qubits)
    throw Error(ErrorKind::BadSubset, "qubit indices out of range or repeated");

  std::vector<int> traced;
  for (int q = 0; q < n_qubits; ++q)
    if (!std::binary_search(kept.begin(), kept.end(), q)) traced.push_back(q);

  // Bit of qubit q inside a full index: qubit 0 is the most significant bit.
  auto bit_of = [n_qubits](int q) { return std::size_t{1} << (n_qubits - 1 - q); };
  auto expand = [&](std::size_t kept_index, std::size_t traced_index) {
    std::size_t full = 0;
    const int nk = static_cast<int>(kept.size());
    for (int k = 0; k < nk; ++k)
      if (kept_index & (std::size_t{1} << (nk - 1 - k))) full |= bit_of(kept[k]);
    const int nt = static_cast<int>(traced.size());
    for (int t = 0; t < nt; ++t)
      if (traced_index & (std::size_t{1} << (nt - 1 - t))) full |= bit_of(traced[t]);
    return full;
  };

  const std::size_t dk = std::size_t{1} << kept.size();
  const std::size_t dt = std::size_t{1} << traced.size();
  Matrix out(dk);
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < dt; ++t) s += m(expand(i, t), expand(j, t));
      out(i, j) = s;
    }
  return out;
}

std::vector<double> singular_values(std::span<const double> entries, std::size_t rows, std::size_t cols) {
  // One-sided Jacobi: orthogonalise columns; their norms are the singular values.
  std::vector<double> a(entries.begin(), entries.end());
  auto col_dot = [&](std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t r = 0; r < rows; ++r) s += a[r * cols + i] * a[r * cols + j];
    return s;
  };
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < cols; ++i)
      for (std::size_t j = i + 1; j < cols; ++j) {
        const double alpha = col_dot(i, i), beta = col_dot(j, j), gamma = col_dot(i, j);
        if (std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double ai = a[r * cols + i], aj = a[r * cols + j];
          a[r * cols + i] = c * ai - s * aj;
          a[r * cols + j] = s * ai + c * aj;
        }
      }
    if (!rotated) break;
  }
  std::vector<double> sv(cols);
  for (std::size_t c = 0; c < cols; ++c) sv[c] = std::sqrt(col_dot(c, c));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

Matrix orthonormalize_columns(const Matrix& m) {
  const std::size_t d = m.dim();
  Matrix q = m;
  for (std::size_t k = 0; k < d; ++k) {
    // Two passes of modified Gram-Schmidt for stability.
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        cplx proj = 0.0;
        for (std::size_t i = 0; i < d; ++i) proj += std::conj(q(i, j)) * q(i, k);
        for (std::size_t i = 0; i < d; ++i) q(i, k) -= proj * q(i, j);
      }
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += std::norm(q(i, k));
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i) q(i, k) /= norm;
  }
  return q;
}

}  // namespace qmix
