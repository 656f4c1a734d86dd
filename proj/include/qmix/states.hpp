#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qmix/qla.hpp"
#include "qmix/rng.hpp"

namespace qmix {

/// Hermitian, unit-trace, positive semidefinite operator on n qubits.
class DensityMatrix {
 public:
  /// Validates the invariants; throws Error(InvalidState) otherwise.
  DensityMatrix(int n_qubits, Matrix matrix);

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return matrix_.dim(); }
  const Matrix& matrix() const { return matrix_; }

  /// Spectrum, non-increasing. Computed on each call.
  std::vector<double> eigenvalues() const { return hermitian_eigenvalues(matrix_); }

 private:
  int n_qubits_;
  Matrix matrix_;
};

/// Weights of a point of the eigenvalue simplex.
struct SimplexPoint {
  std::vector<double> weights;

  /// Throws Error(BadWeight) unless every weight is >= 0 and the sum is 1 within 1e-14
  /// (relative to the number of weights).
  void validate() const;
};

/// Regular unit-edge tetrahedron centred at the origin, identified with the two-qubit
/// eigenvalue simplex through lambda_i = 2 r.r_i + 1/4.
struct TetrahedronGeometry {
  static std::array<Vec3, 4> vertices();
  /// Radius of the sphere tangent to the faces.
  static double face_radius();
  /// Radius of the sphere tangent to the edges.
  static double edge_radius();
  /// Radius of the circumscribed sphere.
  static double vertex_radius();
  /// Distance from the centre for a given participation ratio.
  static double radius_for_ratio(double ratio);
  /// cos(theta_c): larger root of 3 r^2 w^2 - sqrt(3/2) r w + 3/8 - 2 r^2 = 0, for r in [h2, h3].
  static double cap_cosine(double radius);
};

std::size_t checked_dim(int n_qubits);

Matrix haar_unitary(std::size_t dim, RandomStream& rng);

/// Uniform (Lebesgue) point of the (dim-1)-simplex by sorted uniform spacings.
SimplexPoint uniform_simplex(std::size_t dim, RandomStream& rng);

/// U diag(weights) U^dagger.
DensityMatrix from_spectrum(int n_qubits, std::span<const double> weights, const Matrix& unitary);

/// Haar unitary x uniform simplex spectrum, n in {2,3,4}.
DensityMatrix random_density(int n_qubits, RandomStream& rng);

/// Tetrahedron point -> two-qubit spectrum. Throws Error(OutsideTetrahedron).
SimplexPoint simplex_to_eigenvalues(const Vec3& point);
Vec3 eigenvalues_to_simplex(const SimplexPoint& point);

/// Spectrum on the fixed-purity sphere sum(lambda^2) = 1/R, uniform over its part inside
/// the simplex. Throws Error(BadRatio) if R is outside [1, 2^n].
/// n = 2 follows the tetrahedron regions; n >= 3 draws uniform directions (vertex caps
/// for R < 2) and rejects, switching to fixed_ratio_walk_spectrum when 2e5 draws miss.
std::vector<double> fixed_ratio_spectrum(int n_qubits, double ratio, RandomStream& rng);
/// Same target measure through an elliptical-slice random walk (64 moves per dimension)
/// started on the axis towards a vertex. Used where direct rejection almost never accepts.
std::vector<double> fixed_ratio_walk_spectrum(int n_qubits, double ratio, RandomStream& rng);
DensityMatrix random_fixed_ratio(int n_qubits, double ratio, RandomStream& rng);

/// p |GHZ_n><GHZ_n| + (1 - p) I / 2^n.
DensityMatrix werner_ghz(int n_qubits, double weight);
DensityMatrix werner2(double p);
DensityMatrix werner3(double x_tilde);

/// Bell basis kets in the order Phi+, Phi-, Psi+, Psi-.
std::array<std::array<cplx, 4>, 4> bell_basis();
DensityMatrix bell_diagonal(const SimplexPoint& weights);
/// Bell-diagonal weights drawn as four independent uniforms normalised by their sum.
SimplexPoint random_bell_weights(RandomStream& rng);

DensityMatrix ghz(int n_qubits);
/// Computational basis product |bits>, qubit 0 first.
DensityMatrix basis_state(int n_qubits, std::size_t index);
DensityMatrix maximally_mixed(int n_qubits);
DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b);

double purity(const DensityMatrix& rho);
double participation_ratio(const DensityMatrix& rho);
double max_eigenvalue(const DensityMatrix& rho);

/// JSON document {"n_qubits": n, "matrix": [[[re, im], ...], ...]} with 17 significant digits.
std::string to_state_text(const DensityMatrix& rho);
DensityMatrix parse_state_text(const std::string& text);
void write_state(const DensityMatrix& rho, const std::filesystem::path& path);
DensityMatrix read_state(const std::filesystem::path& path);

}  // namespace qmix
