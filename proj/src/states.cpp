#include "qmix/states.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qmix/error.hpp"

namespace qmix {

namespace {

constexpr double kWeightTol = 1e-12;
constexpr long kMaxRejections = 10'000'000;
// Direct rejection budget on the sphere before switching to the random walk.
constexpr long kDirectAttempts = 200'000;
constexpr std::size_t kWalkStepsPerDim = 64;

double sample_uniform(RandomStream& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Accepts a candidate spectrum if no weight is below -1e-12; clamps round-off negatives.
bool accept_spectrum(std::vector<double>& weights) {
  for (double w : weights)
    if (w < -kWeightTol) return false;
  for (double& w : weights) w = std::max(w, 0.0);
  return true;
}

Matrix symmetrized(const Matrix& m) {
  Matrix out = m + m.adjoint();
  out *= 0.5;
  return out;
}

std::vector<double> tetrahedron_spectrum(double ratio, RandomStream& rng) {
  using Geo = TetrahedronGeometry;
  const double r = Geo::radius_for_ratio(ratio);
  const bool cap = r > Geo::edge_radius();
  const double wc = cap ? Geo::cap_cosine(r) : -1.0;
  for (long attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double phi = 2.0 * std::numbers::pi * sample_uniform(rng);
    // Region I/II: cos(theta) uniform in [-1, 1]. Region III: uniform in [w_c, 1] (cap around r4).
    const double w = cap ? wc + (1.0 - wc) * sample_uniform(rng) : 2.0 * sample_uniform(rng) - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    const Vec3 point{r * s * std::cos(phi), r * s * std::sin(phi), r * w};
    const auto verts = Geo::vertices();
    std::vector<double> lambda(4);
    for (int i = 0; i < 4; ++i)
      lambda[i] = 2.0 * (point[0] * verts[i][0] + point[1] * verts[i][1] + point[2] * verts[i][2]) + 0.25;
    if (accept_spectrum(lambda)) return lambda;
  }
  throw Error(ErrorKind::BadRatio, "fixed-ratio rejection sampling did not terminate");
}

// Unit vector uniform on the sphere of the hyperplane sum = 0, orthogonal to `exclude` (if any).
std::vector<double> hyperplane_direction(std::size_t dim, RandomStream& rng, const std::vector<double>* exclude) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> g(dim);
  for (;;) {
    for (auto& x : g) x = gauss(rng);
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(dim);
    for (auto& x : g) x -= mean;
    if (exclude) {
      const double proj = std::inner_product(g.begin(), g.end(), exclude->begin(), 0.0);
      for (std::size_t i = 0; i < dim; ++i) g[i] -= proj * (*exclude)[i];
    }
    const double norm = std::sqrt(std::inner_product(g.begin(), g.end(), g.begin(), 0.0));
    if (norm > 1e-8) {
      for (auto& x : g) x /= norm;
      return g;
    }
  }
}

// Elliptical-slice walk on {sum = 1, |lambda - centre| = r} restricted to the simplex. Each
// move picks a random great circle through the current point and shrinks an angle bracket
// around it until the proposal is admissible, which leaves the uniform measure invariant.
// Used when the admissible part of the sphere is too small for direct rejection.
std::vector<double> sphere_walk(std::size_t dim, double r, RandomStream& rng) {
  const double centre = 1.0 / static_cast<double>(dim);
  const double vertex_dist = std::sqrt(1.0 - centre);
  std::vector<double> x(dim, -centre / vertex_dist);  // towards vertex 0: always admissible
  x[0] = (1.0 - centre) / vertex_dist;
  std::vector<double> y(dim), lambda(dim);
  auto admissible = [&](const std::vector<double>& u) {
    for (std::size_t i = 0; i < dim; ++i)
      if (centre + r * u[i] < -kWeightTol) return false;
    return true;
  };
  for (std::size_t step = 0; step < kWalkStepsPerDim * dim; ++step) {
    const auto v = hyperplane_direction(dim, rng, &x);
    double phi = 2.0 * std::numbers::pi * sample_uniform(rng);
    double lo = phi - 2.0 * std::numbers::pi, hi = phi;
    for (;;) {
      const double c = std::cos(phi), s = std::sin(phi);
      double norm = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        y[i] = c * x[i] + s * v[i];
        norm += y[i] * y[i];
      }
      norm = std::sqrt(norm);
      for (auto& e : y) e /= norm;
      if (admissible(y)) break;
      (phi < 0.0 ? lo : hi) = phi;
      phi = lo + (hi - lo) * sample_uniform(rng);
    }
    x.swap(y);
  }
  for (std::size_t i = 0; i < dim; ++i) lambda[i] = centre + r * x[i];
  accept_spectrum(lambda);
  return lambda;
}

std::vector<double> hyperplane_spectrum(std::size_t dim, double ratio, RandomStream& rng) {
  const double nd = static_cast<double>(dim);
  const double centre = 1.0 / nd;
  const double r = std::sqrt(std::max(0.0, 1.0 / ratio - centre));
  std::vector<double> lambda(dim);

  if (ratio >= 2.0) {
    for (long attempt = 0; attempt < kDirectAttempts; ++attempt) {
      const auto u = hyperplane_direction(dim, rng, nullptr);
      for (std::size_t i = 0; i < dim; ++i) lambda[i] = centre + r * u[i];
      if (accept_spectrum(lambda)) return lambda;
    }
    return sphere_walk(dim, r, rng);
  }

  // R < 2: the admissible part of the sphere splits into disjoint caps around the vertices,
  // each bounded by the sphere's crossings with the vertex's edges. Sample the cap of vertex 0.
  const double vertex_dist = std::sqrt(1.0 - centre);
  std::vector<double> axis(dim, -centre / vertex_dist);
  axis[0] = (1.0 - centre) / vertex_dist;
  const double edge_cross = 0.5 * (1.0 + std::sqrt(std::max(0.0, 2.0 / ratio - 1.0)));
  const double wc = r > 0.0 ? std::clamp((edge_cross - centre) / (r * vertex_dist), -1.0, 1.0) : 1.0;
  // Marginal density of w = cos(angle to axis) on S^{dim-2}: (1 - w^2)^{(dim-4)/2}.
  const double exponent = 0.5 * (nd - 4.0);
  const double envelope = std::pow(std::max(1.0 - wc * wc, 0.0), exponent);

  for (long attempt = 0; attempt < kDirectAttempts; ++attempt) {
    const double w = wc + (1.0 - wc) * sample_uniform(rng);
    if (envelope > 0.0 && sample_uniform(rng) * envelope > std::pow(1.0 - w * w, exponent)) continue;
    const auto perp = hyperplane_direction(dim, rng, &axis);
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    for (std::size_t i = 0; i < dim; ++i) lambda[i] = centre + r * (w * axis[i] + s * perp[i]);
    if (accept_spectrum(lambda)) return lambda;
  }
  // The walk starts on the vertex-0 axis and cannot leave that cap.
  return sphere_walk(dim, r, rng);
}

}  // namespace

DensityMatrix::DensityMatrix(int n_qubits, Matrix matrix) : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
  if (n_qubits < 1 || n_qubits > 10 || matrix_.dim() != (std::size_t{1} << n_qubits))
    throw Error(ErrorKind::InvalidState, "dimension does not match qubit count");
  if (!matrix_.is_hermitian(1e-12)) throw Error(ErrorKind::InvalidState, "not Hermitian");
  if (std::abs(matrix_.trace() - cplx(1.0)) > 1e-12) throw Error(ErrorKind::InvalidState, "trace is not 1");
  if (hermitian_eigenvalues(matrix_).back() < -1e-10) throw Error(ErrorKind::InvalidState, "not positive");
}

void SimplexPoint::validate() const {
  if (weights.empty()) throw Error(ErrorKind::BadWeight, "empty weight list");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorKind::BadWeight, "negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-14 * static_cast<double>(weights.size()))
    throw Error(ErrorKind::BadWeight, "weights do not sum to 1");
}

std::array<Vec3, 4> TetrahedronGeometry::vertices() {
  const double s3 = std::sqrt(3.0);
  const double low = -0.25 * std::sqrt(2.0 / 3.0);
  return {{{-1.0 / (2.0 * s3), -0.5, low},
           {1.0 / s3, 0.0, low},
           {-1.0 / (2.0 * s3), 0.5, low},
           {0.0, 0.0, 0.75 * std::sqrt(2.0 / 3.0)}}};
}

double TetrahedronGeometry::face_radius() { return 0.25 * std::sqrt(2.0 / 3.0); }
double TetrahedronGeometry::edge_radius() { return std::sqrt(2.0) / 4.0; }
double TetrahedronGeometry::vertex_radius() { return std::sqrt(6.0) / 4.0; }

double TetrahedronGeometry::radius_for_ratio(double ratio) {
  if (!(ratio >= 1.0 && ratio <= 4.0)) throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, 4]", ratio));
  return std::sqrt(std::max(0.0, -0.125 + 0.5 / ratio));
}

double TetrahedronGeometry::cap_cosine(double radius) {
  const double a = 3.0 * radius * radius;
  const double b = -std::sqrt(1.5) * radius;
  const double c = 0.375 - 2.0 * radius * radius;
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  return std::min(1.0, (-b + std::sqrt(disc)) / (2.0 * a));
}

std::size_t checked_dim(int n_qubits) {
  if (n_qubits < 2 || n_qubits > 4)
    throw Error(ErrorKind::UnsupportedSize, fmt::format("{} qubits (supported: 2, 3, 4)", n_qubits));
  return std::size_t{1} << n_qubits;
}

Matrix haar_unitary(std::size_t dim, RandomStream& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  Matrix z(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      z(i, j) = cplx(re, im);
    }
  return orthonormalize_columns(z);
}

SimplexPoint uniform_simplex(std::size_t dim, RandomStream& rng) {
  std::vector<double> cuts(dim - 1);
  for (auto& c : cuts) c = sample_uniform(rng);
  std::sort(cuts.begin(), cuts.end());
  SimplexPoint p{std::vector<double>(dim)};
  double prev = 0.0;
  for (std::size_t i = 0; i + 1 < dim; ++i) {
    p.weights[i] = cuts[i] - prev;
    prev = cuts[i];
  }
  p.weights[dim - 1] = 1.0 - prev;
  return p;
}

DensityMatrix from_spectrum(int n_qubits, std::span<const double> weights, const Matrix& unitary) {
  return DensityMatrix(n_qubits, symmetrized(conjugate_by(unitary, Matrix::diagonal(weights))));
}

DensityMatrix random_density(int n_qubits, RandomStream& rng) {
  const std::size_t d = checked_dim(n_qubits);
  const SimplexPoint spectrum = uniform_simplex(d, rng);
  const Matrix u = haar_unitary(d, rng);
  return from_spectrum(n_qubits, spectrum.weights, u);
}

SimplexPoint simplex_to_eigenvalues(const Vec3& point) {
  const auto verts = TetrahedronGeometry::vertices();
  SimplexPoint p{std::vector<double>(4)};
  for (int i = 0; i < 4; ++i) {
    const double l = 2.0 * (point[0] * verts[i][0] + point[1] * verts[i][1] + point[2] * verts[i][2]) + 0.25;
    if (l < -kWeightTol) throw Error(ErrorKind::OutsideTetrahedron, fmt::format("lambda_{} = {}", i + 1, l));
    p.weights[i] = std::max(l, 0.0);
  }
  return p;
}

Vec3 eigenvalues_to_simplex(const SimplexPoint& point) {
  const auto verts = TetrahedronGeometry::vertices();
  Vec3 r{0.0, 0.0, 0.0};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 3; ++k) r[k] += point.weights[i] * verts[i][k];
  return r;
}

std::vector<double> fixed_ratio_spectrum(int n_qubits, double ratio, RandomStream& rng) {
  const std::size_t d = checked_dim(n_qubits);
  if (!(ratio >= 1.0 && ratio <= static_cast<double>(d)))
    throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, {}]", ratio, d));
  if (n_qubits == 2) return tetrahedron_spectrum(ratio, rng);
  return hyperplane_spectrum(d, ratio, rng);
}

std::vector<double> fixed_ratio_walk_spectrum(int n_qubits, double ratio, RandomStream& rng) {
  const std::size_t d = checked_dim(n_qubits);
  if (!(ratio >= 1.0 && ratio <= static_cast<double>(d)))
    throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, {}]", ratio, d));
  return sphere_walk(d, std::sqrt(std::max(0.0, 1.0 / ratio - 1.0 / static_cast<double>(d))), rng);
}

DensityMatrix random_fixed_ratio(int n_qubits, double ratio, RandomStream& rng) {
  const auto spectrum = fixed_ratio_spectrum(n_qubits, ratio, rng);
  const Matrix u = haar_unitary(spectrum.size(), rng);
  return from_spectrum(n_qubits, spectrum, u);
}

DensityMatrix werner_ghz(int n_qubits, double weight) {
  if (!(weight >= 0.0 && weight <= 1.0)) throw Error(ErrorKind::BadWeight, fmt::format("weight {}", weight));
  const std::size_t d = std::size_t{1} << n_qubits;
  Matrix m = ghz(n_qubits).matrix() * weight;
  m += Matrix::identity(d) * ((1.0 - weight) / static_cast<double>(d));
  return DensityMatrix(n_qubits, std::move(m));
}

DensityMatrix werner2(double p) { return werner_ghz(2, p); }
DensityMatrix werner3(double x_tilde) { return werner_ghz(3, x_tilde); }

std::array<std::array<cplx, 4>, 4> bell_basis() {
  const double h = 1.0 / std::sqrt(2.0);
  return {{{h, 0.0, 0.0, h}, {h, 0.0, 0.0, -h}, {0.0, h, h, 0.0}, {0.0, h, -h, 0.0}}};
}

DensityMatrix bell_diagonal(const SimplexPoint& weights) {
  if (weights.weights.size() != 4) throw Error(ErrorKind::BadWeight, "Bell-diagonal states take 4 weights");
  weights.validate();
  const auto basis = bell_basis();
  Matrix m(4);
  for (int k = 0; k < 4; ++k) m += Matrix::projector(basis[k]) * weights.weights[k];
  return DensityMatrix(2, std::move(m));
}

SimplexPoint random_bell_weights(RandomStream& rng) {
  SimplexPoint p{std::vector<double>(4)};
  for (auto& w : p.weights) w = sample_uniform(rng);
  const double sum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (auto& w : p.weights) w /= sum;
  return p;
}

DensityMatrix ghz(int n_qubits) {
  if (n_qubits < 2 || n_qubits > 10) throw Error(ErrorKind::UnsupportedSize, fmt::format("GHZ on {} qubits", n_qubits));
  const std::size_t d = std::size_t{1} << n_qubits;
  std::vector<cplx> ket(d);
  ket.front() = ket.back() = 1.0 / std::sqrt(2.0);
  return DensityMatrix(n_qubits, Matrix::projector(ket));
}

DensityMatrix basis_state(int n_qubits, std::size_t index) {
  Matrix m(std::size_t{1} << n_qubits);
  m(index, index) = 1.0;
  return DensityMatrix(n_qubits, std::move(m));
}

DensityMatrix maximally_mixed(int n_qubits) {
  const std::size_t d = std::size_t{1} << n_qubits;
  return DensityMatrix(n_qubits, Matrix::identity(d) * (1.0 / static_cast<double>(d)));
}

DensityMatrix product(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(a.n_qubits() + b.n_qubits(), kron(a.matrix(), b.matrix()));
}

double purity(const DensityMatrix& rho) { return trace_product(rho.matrix(), rho.matrix()); }
double participation_ratio(const DensityMatrix& rho) { return 1.0 / purity(rho); }
double max_eigenvalue(const DensityMatrix& rho) { return rho.eigenvalues().front(); }

std::string to_state_text(const DensityMatrix& rho) {
  std::string out = fmt::format("{{\n  \"n_qubits\": {},\n  \"matrix\": [\n", rho.n_qubits());
  const std::size_t d = rho.dim();
  for (std::size_t i = 0; i < d; ++i) {
    out += "    [";
    for (std::size_t j = 0; j < d; ++j) {
      const cplx z = rho.matrix()(i, j);
      out += fmt::format("[{:.17g}, {:.17g}]{}", z.real(), z.imag(), j + 1 < d ? ", " : "");
    }
    out += i + 1 < d ? "],\n" : "]\n";
  }
  out += "  ]\n}\n";
  return out;
}

DensityMatrix parse_state_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.contains("n_qubits") || !doc.contains("matrix"))
    throw Error(ErrorKind::ParseError, "state document needs n_qubits and matrix");
  const int n = doc["n_qubits"].get<int>();
  const auto& rows = doc["matrix"];
  const std::size_t d = rows.size();
  if (n < 1 || n > 10 || d != (std::size_t{1} << n)) throw Error(ErrorKind::ParseError, "matrix size does not match n_qubits");
  Matrix m(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) throw Error(ErrorKind::ParseError, "ragged matrix");
    for (std::size_t j = 0; j < d; ++j) {
      const auto& z = rows[i][j];
      if (!z.is_array() || z.size() != 2) throw Error(ErrorKind::ParseError, "entries must be [re, im]");
      m(i, j) = cplx(z[0].get<double>(), z[1].get<double>());
    }
  }
  return DensityMatrix(n, std::move(m));
}

void write_state(const DensityMatrix& rho, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << to_state_text(rho);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

DensityMatrix read_state(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_state_text(buf.str());
}

}  // namespace qmix
