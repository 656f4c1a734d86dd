#include "qmix/correlations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qmix/entropic.hpp"
#include "qmix/error.hpp"

namespace qmix {

namespace {

void require_two_qubits(const DensityMatrix& rho) {
  if (rho.n_qubits() != 2) throw Error(ErrorKind::UnsupportedSize, "two-qubit measure applied to a larger state");
}

// Entropy of a 2x2 Hermitian unit-trace block given by its entries.
double qubit_entropy(double a, double d, cplx b) {
  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  const std::array<double, 2> l{mean + radius, mean - radius};
  return spectrum_entropy(l);
}

const std::array<Matrix, 4>& paulis() {
  static const std::array<Matrix, 4> p{pauli(0), pauli(1), pauli(2), pauli(3)};
  return p;
}

}  // namespace

Matrix BlochDecomposition::reconstruct() const {
  const auto& p = paulis();
  Matrix m = kron(p[0], p[0]);
  for (int u = 0; u < 3; ++u) {
    m += kron(p[u + 1], p[0]) * x[u];
    m += kron(p[0], p[u + 1]) * y[u];
    for (int v = 0; v < 3; ++v) m += kron(p[u + 1], p[v + 1]) * T[u][v];
  }
  m *= 0.25;
  return m;
}

double BlochDecomposition::correlation_norm2() const {
  double s = 0.0;
  for (const auto& row : T)
    for (double t : row) s += t * t;
  return s;
}

BlochDecomposition bloch_decompose(const DensityMatrix& rho) {
  require_two_qubits(rho);
  const auto& p = paulis();
  const Matrix& m = rho.matrix();
  BlochDecomposition b;
  for (int u = 0; u < 3; ++u) {
    b.x[u] = trace_product(m, kron(p[u + 1], p[0]));
    b.y[u] = trace_product(m, kron(p[0], p[u + 1]));
    for (int v = 0; v < 3; ++v) b.T[u][v] = trace_product(m, kron(p[u + 1], p[v + 1]));
  }
  return b;
}

double concurrence(const DensityMatrix& rho) {
  require_two_qubits(rho);
  static const Matrix flip = kron(pauli(2), pauli(2));
  const Matrix root = hermitian_apply(rho.matrix(), [](double l) { return std::sqrt(std::max(l, 0.0)); });
  const Matrix tilde = flip * rho.matrix().conj() * flip;
  Matrix r = root * tilde * root;
  r = (r + r.adjoint()) * 0.5;
  std::vector<double> mu = hermitian_eigenvalues(r);
  for (double& v : mu) v = std::sqrt(std::max(v, 0.0));
  return std::max(0.0, mu[0] - mu[1] - mu[2] - mu[3]);
}

std::array<std::array<cplx, 2>, 2> MeasurementBasis::kets() const {
  const double c = std::cos(alpha), s = std::sin(alpha);
  const cplx e = std::polar(1.0, beta);
  return {{{c, e * s}, {std::conj(e) * s, -c}}};
}

namespace {

// sum_i p_i S(rho_{other | i}) for the measurement `basis` on `side`.
double measured_conditional_entropy(const Matrix& m, const MeasurementBasis& basis, MeasuredSide side) {
  const auto kets = basis.kets();
  // Index of |a b> from the unmeasured qubit's index `o` and the measured one's `k`.
  auto idx = [side](int o, int k) { return side == MeasuredSide::B ? 2 * o + k : 2 * k + o; };
  double conditional = 0.0;
  for (const auto& ket : kets) {
    cplx block[2][2] = {};
    for (int o = 0; o < 2; ++o)
      for (int o2 = 0; o2 < 2; ++o2)
        for (int k = 0; k < 2; ++k)
          for (int k2 = 0; k2 < 2; ++k2) block[o][o2] += std::conj(ket[k]) * m(idx(o, k), idx(o2, k2)) * ket[k2];
    const double prob = block[0][0].real() + block[1][1].real();
    if (prob <= 1e-14) continue;
    conditional += prob * qubit_entropy(block[0][0].real() / prob, block[1][1].real() / prob, block[0][1] / prob);
  }
  return conditional;
}

// S(measured marginal) - S(rho): the basis-independent part of the gap.
double discord_offset(const DensityMatrix& rho, MeasuredSide side) {
  const std::array<int, 1> keep{side == MeasuredSide::B ? 1 : 0};
  const Matrix reduced = partial_trace(rho.matrix(), 2, keep);
  return qubit_entropy(reduced(0, 0).real(), reduced(1, 1).real(), reduced(0, 1)) - von_neumann_entropy(rho);
}

}  // namespace

double discord_gap(const DensityMatrix& rho, const MeasurementBasis& basis, MeasuredSide side) {
  require_two_qubits(rho);
  return discord_offset(rho, side) + measured_conditional_entropy(rho.matrix(), basis, side);
}

DiscordResult quantum_discord(const DensityMatrix& rho, const DiscordOptions& opts) {
  require_two_qubits(rho);
  const double offset = discord_offset(rho, opts.side);
  const Matrix& m = rho.matrix();
  const auto side = opts.side;
  auto objective = [&m, side, offset](std::span<const double> angles) {
    return offset + measured_conditional_entropy(m, MeasurementBasis{angles[0], angles[1]}, side);
  };
  const ObjectiveSpec spec = ObjectiveSpec::angles(2, objective);

  std::vector<std::vector<double>> grid;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      grid.push_back({(i + 0.5) * std::numbers::pi / 4.0, (j + 0.5) * std::numbers::pi / 2.0});

  OptimOptions o;
  o.restarts = 16;
  o.tolerance = 1e-9;
  o.initial_step = 0.3;
  o.seed = opts.seed;
  o.anneal.step = 1.0;
  o.anneal.initial_temperature = 0.1;
  const TwofoldResult r = twofold_search(spec, o, grid);
  if (r.agreement > opts.max_disagreement)
    throw Error(ErrorKind::OptimizerFailure, "discord searches disagree by " + std::to_string(r.agreement));

  DiscordResult out;
  out.value = std::max(0.0, r.value);
  // alpha and alpha + pi give the same projectors.
  out.basis = MeasurementBasis{std::fmod(r.point[0], std::numbers::pi), r.point[1]};
  out.agreement = r.agreement;
  return out;
}

namespace {

struct GeometricParts {
  double x2, y2, t2, kmax;
};

GeometricParts geometric_parts(const DensityMatrix& rho) {
  const BlochDecomposition b = bloch_decompose(rho);
  Matrix k(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = b.x[i] * b.x[j];
      for (int l = 0; l < 3; ++l) s += b.T[i][l] * b.T[j][l];
      k(i, j) = s;
    }
  GeometricParts g{};
  for (int i = 0; i < 3; ++i) {
    g.x2 += b.x[i] * b.x[i];
    g.y2 += b.y[i] * b.y[i];
  }
  g.t2 = b.correlation_norm2();
  g.kmax = hermitian_eigenvalues(k).front();
  return g;
}

}  // namespace

double geometric_discord(const DensityMatrix& rho) {
  require_two_qubits(rho);
  const GeometricParts g = geometric_parts(rho);
  return std::max(0.0, 0.25 * (g.x2 + g.t2 - g.kmax));
}

double geometric_discord_ratio_form(const DensityMatrix& rho) {
  require_two_qubits(rho);
  const GeometricParts g = geometric_parts(rho);
  return 1.0 / participation_ratio(rho) - 0.25 - 0.25 * (g.y2 + g.kmax);
}

std::array<double, 16> correlation_matrix(const DensityMatrix& rho) {
  const BlochDecomposition b = bloch_decompose(rho);
  std::array<double, 16> r{};
  r[0] = 0.25;
  for (int u = 0; u < 3; ++u) {
    r[1 + u] = 0.25 * b.y[u];
    r[4 * (u + 1)] = 0.25 * b.x[u];
    for (int v = 0; v < 3; ++v) r[4 * (u + 1) + 1 + v] = 0.25 * b.T[u][v];
  }
  return r;
}

int discord_rank_witness(const DensityMatrix& rho) {
  require_two_qubits(rho);
  const auto r = correlation_matrix(rho);
  const auto sv = singular_values(r, 4, 4);
  return static_cast<int>(std::count_if(sv.begin(), sv.end(), [&](double s) { return s > 1e-10 * sv.front(); }));
}

}  // namespace qmix
