#include "qmix/bell.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "qmix/correlations.hpp"
#include "qmix/error.hpp"

namespace qmix {

namespace {

constexpr double kViolationSlack = 1e-9;

std::size_t pow3(int n) {
  std::size_t p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

Vec3 normalized_or(const Vec3& v, const Vec3& fallback) {
  const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (n < 1e-14) return fallback;
  return {v[0] / n, v[1] / n, v[2] / n};
}

// Contracts coefficient-like data party by party. `data` holds `count` blocks of
// size `width * block`; each block's leading index (of extent `width`) is contracted with
// both of the party's two weight vectors, doubling the number of blocks.
template <std::size_t Width, typename Weights>
void contract_party(std::vector<double>& data, std::vector<double>& scratch, std::size_t count, std::size_t block,
                    const Weights& first, const Weights& second) {
  scratch.assign(count * 2 * block, 0.0);
  for (std::size_t c = 0; c < count; ++c) {
    const double* src = data.data() + c * Width * block;
    double* dst0 = scratch.data() + (2 * c) * block;
    double* dst1 = scratch.data() + (2 * c + 1) * block;
    for (std::size_t i = 0; i < Width; ++i) {
      const double w0 = first[i], w1 = second[i];
      const double* row = src + i * block;
      for (std::size_t r = 0; r < block; ++r) {
        dst0[r] += w0 * row[r];
        dst1[r] += w1 * row[r];
      }
    }
  }
  data.swap(scratch);
}

BellResult finish(double value, MeasurementSettings settings, double bound, double agreement) {
  BellResult r;
  r.value = value;
  r.settings = std::move(settings);
  r.classical_bound = bound;
  r.violated = value > bound + kViolationSlack;
  r.agreement = agreement;
  return r;
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

// Appends the last party's optimal settings (unit vectors along its fields).
template <typename Fields>
MeasurementSettings complete_settings(std::span<const double> angles, Fields& fields) {
  const MeasurementSettings prefix = MeasurementSettings::from_angles(angles);
  const auto f = fields(prefix);
  const std::size_t m = prefix.parties();
  MeasurementSettings s;
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < m; ++j) s.vectors.push_back(prefix.setting(j, k));
    s.vectors.push_back(normalized_or(f[k], k == 0 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0}));
  }
  return s;
}

// Searches the first n - 1 parties' angles; the last party is optimal in closed form since
// the expectation is linear in each of its setting vectors.
template <typename Fields>
BellResult maximize_settings(int n_parties, double bound, const BellOptions& opts, Fields&& fields) {
  const std::size_t dim = 4 * static_cast<std::size_t>(n_parties - 1);
  auto objective = [&fields](std::span<const double> angles) {
    const auto f = fields(MeasurementSettings::from_angles(angles));
    return -(norm3(f[0]) + norm3(f[1]));
  };
  const ObjectiveSpec spec = ObjectiveSpec::angles(dim, objective);
  OptimOptions o;
  o.restarts = opts.restarts;
  o.tolerance = 1e-8;
  o.initial_step = 0.6;
  o.max_evals = 40000;
  o.seed = opts.seed;
  o.anneal = opts.anneal;
  TwofoldResult r = twofold_search(spec, o);
  // Highly mixed states have several close local maxima. On disagreement, rerun with twice the
  // budget and keep each method's best value; only persistent disagreement is a failure.
  for (int round = 1; round <= opts.escalations && r.agreement > opts.max_disagreement; ++round) {
    o.restarts *= 2;
    o.anneal.chains *= 2;
    o.seed = derive_seed(opts.seed, 0xe5ca + static_cast<std::uint64_t>(round));
    const TwofoldResult again = twofold_search(spec, o);
    r.simplex_value = std::min(r.simplex_value, again.simplex_value);
    r.anneal_value = std::min(r.anneal_value, again.anneal_value);
    r.agreement = std::abs(r.simplex_value - r.anneal_value);
    if (again.value < r.value) {
      r.value = again.value;
      r.point = again.point;
    }
  }
  if (r.agreement > opts.max_disagreement)
    throw Error(ErrorKind::OptimizerFailure,
                fmt::format("Bell searches disagree: simplex {} vs annealing {}", -r.simplex_value, -r.anneal_value));
  return finish(-r.value, complete_settings(r.point, fields), bound, r.agreement);
}

}  // namespace

MeasurementSettings MeasurementSettings::from_angles(std::span<const double> angles) {
  MeasurementSettings s;
  s.vectors.reserve(angles.size() / 2);
  for (std::size_t k = 0; k + 1 < angles.size(); k += 2) {
    const double st = std::sin(angles[k]), ct = std::cos(angles[k]);
    s.vectors.push_back({st * std::cos(angles[k + 1]), st * std::sin(angles[k + 1]), ct});
  }
  return s;
}

void MeasurementSettings::validate(std::size_t n_parties) const {
  if (vectors.size() != 2 * n_parties)
    throw Error(ErrorKind::BadSettings, fmt::format("expected {} vectors, got {}", 2 * n_parties, vectors.size()));
  for (const auto& v : vectors)
    if (std::abs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0) > 1e-12)
      throw Error(ErrorKind::BadSettings, "setting vectors must have unit norm");
}

BellPolynomial::BellPolynomial(int n_parties, std::vector<double> coefficients)
    : n_parties_(n_parties), coeffs_(std::move(coefficients)) {
  if (n_parties < 1 || n_parties > 12 || coeffs_.size() != (std::size_t{1} << n_parties))
    throw Error(ErrorKind::UnsupportedSize, "coefficient table does not match the party count");
}

BellPolynomial BellPolynomial::chsh() { return BellPolynomial(2, {1.0, 1.0, 1.0, -1.0}); }

BellPolynomial BellPolynomial::mermin() {
  std::vector<double> c(8, 0.0);
  c[0b000] = 1.0;
  c[0b011] = -1.0;
  c[0b101] = -1.0;
  c[0b110] = -1.0;
  return BellPolynomial(3, std::move(c));
}

BellPolynomial BellPolynomial::mabk4_explicit() {
  constexpr double sign_by_count[5] = {1.0, -1.0, -1.0, 1.0, 1.0};
  std::vector<double> c(16);
  for (unsigned s = 0; s < 16; ++s) c[s] = sign_by_count[std::popcount(s)];
  return BellPolynomial(4, std::move(c));
}

BellPolynomial BellPolynomial::mabk_recursion(int n_parties) {
  if (n_parties < 2 || n_parties > 12) throw Error(ErrorKind::UnsupportedSize, fmt::format("MABK on {} parties", n_parties));
  std::vector<double> c = chsh().coeffs_;
  for (int n = 2; n < n_parties; ++n) {
    const std::size_t size = c.size();
    const std::size_t all = size - 1;  // swaps every party's settings
    std::vector<double> next(2 * size);
    for (std::size_t s = 0; s < size; ++s) {
      next[s] = 0.5 * (c[s] + c[s ^ all]);
      next[size + s] = 0.5 * (c[s] - c[s ^ all]);
    }
    c.swap(next);
  }
  return BellPolynomial(n_parties, std::move(c));
}

BellPolynomial BellPolynomial::mabk(int n_parties) {
  if (n_parties == 4) return mabk4_explicit();
  if (n_parties < 2 || n_parties > 4) throw Error(ErrorKind::UnsupportedSize, fmt::format("MABK on {} parties", n_parties));
  return mabk_recursion(n_parties);
}

Matrix BellPolynomial::operator_for(const MeasurementSettings& settings) const {
  settings.validate(static_cast<std::size_t>(n_parties_));
  std::vector<std::array<Matrix, 2>> local;
  for (int j = 0; j < n_parties_; ++j)
    local.push_back({spin_operator(settings.setting(j, 0)), spin_operator(settings.setting(j, 1))});
  const std::size_t d = std::size_t{1} << n_parties_;
  Matrix out(d);
  for (std::size_t s = 0; s < coeffs_.size(); ++s) {
    if (coeffs_[s] == 0.0) continue;
    Matrix term = local[0][(s >> (n_parties_ - 1)) & 1u];
    for (int j = 1; j < n_parties_; ++j) term = kron(term, local[j][(s >> (n_parties_ - 1 - j)) & 1u]);
    out += term * coeffs_[s];
  }
  return out;
}

double BellPolynomial::classical_bound() const {
  const int n = n_parties_;
  double best = 0.0;
  std::vector<double> data, scratch;
  // Outcome assignment bits: party j's two outcomes are bits 2j and 2j + 1.
  for (std::uint64_t assign = 0; assign < (std::uint64_t{1} << (2 * n)); ++assign) {
    data = coeffs_;
    std::size_t count = 1, block = coeffs_.size();
    for (int j = 0; j < n; ++j) {
      block /= 2;
      const double o0 = (assign >> (2 * j)) & 1u ? -1.0 : 1.0;
      const double o1 = (assign >> (2 * j + 1)) & 1u ? -1.0 : 1.0;
      // Contract the party bit: one output per block.
      scratch.assign(count * block, 0.0);
      for (std::size_t c = 0; c < count; ++c)
        for (std::size_t r = 0; r < block; ++r)
          scratch[c * block + r] = o0 * data[c * 2 * block + r] + o1 * data[c * 2 * block + block + r];
      data.swap(scratch);
    }
    best = std::max(best, std::abs(data[0]));
  }
  return best;
}

CorrelationTensor::CorrelationTensor(const DensityMatrix& rho) : n_(rho.n_qubits()), t_(pow3(rho.n_qubits())) {
  const std::size_t d = rho.dim();
  const Matrix& m = rho.matrix();
  std::vector<int> idx(static_cast<std::size_t>(n_));
  for (std::size_t flat = 0; flat < t_.size(); ++flat) {
    std::size_t rest = flat;
    for (int j = n_ - 1; j >= 0; --j) {
      idx[static_cast<std::size_t>(j)] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    // Tr(rho P) = sum_k rho[k, l] P[l, k] with l = k xor (x/y flip mask).
    std::size_t flip = 0;
    for (int j = 0; j < n_; ++j)
      if (idx[static_cast<std::size_t>(j)] != 2) flip |= std::size_t{1} << (n_ - 1 - j);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t l = k ^ flip;
      cplx p = 1.0;
      for (int j = 0; j < n_; ++j) {
        const bool kb = (k >> (n_ - 1 - j)) & 1u;
        switch (idx[static_cast<std::size_t>(j)]) {
          case 0: break;                                            // x: P[l,k] = 1
          case 1: p *= kb ? cplx(0.0, -1.0) : cplx(0.0, 1.0); break;  // y: P[1,0] = i, P[0,1] = -i
          case 2: if (kb) p = -p; break;                            // z
        }
      }
      acc += m(k, l) * p;
    }
    t_[flat] = acc.real();
  }
}

double CorrelationTensor::at(std::span<const int> indices) const {
  std::size_t flat = 0;
  for (int i : indices) flat = flat * 3 + static_cast<std::size_t>(i);
  return t_[flat];
}

double CorrelationTensor::expectation(const BellPolynomial& poly, const MeasurementSettings& settings) const {
  if (poly.parties() != n_ || settings.vectors.size() != 2 * static_cast<std::size_t>(n_))
    throw Error(ErrorKind::BadSettings, "settings do not match the state's party count");
  thread_local std::vector<double> data, scratch;
  data = t_;
  std::size_t count = 1, block = t_.size();
  for (int j = 0; j < n_; ++j) {
    block /= 3;
    contract_party<3>(data, scratch, count, block, settings.setting(j, 0), settings.setting(j, 1));
    count *= 2;
  }
  const auto c = poly.coefficients();
  double value = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) value += c[s] * data[s];
  return value;
}

std::array<Vec3, 2> CorrelationTensor::last_party_fields(const BellPolynomial& poly,
                                                        const MeasurementSettings& prefix) const {
  if (poly.parties() != n_ || prefix.vectors.size() != 2 * static_cast<std::size_t>(n_ - 1))
    throw Error(ErrorKind::BadSettings, "prefix settings do not match the state's party count");
  thread_local std::vector<double> data, scratch;
  data = t_;
  std::size_t count = 1, block = t_.size();
  for (int j = 0; j + 1 < n_; ++j) {
    block /= 3;
    contract_party<3>(data, scratch, count, block, prefix.setting(j, 0), prefix.setting(j, 1));
    count *= 2;
  }
  // data now holds `count` blocks of 3: the last party's Pauli index.
  const auto c = poly.coefficients();
  std::array<Vec3, 2> f{};
  for (std::size_t head = 0; head < count; ++head)
    for (std::size_t k = 0; k < 2; ++k) {
      const double coeff = c[2 * head + k];
      if (coeff == 0.0) continue;
      for (std::size_t i = 0; i < 3; ++i) f[k][i] += coeff * data[3 * head + i];
    }
  return f;
}

std::array<Vec3, 2> ghz_last_party_fields(int n_parties, const BellPolynomial& poly, const MeasurementSettings& prefix) {
  if (prefix.vectors.size() != 2 * static_cast<std::size_t>(n_parties - 1))
    throw Error(ErrorKind::BadSettings, "prefix settings do not match the party count");
  // Term s contributes 1/2 (d0 - d1) v_z + Re(o) v_x + Im(o) v_y, with d0, d1, o the
  // products of the other parties' diagonal and off-diagonal entries.
  const auto c = poly.coefficients();
  std::array<Vec3, 2> f{};
  for (std::size_t s = 0; s < c.size(); ++s) {
    if (c[s] == 0.0) continue;
    double diag0 = 1.0, diag1 = 1.0;
    cplx off = 1.0;
    for (int j = 0; j + 1 < n_parties; ++j) {
      const Vec3& v = prefix.setting(j, (s >> (n_parties - 1 - j)) & 1u);
      diag0 *= v[2];
      diag1 *= -v[2];
      off *= cplx(v[0], -v[1]);
    }
    Vec3& out = f[s & 1u];
    out[0] += c[s] * off.real();
    out[1] += c[s] * off.imag();
    out[2] += c[s] * 0.5 * (diag0 - diag1);
  }
  return f;
}

double ghz_expectation(int n_parties, const BellPolynomial& poly, const MeasurementSettings& settings) {
  settings.validate(static_cast<std::size_t>(n_parties));
  // <GHZ| (x) O_j |GHZ> = 1/2 [prod O_j(0,0) + prod O_j(1,1)] + Re prod O_j(0,1).
  const auto c = poly.coefficients();
  double value = 0.0;
  for (std::size_t s = 0; s < c.size(); ++s) {
    if (c[s] == 0.0) continue;
    double diag0 = 1.0, diag1 = 1.0;
    cplx off = 1.0;
    for (int j = 0; j < n_parties; ++j) {
      const Vec3& v = settings.setting(j, (s >> (n_parties - 1 - j)) & 1u);
      diag0 *= v[2];
      diag1 *= -v[2];
      off *= cplx(v[0], -v[1]);
    }
    value += c[s] * (0.5 * (diag0 + diag1) + off.real());
  }
  return value;
}

Matrix chsh_operator(const MeasurementSettings& settings) { return BellPolynomial::chsh().operator_for(settings); }
Matrix mermin_operator(const MeasurementSettings& settings) { return BellPolynomial::mermin().operator_for(settings); }
Matrix mabk_operator(int n_parties, const MeasurementSettings& settings) {
  return BellPolynomial::mabk(n_parties).operator_for(settings);
}

namespace {

struct HorodeckiParts {
  std::vector<double> values;  // eigenvalues of T^t T, non-increasing
  Matrix vectors;
  Mat3 T;
};

HorodeckiParts horodecki_parts(const DensityMatrix& rho) {
  const BlochDecomposition b = bloch_decompose(rho);
  Matrix tt(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += b.T[k][i] * b.T[k][j];
      tt(i, j) = s;
    }
  Spectrum spec = hermitian_eig(tt);
  return {spec.values, spec.vectors, b.T};
}

}  // namespace

double horodecki_m(const DensityMatrix& rho) {
  const auto h = horodecki_parts(rho);
  return std::max(0.0, h.values[0]) + std::max(0.0, h.values[1]);
}

BellResult chsh_max(const DensityMatrix& rho, ChshMethod method, const BellOptions& opts) {
  if (rho.n_qubits() != 2) throw Error(ErrorKind::UnsupportedSize, "CHSH needs two qubits");
  if (method == ChshMethod::Optimize) return maximize_bell(rho, BellPolynomial::chsh(), opts);

  const auto h = horodecki_parts(rho);
  const double m1 = std::max(0.0, h.values[0]), m2 = std::max(0.0, h.values[1]);
  // c, c' span the top eigenspace of T^t T; b1 +- b2 point along them, a_j along T c, T c'.
  // The eigenvectors of a real symmetric matrix are real up to a global phase.
  auto real_column = [&](std::size_t col) {
    std::size_t big = 0;
    for (std::size_t i = 1; i < 3; ++i)
      if (std::abs(h.vectors(i, col)) > std::abs(h.vectors(big, col))) big = i;
    const cplx phase = std::conj(h.vectors(big, col)) / std::abs(h.vectors(big, col));
    Vec3 v{};
    for (std::size_t i = 0; i < 3; ++i) v[i] = (h.vectors(i, col) * phase).real();
    return v;
  };
  const Vec3 c = real_column(0), cp = real_column(1);
  auto apply_t = [&](const Vec3& v) {
    Vec3 out{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out[i] += h.T[i][j] * v[j];
    return out;
  };
  const double theta = std::atan2(std::sqrt(m2), std::sqrt(m1));
  const double ct = std::cos(theta), st = std::sin(theta);
  MeasurementSettings s;
  s.vectors = {normalized_or(apply_t(c), {0.0, 0.0, 1.0}),
               {ct * c[0] + st * cp[0], ct * c[1] + st * cp[1], ct * c[2] + st * cp[2]},
               normalized_or(apply_t(cp), {1.0, 0.0, 0.0}),
               {ct * c[0] - st * cp[0], ct * c[1] - st * cp[1], ct * c[2] - st * cp[2]}};
  return finish(2.0 * std::sqrt(m1 + m2), std::move(s), 2.0, 0.0);
}

BellResult maximize_bell(const DensityMatrix& rho, const BellPolynomial& poly, const BellOptions& opts) {
  if (poly.parties() != rho.n_qubits())
    throw Error(ErrorKind::UnsupportedSize, "Bell operator and state have different party counts");
  const CorrelationTensor tensor(rho);
  return maximize_settings(poly.parties(), poly.classical_bound(), opts,
                           [&](const MeasurementSettings& s) { return tensor.last_party_fields(poly, s); });
}

BellResult mermin_max(const DensityMatrix& rho, const BellOptions& opts) {
  if (rho.n_qubits() != 3) throw Error(ErrorKind::UnsupportedSize, "Mermin needs three qubits");
  return maximize_bell(rho, BellPolynomial::mermin(), opts);
}

BellResult mabk_max(const DensityMatrix& rho, int n_parties, const BellOptions& opts) {
  if (rho.n_qubits() != n_parties) throw Error(ErrorKind::UnsupportedSize, "party count does not match the state");
  return maximize_bell(rho, BellPolynomial::mabk(n_parties), opts);
}

double chsh_envelope(double ratio) {
  if (!(ratio >= 1.0 && ratio <= 4.0)) throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, 4]", ratio));
  if (ratio <= 2.0) return std::sqrt(8.0 / ratio);
  return 4.0 * std::sqrt((4.0 - ratio) / (4.0 * ratio));
}

double mermin_envelope(double ratio) {
  if (!(ratio >= 1.0 && ratio <= 8.0)) throw Error(ErrorKind::BadRatio, fmt::format("R = {} outside [1, 8]", ratio));
  return 4.0 * std::sqrt((8.0 - ratio) / (7.0 * ratio));
}

double ghz_mabk_max(int n_parties, const BellOptions& opts) {
  const BellPolynomial poly = n_parties == 4 ? BellPolynomial::mabk4_explicit() : BellPolynomial::mabk_recursion(n_parties);
  // The GHZ landscape has many plateaus at the classical value; one chain often stalls there.
  BellOptions o = opts;
  o.anneal.chains = std::max(o.anneal.chains, 12);
  const BellResult r = maximize_settings(n_parties, 0.0, o, [&](const MeasurementSettings& s) {
    return ghz_last_party_fields(n_parties, poly, s);
  });
  return r.value;
}

double werner_mabk_threshold(int n_parties, const BellOptions& opts) {
  if (n_parties < 4 || n_parties % 2 != 0 || n_parties > 8)
    throw Error(ErrorKind::UnsupportedSize, fmt::format("threshold defined for even n in [4, 8], got {}", n_parties));
  const BellPolynomial poly = n_parties == 4 ? BellPolynomial::mabk4_explicit() : BellPolynomial::mabk_recursion(n_parties);
  return poly.classical_bound() / ghz_mabk_max(n_parties, opts);
}

}  // namespace qmix
