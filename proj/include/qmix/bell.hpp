#pragma once

// Bell operators for two-setting, two-outcome scenarios (CHSH, Mermin, MABK) and their
// maximisation over observer settings.

#include <cstdint>
#include <span>
#include <vector>

#include "qmix/optim.hpp"
#include "qmix/states.hpp"

namespace qmix {

/// Observer settings ordered first settings of every party, then second settings:
/// (a1, b1, ..., a2, b2, ...). For CHSH this is (a1, b1, a2, b2).
struct MeasurementSettings {
  std::vector<Vec3> vectors;

  /// Setting k in {0, 1} of `party`.
  const Vec3& setting(std::size_t party, std::size_t k) const { return vectors[k * parties() + party]; }

  /// (theta, phi) pairs -> (sin t cos p, sin t sin p, cos t).
  static MeasurementSettings from_angles(std::span<const double> angles);

  std::size_t parties() const { return vectors.size() / 2; }
  /// Throws Error(BadSettings) unless there are 2 n unit vectors (1e-12).
  void validate(std::size_t n_parties) const;
};

/// Bell operator sum_s c[s] (x)_j (v_{j, s_j} . sigma), s in {0,1}^n with party 0 as the
/// most significant bit of the index.
class BellPolynomial {
 public:
  BellPolynomial(int n_parties, std::vector<double> coefficients);

  /// A1B1 + A1B2 + A2B1 - A2B2.
  static BellPolynomial chsh();
  /// B_{a a a} - B_{a b b} - B_{b a b} - B_{b b a}.
  static BellPolynomial mermin();
  /// The sixteen-term four-party form, sign fixed by the number of second settings k:
  /// + for k = 0, 3, 4 and - for k = 1, 2.
  static BellPolynomial mabk4_explicit();
  /// B_2 = CHSH, B_{N+1} = 1/2 [(A + A') (x) B_N + (A - A') (x) B_N'], primes swapping
  /// every party's two settings. Classical bound 2 for every N.
  static BellPolynomial mabk_recursion(int n_parties);
  /// Operator used for MABK maxima: CHSH for n = 2, the recursion for n = 3, and the
  /// explicit sixteen-term form (classical bound 4) for n = 4.
  static BellPolynomial mabk(int n_parties);

  int parties() const { return n_parties_; }
  std::span<const double> coefficients() const { return coeffs_; }

  /// Dense operator for given settings.
  Matrix operator_for(const MeasurementSettings& settings) const;
  /// Local-deterministic bound: max over +-1 outcome assignments of |sum_s c[s] prod o|.
  double classical_bound() const;

 private:
  int n_parties_;
  std::vector<double> coeffs_;
};

/// Pauli correlation tensor T[i_0 ... i_{n-1}] = Tr(rho sigma_{i_0} (x) ... ), i in {x, y, z}.
class CorrelationTensor {
 public:
  explicit CorrelationTensor(const DensityMatrix& rho);

  int parties() const { return n_; }
  double at(std::span<const int> indices) const;
  /// Tr(rho B) for a Bell polynomial at given settings.
  double expectation(const BellPolynomial& poly, const MeasurementSettings& settings) const;
  /// With parties 0..n-2 fixed by `prefix` (2(n-1) vectors), the expectation is
  /// v0 . f[0] + v1 . f[1] in the last party's settings; returns f.
  std::array<Vec3, 2> last_party_fields(const BellPolynomial& poly, const MeasurementSettings& prefix) const;

 private:
  int n_;
  std::vector<double> t_;
};

/// <GHZ_n| B |GHZ_n> without building the 2^n x 2^n operator.
double ghz_expectation(int n_parties, const BellPolynomial& poly, const MeasurementSettings& settings);
/// GHZ counterpart of CorrelationTensor::last_party_fields.
std::array<Vec3, 2> ghz_last_party_fields(int n_parties, const BellPolynomial& poly, const MeasurementSettings& prefix);

struct BellResult {
  double value = 0.0;
  MeasurementSettings settings;
  double classical_bound = 0.0;
  bool violated = false;  // value > classical_bound + 1e-9
  double agreement = 0.0;  // |simplex - annealing| maxima (0 for closed forms)
};

struct BellOptions {
  int restarts = 32;
  std::uint64_t seed = 0;
  /// OptimizerFailure when the two searches differ by more than this.
  double max_disagreement = 1e-3;
  AnnealSchedule anneal{.chains = 8};
  /// Reruns with doubled restarts and chains while the searches disagree.
  int escalations = 2;
};

Matrix chsh_operator(const MeasurementSettings& settings);
Matrix mermin_operator(const MeasurementSettings& settings);
Matrix mabk_operator(int n_parties, const MeasurementSettings& settings);

/// Sum of the two largest eigenvalues of T^t T.
double horodecki_m(const DensityMatrix& rho);

enum class ChshMethod { ClosedForm, Optimize };

BellResult chsh_max(const DensityMatrix& rho, ChshMethod method, const BellOptions& opts = {});
BellResult mermin_max(const DensityMatrix& rho, const BellOptions& opts = {});
BellResult mabk_max(const DensityMatrix& rho, int n_parties, const BellOptions& opts = {});

/// Maximum of Tr(rho B) over all settings for an arbitrary polynomial. The last party's
/// settings are set in closed form (along its fields), the rest searched over angles.
BellResult maximize_bell(const DensityMatrix& rho, const BellPolynomial& poly, const BellOptions& opts = {});

/// sqrt(8/R) on [1, 2], 4 sqrt((4 - R) / (4R)) on [2, 4].
double chsh_envelope(double ratio);
/// 4 sqrt((8 - R) / (7R)): proportional to sqrt((8 - R)/(8R)) and equal to 4 at R = 1.
double mermin_envelope(double ratio);

/// Maximum of the MABK operator on GHZ_n (explicit form for n = 4, recursion otherwise),
/// found by optimisation with at least 12 annealing chains.
double ghz_mabk_max(int n_parties, const BellOptions& opts = {});
/// Critical GHZ weight p_c = classical bound / GHZ maximum for even n >= 4.
double werner_mabk_threshold(int n_parties, const BellOptions& opts = {});

}  // namespace qmix
