#pragma once

// Two-qubit correlation measures.

#include <array>

#include "qmix/optim.hpp"
#include "qmix/states.hpp"

namespace qmix {

/// 4 rho = I(x)I + x.sigma(x)I + I(x)y.sigma + sum T_uv sigma_u(x)sigma_v
struct BlochDecomposition {
  Vec3 x{};
  Vec3 y{};
  Mat3 T{};

  Matrix reconstruct() const;
  double correlation_norm2() const;  // ||T||_F^2
};

BlochDecomposition bloch_decompose(const DensityMatrix& rho);

/// Wootters concurrence via the Hermitian form sqrt(rho) (sy x sy) rho* (sy x sy) sqrt(rho).
double concurrence(const DensityMatrix& rho);

enum class MeasuredSide { A, B };

/// Projective qubit measurement |0'> = cos a|0> + e^{ib} sin a|1>, |1'> = e^{-ib} sin a|0> - cos a|1>.
struct MeasurementBasis {
  double alpha = 0.0;  // [0, pi]
  double beta = 0.0;   // [0, 2 pi)

  std::array<std::array<cplx, 2>, 2> kets() const;
};

/// M_q(rho) - M_class(rho) for one measurement on `side`, in nats.
double discord_gap(const DensityMatrix& rho, const MeasurementBasis& basis, MeasuredSide side = MeasuredSide::B);

struct DiscordResult {
  double value = 0.0;  // nats, clamped at 0
  MeasurementBasis basis;
  double agreement = 0.0;  // |simplex - annealing| minima
};

struct DiscordOptions {
  MeasuredSide side = MeasuredSide::B;
  std::uint64_t seed = 0;
  /// OptimizerFailure when the two searches differ by more than this.
  double max_disagreement = 1e-6;
};

/// Minimum of discord_gap over (alpha, beta): 16 Nelder-Mead starts on a 4x4 grid plus one
/// annealing run.
DiscordResult quantum_discord(const DensityMatrix& rho, const DiscordOptions& opts = {});

/// (||x||^2 + ||T||^2 - k_max) / 4, k_max the top eigenvalue of x x^t + T T^t.
double geometric_discord(const DensityMatrix& rho);
/// The same quantity written as 1/R - 1/4 - (||y||^2 + k_max) / 4.
double geometric_discord_ratio_form(const DensityMatrix& rho);

/// (1/4) [[1, y^t], [x, T]] row-major.
std::array<double, 16> correlation_matrix(const DensityMatrix& rho);

/// Numerical rank of correlation_matrix (singular values > 1e-10 sigma_max).
int discord_rank_witness(const DensityMatrix& rho);

}  // namespace qmix
