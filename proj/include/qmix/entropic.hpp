#pragma once

#include <span>
#include <string>
#include <vector>

#include "qmix/states.hpp"

namespace qmix {

/// -sum lambda ln lambda over a spectrum; entries within 1e-12 of zero are dropped.
double spectrum_entropy(std::span<const double> eigenvalues);

/// Von Neumann entropy in nats.
double von_neumann_entropy(const DensityMatrix& rho);

/// S(rho) - S(rho_K) for one reduced subsystem K.
struct ConditionalEntry {
  std::vector<int> reduced;  // qubits kept in rho_K
  int bipartition;           // index into EntropicReport::bipartitions
  double value;              // nats

  std::string label(int n_qubits) const;  // e.g. "S(ABC)-S(AB)"
};

struct EntropicReport {
  int n_qubits = 0;
  /// One entry per bipartition K|K', listing the side containing qubit 0.
  std::vector<std::vector<int>> bipartitions;
  /// Both sides of every bipartition.
  std::vector<ConditionalEntry> entries;
  double min_conditional = 0.0;  // nats
  bool violated = false;         // min_conditional < -1e-12

  double min_conditional_ln2() const;
};

/// All 2^{n-1}-1 bipartitions, n in {2,3,4}.
EntropicReport entropic_report(const DensityMatrix& rho);

bool is_classical(const DensityMatrix& rho);

/// Root lambda > 1/e of (lambda^lambda)^{2^n} = 1/2, the largest eigenvalue at which the
/// relaxed product-form inequality stops depending on the reduced spectra.
double single_eigenvalue_bound(int n_qubits);

/// Participation ratio of the spectrum (lambda*, (1-lambda*)/(2^n-1), ...).
double single_eigenvalue_ratio(int n_qubits);

}  // namespace qmix
